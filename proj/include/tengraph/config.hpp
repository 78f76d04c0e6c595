#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tengraph/data.hpp"
#include "tengraph/graph.hpp"
#include "tengraph/layers.hpp"
#include "tengraph/peps.hpp"
#include "tengraph/spectral.hpp"
#include "tengraph/train.hpp"

namespace tengraph {

/// Every tunable of the pipeline. Keys in JSON configs and `--set` overrides
/// use the member names below.
struct RunConfig {
    // graph construction
    double sigma2 = 0.1;
    double epsilon = 0.5;
    std::string stg_mode = "evolved";  // kernel | evolved
    std::string ttg_mode = "kernel";   // kernel | evolved
    std::size_t embed_rank = 10;
    double stg_step = 1.0;
    std::string distance_on = "normalized";  // normalized | raw
    // spectral
    std::size_t k_a = 3;
    std::size_t k_b = 3;
    bool respect_asymmetry = false;
    // layers
    std::string composition = "sequential";  // sequential | sandwich | additive
    // peps (0 = default rank)
    std::size_t peps_rank_nodes = 0;
    std::size_t peps_rank_time = 0;
    double peps_tol = 1e-6;
    std::size_t peps_max_sweeps = 50;
    bool peps_clamp = true;
    // architecture
    std::size_t blocks = 2;
    std::size_t hidden = 32;
    std::string activation = "relu";  // between blocks: relu | none
    // optimizer
    std::string optimizer = "momentum";  // momentum | adam
    double lr = 1e-3;
    double momentum = 0.9;
    std::size_t batch = 16;
    std::size_t epochs = 100;
    std::size_t patience = 10;
    double lr_decay = 1.0;
    std::size_t lr_decay_every = 0;
    std::string loss = "mean";  // mean | sum
    bool train_graphs = false;
    // task and data
    std::size_t window = 12;
    std::size_t horizon = 12;
    double split_train = 0.7;
    double split_val = 0.1;
    double split_test = 0.2;
    std::string eval_horizons = "3,6,12";
    double mape_threshold = 1e-3;
    std::string variant = "stg+ttg+peps";  // stg | stg+ttg | stg+ttg+peps
    std::uint64_t seed = 1;
    // synthetic data
    std::size_t synth_nodes = 16;
    std::size_t synth_steps = 2000;
    double synth_noise = 0.05;
    double synth_amplitude = 2.0;
    double synth_period = 288.0;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Names of every accepted key, in dump order.
std::vector<std::string> config_keys();

/// Parses a JSON object; unknown keys and ill-typed values raise ConfigError.
RunConfig parse_config_json(std::string_view text);
/// Applies the keys present in `text` on top of `base`.
RunConfig merge_config_json(RunConfig base, std::string_view text);
std::string dump_config_json(const RunConfig& c);

/// Applies "key=value" with the value parsed per the key's type.
void apply_override(RunConfig& c, std::string_view assignment);

/// Range and enumeration checks; throws ConfigError.
void validate(const RunConfig& c);

// Typed views of the string-valued options.
GraphMode stg_mode(const RunConfig& c);
GraphMode ttg_mode(const RunConfig& c);
Composition composition(const RunConfig& c);
Activation block_activation(const RunConfig& c);
Optimizer optimizer(const RunConfig& c);
LossKind loss_kind(const RunConfig& c);
std::vector<std::size_t> eval_horizons(const RunConfig& c);

KernelParams kernel_params(const RunConfig& c);
EvolveOptions evolve_options(const RunConfig& c, std::size_t nodes);
LiftOptions lift_options(const RunConfig& c, GraphKind kind);
PepsOptions peps_options(const RunConfig& c, std::size_t nodes, std::size_t steps);
TrainOptions train_options(const RunConfig& c);
SplitFractions split_fractions(const RunConfig& c);
SynthOptions synth_options(const RunConfig& c);

}  // namespace tengraph
