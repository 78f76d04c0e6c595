#include "tengraph/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <variant>

#include <json.hpp>

namespace tengraph {

namespace {

using Field = std::variant<double RunConfig::*, std::size_t RunConfig::*,
                           bool RunConfig::*, std::string RunConfig::*>;

struct Entry {
    const char* name;
    Field field;
};

static_assert(std::is_same_v<std::size_t, std::uint64_t>, "seed is stored through the size_t alternative");

#define TG_FIELD(name) Entry{#name, &RunConfig::name}

const std::vector<Entry>& registry() {
    static const std::vector<Entry> entries = {
        TG_FIELD(sigma2),          TG_FIELD(epsilon),         TG_FIELD(stg_mode),
        TG_FIELD(ttg_mode),        TG_FIELD(embed_rank),      TG_FIELD(stg_step),
        TG_FIELD(distance_on),     TG_FIELD(k_a),             TG_FIELD(k_b),
        TG_FIELD(respect_asymmetry), TG_FIELD(composition),   TG_FIELD(peps_rank_nodes),
        TG_FIELD(peps_rank_time),  TG_FIELD(peps_tol),        TG_FIELD(peps_max_sweeps),
        TG_FIELD(peps_clamp),      TG_FIELD(blocks),          TG_FIELD(hidden),
        TG_FIELD(activation),      TG_FIELD(optimizer),       TG_FIELD(lr),
        TG_FIELD(momentum),        TG_FIELD(batch),           TG_FIELD(epochs),
        TG_FIELD(patience),        TG_FIELD(lr_decay),        TG_FIELD(lr_decay_every),
        TG_FIELD(loss),            TG_FIELD(train_graphs),    TG_FIELD(window),
        TG_FIELD(horizon),         TG_FIELD(split_train),     TG_FIELD(split_val),
        TG_FIELD(split_test),      TG_FIELD(eval_horizons),   TG_FIELD(mape_threshold),
        TG_FIELD(variant),         TG_FIELD(seed),                    TG_FIELD(synth_nodes),
        TG_FIELD(synth_steps),     TG_FIELD(synth_noise),     TG_FIELD(synth_amplitude),
        TG_FIELD(synth_period),
    };
    return entries;
}

#undef TG_FIELD

const Entry& find_entry(std::string_view key) {
    for (const auto& e : registry())
        if (key == e.name) return e;
    throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void set_from_json(RunConfig& c, const Entry& e, const nlohmann::json& v) {
    const std::string key = e.name;
    std::visit(
        [&](auto member) {
            using T = std::remove_reference_t<decltype(c.*member)>;
            if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) throw ConfigError("config key '" + key + "' expects a boolean");
                c.*member = v.get<bool>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw ConfigError("config key '" + key + "' expects a string");
                c.*member = v.get<std::string>();
            } else if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw ConfigError("config key '" + key + "' expects a number");
                c.*member = v.get<double>();
            } else {
                if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                    throw ConfigError("config key '" + key + "' expects a non-negative integer");
                }
                c.*member = v.get<T>();
            }
        },
        e.field);
}

template <class T>
T parse_unsigned(std::string_view s, const std::string& key) {
    T v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigError("config key '" + key + "' expects a non-negative integer, got '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& e : registry()) keys.emplace_back(e.name);
    return keys;
}

RunConfig merge_config_json(RunConfig base, std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) set_from_json(base, find_entry(it.key()), it.value());
    return base;
}

RunConfig parse_config_json(std::string_view text) { return merge_config_json(RunConfig{}, text); }

std::string dump_config_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    for (const auto& e : registry()) {
        std::visit([&](auto member) { j[e.name] = c.*member; }, e.field);
    }
    return j.dump(2) + "\n";
}

void apply_override(RunConfig& c, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string_view value = assignment.substr(eq + 1);
    const Entry& e = find_entry(key);
    std::visit(
        [&](auto member) {
            using T = std::remove_reference_t<decltype(c.*member)>;
            if constexpr (std::is_same_v<T, bool>) {
                if (value == "true" || value == "1") {
                    c.*member = true;
                } else if (value == "false" || value == "0") {
                    c.*member = false;
                } else {
                    throw ConfigError("config key '" + key + "' expects true/false");
                }
            } else if constexpr (std::is_same_v<T, std::string>) {
                c.*member = std::string(value);
            } else if constexpr (std::is_same_v<T, double>) {
                double v = 0.0;
                const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
                if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
                    throw ConfigError("config key '" + key + "' expects a number, got '" + std::string(value) + "'");
                }
                c.*member = v;
            } else {
                c.*member = parse_unsigned<T>(value, key);
            }
        },
        e.field);
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

}  // namespace

GraphMode stg_mode(const RunConfig& c) {
    if (c.stg_mode == "kernel") return GraphMode::Kernel;
    if (c.stg_mode == "evolved") return GraphMode::Evolved;
    throw ConfigError("stg_mode must be kernel or evolved, got '" + c.stg_mode + "'");
}

GraphMode ttg_mode(const RunConfig& c) {
    if (c.ttg_mode == "kernel") return GraphMode::Kernel;
    if (c.ttg_mode == "evolved") return GraphMode::Evolved;
    throw ConfigError("ttg_mode must be kernel or evolved, got '" + c.ttg_mode + "'");
}

Composition composition(const RunConfig& c) {
    if (c.composition == "sequential") return Composition::Sequential;
    if (c.composition == "sandwich") return Composition::Sandwich;
    if (c.composition == "additive") return Composition::Additive;
    throw ConfigError("composition must be sequential, sandwich or additive, got '" + c.composition + "'");
}

Activation block_activation(const RunConfig& c) {
    if (c.activation == "relu") return Activation::ReLU;
    if (c.activation == "none") return Activation::None;
    throw ConfigError("activation must be relu or none, got '" + c.activation + "'");
}

Optimizer optimizer(const RunConfig& c) {
    if (c.optimizer == "momentum") return Optimizer::Momentum;
    if (c.optimizer == "adam") return Optimizer::Adam;
    throw ConfigError("optimizer must be momentum or adam, got '" + c.optimizer + "'");
}

LossKind loss_kind(const RunConfig& c) {
    if (c.loss == "mean") return LossKind::Mean;
    if (c.loss == "sum") return LossKind::Sum;
    throw ConfigError("loss must be mean or sum, got '" + c.loss + "'");
}

std::vector<std::size_t> eval_horizons(const RunConfig& c) {
    std::vector<std::size_t> out;
    std::string_view s = c.eval_horizons;
    while (!s.empty()) {
        const auto comma = s.find(',');
        const std::string_view tok = s.substr(0, comma);
        const auto h = parse_unsigned<std::size_t>(tok, "eval_horizons");
        if (h == 0) throw ConfigError("eval_horizons entries must be positive");
        out.push_back(h);
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    if (out.empty()) throw ConfigError("eval_horizons must list at least one horizon");
    return out;
}

void validate(const RunConfig& c) {
    require(c.sigma2 > 0.0, "sigma2 must be positive");
    require(c.epsilon > 0.0 && c.epsilon <= 1.0, "epsilon must lie in (0, 1]");
    (void)stg_mode(c);
    (void)ttg_mode(c);
    require(c.embed_rank >= 1, "embed_rank must be at least 1");
    require(c.stg_step >= 0.0, "stg_step must be non-negative");
    require(c.distance_on == "normalized" || c.distance_on == "raw", "distance_on must be normalized or raw");
    require(c.k_a >= 1 && c.k_b >= 1, "k_a and k_b must be at least 1");
    (void)composition(c);
    require(c.peps_tol > 0.0, "peps_tol must be positive");
    require(c.peps_max_sweeps >= 1, "peps_max_sweeps must be at least 1");
    require(c.blocks >= 1 && c.hidden >= 1, "blocks and hidden must be at least 1");
    (void)block_activation(c);
    (void)optimizer(c);
    require(c.lr >= 0.0, "lr must be non-negative");
    require(c.momentum >= 0.0 && c.momentum < 1.0, "momentum must lie in [0, 1)");
    require(c.batch >= 1 && c.epochs >= 1 && c.patience >= 1, "batch, epochs and patience must be at least 1");
    require(c.lr_decay > 0.0, "lr_decay must be positive");
    (void)loss_kind(c);
    require(c.window >= 2, "window must be at least 2 (the temporal graph needs two steps)");
    require(c.horizon >= 1, "horizon must be at least 1");
    require(c.split_train > 0.0 && c.split_val >= 0.0 && c.split_test >= 0.0 &&
                std::abs(c.split_train + c.split_val + c.split_test - 1.0) <= 1e-9,
            "split fractions must be non-negative with train > 0, summing to 1");
    for (auto h : eval_horizons(c)) {
        require(h <= c.horizon, "eval horizon " + std::to_string(h) + " exceeds horizon " + std::to_string(c.horizon));
    }
    require(c.mape_threshold >= 0.0, "mape_threshold must be non-negative");
    require(c.variant == "stg" || c.variant == "stg+ttg" || c.variant == "stg+ttg+peps",
            "variant must be stg, stg+ttg or stg+ttg+peps");
    require(c.synth_nodes >= 2, "synth_nodes must be at least 2");
    require(c.synth_steps >= 1, "synth_steps must be at least 1");
    require(c.synth_noise >= 0.0, "synth_noise must be non-negative");
    require(c.synth_period > 0.0, "synth_period must be positive");
}

KernelParams kernel_params(const RunConfig& c) { return {c.sigma2, c.epsilon}; }

EvolveOptions evolve_options(const RunConfig& c, std::size_t nodes) {
    return {std::min(c.embed_rank, nodes), c.stg_step};
}

LiftOptions lift_options(const RunConfig& c, GraphKind kind) {
    return {kind == GraphKind::Spatial ? c.k_a : c.k_b, c.respect_asymmetry};
}

PepsOptions peps_options(const RunConfig& c, std::size_t nodes, std::size_t steps) {
    PepsOptions o = default_peps_options(nodes, steps);
    if (c.peps_rank_nodes > 0) o.rank_nodes = c.peps_rank_nodes;
    if (c.peps_rank_time > 0) o.rank_time = c.peps_rank_time;
    o.tol = c.peps_tol;
    o.max_sweeps = c.peps_max_sweeps;
    return o;
}

TrainOptions train_options(const RunConfig& c) {
    TrainOptions o;
    o.optimizer = optimizer(c);
    o.lr = c.lr;
    o.momentum = c.momentum;
    o.batch = c.batch;
    o.epochs = c.epochs;
    o.patience = c.patience;
    o.lr_decay = c.lr_decay;
    o.lr_decay_every = c.lr_decay_every;
    o.loss = loss_kind(c);
    o.train_graphs = c.train_graphs;
    o.seed = c.seed;
    return o;
}

SplitFractions split_fractions(const RunConfig& c) { return {c.split_train, c.split_val, c.split_test}; }

SynthOptions synth_options(const RunConfig& c) {
    SynthOptions o;
    o.nodes = c.synth_nodes;
    o.steps = c.synth_steps;
    o.seed = c.seed;
    o.noise = c.synth_noise;
    o.amplitude = c.synth_amplitude;
    o.period = c.synth_period;
    return o;
}

}  // namespace tengraph
