#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tengraph/tensor.hpp"

namespace tengraph {

/// Raw multivariate series: one time-major (steps x N) matrix per feature.
struct SeriesTable {
    std::vector<Matrix> values;
    std::vector<double> timestamps;  ///< empty when the source had none
    std::vector<std::string> station_ids;
    std::string units;
    std::size_t imputed = 0;  ///< cells filled during loading

    std::size_t steps() const { return values.empty() ? 0 : static_cast<std::size_t>(values.front().rows()); }
    std::size_t nodes() const { return values.empty() ? 0 : static_cast<std::size_t>(values.front().cols()); }
    std::size_t features() const { return values.size(); }
};

/// Parses a rectangular CSV: header of station ids, one row per time step.
/// A first header cell named "timestamp" or "time" marks a timestamp column.
/// Empty, "NA" and "NaN" cells are imputed by carrying the last observation
/// forward, then zero-filling any leading gap.
SeriesTable parse_csv(std::istream& is, const std::string& source = "<stream>");
SeriesTable load_csv(const std::filesystem::path& path);
void write_csv(std::ostream& os, const SeriesTable& s);

/// Per-node, per-feature statistics indexed n * D + d.
struct NormalizationStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

enum class Split { Train, Val, Test };
const char* split_name(Split s);

struct WindowedDataset {
    DenseTensor x;  ///< windows x l x N x D (normalized); rank 0 when empty
    DenseTensor y;  ///< windows x T' x N x D (normalized)
    Split split = Split::Train;
    NormalizationStats stats;
    std::size_t first_step = 0;  ///< series index of x[0, 0]

    std::size_t windows() const { return x.rank() == 4 ? x.extent(0) : 0; }
    bool empty() const { return windows() == 0; }
};

struct SplitFractions {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

struct DatasetSplits {
    WindowedDataset train, val, test;
    std::size_t train_steps = 0, val_steps = 0, test_steps = 0;
    std::vector<std::string> flags;  ///< e.g. "val split empty"
};

/// Chronological split by fractions, then stride-1 windows inside each
/// segment. Statistics come from the train segment only. A val or test
/// segment too short for one window yields an empty, flagged split.
DatasetSplits window_split(const SeriesTable& s, std::size_t window, std::size_t horizon,
                           const SplitFractions& fractions);

NormalizationStats compute_stats(const SeriesTable& s, std::size_t begin, std::size_t count);
DenseTensor normalize(const DenseTensor& x, const NormalizationStats& st);
DenseTensor denormalize(const DenseTensor& x, const NormalizationStats& st);

/// Repeats each window's last observed step for every horizon step.
DenseTensor persistence_forecast(const DenseTensor& x, std::size_t horizon);

struct SynthOptions {
    std::size_t nodes = 16;
    std::size_t steps = 2000;
    std::uint64_t seed = 1;
    double noise = 0.05;
    double amplitude = 2.0;  ///< daily seasonal amplitude
    double period = 288.0;   ///< steps per day at 5-minute resolution
    double gamma = 0.3;      ///< diffusion rate
    double radius = 0.35;    ///< geometric graph connection radius
    double level = 10.0;     ///< initial states drawn from [level, level + spread)
    double spread = 1.0;
};

struct SyntheticSeries {
    SeriesTable table;
    Matrix adjacency;  ///< generator graph (symmetric, 0/1)
    Vector initial_state;
};

/// Diffusion on a random geometric graph observed with a daily cycle:
///   z(t+1) = (1 - gamma) z(t) + gamma P z(t) + noise * N(0, 1)
///   x_n(t) = z_n(t) + amplitude * sin(2 pi t / period + phase_n)
/// where P is the row-normalized adjacency.
SyntheticSeries synth_diffusion(const SynthOptions& opt);

}  // namespace tengraph
