#include "tengraph/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <string_view>

#include "tengraph/rng.hpp"

namespace tengraph {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_missing(std::string_view cell) {
    const std::string l = lower(cell);
    return l.empty() || l == "na" || l == "nan";
}

double parse_number(std::string_view cell, const std::string& source, std::size_t row, std::size_t col) {
    double v = 0.0;
    const auto* end = cell.data() + cell.size();
    const auto res = std::from_chars(cell.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
        throw DataError(source + ": non-numeric cell '" + std::string(cell) + "' at row " + std::to_string(row) +
                        ", column " + std::to_string(col));
    }
    return v;
}

}  // namespace

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

SeriesTable parse_csv(std::istream& is, const std::string& source) {
    std::string line;
    if (!std::getline(is, line)) throw DataError(source + ": empty CSV");
    std::vector<std::string> header = split_row(line);
    bool has_time = false;
    if (!header.empty()) {
        const std::string h0 = lower(trim(header.front()));
        has_time = h0 == "timestamp" || h0 == "time";
    }
    SeriesTable s;
    for (std::size_t i = has_time ? 1 : 0; i < header.size(); ++i) s.station_ids.emplace_back(trim(header[i]));
    const std::size_t nodes = s.station_ids.size();
    if (nodes == 0) throw DataError(source + ": header names no stations");

    std::vector<std::vector<double>> rows;
    std::vector<std::vector<bool>> missing;
    std::size_t row_no = 1;
    while (std::getline(is, line)) {
        ++row_no;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() != header.size()) {
            throw DataError(source + ": ragged row " + std::to_string(row_no) + " has " +
                            std::to_string(cells.size()) + " cells, header has " + std::to_string(header.size()));
        }
        std::size_t c0 = 0;
        if (has_time) {
            const auto cell = trim(cells[0]);
            const double ts = parse_number(cell, source, row_no, 1);
            if (!s.timestamps.empty() && !(ts > s.timestamps.back())) {
                throw DataError(source + ": timestamps not strictly increasing at row " + std::to_string(row_no));
            }
            s.timestamps.push_back(ts);
            c0 = 1;
        }
        std::vector<double> vals(nodes, 0.0);
        std::vector<bool> miss(nodes, false);
        for (std::size_t j = 0; j < nodes; ++j) {
            const auto cell = trim(cells[c0 + j]);
            if (is_missing(cell)) {
                miss[j] = true;
            } else {
                vals[j] = parse_number(cell, source, row_no, c0 + j + 1);
            }
        }
        rows.push_back(std::move(vals));
        missing.push_back(std::move(miss));
    }
    if (rows.empty()) throw DataError(source + ": no data rows");

    Matrix m(rows.size(), nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        std::optional<double> last;
        for (std::size_t t = 0; t < rows.size(); ++t) {
            if (!missing[t][j]) {
                last = rows[t][j];
                m(t, j) = rows[t][j];
            } else {
                m(t, j) = last.value_or(0.0);
                ++s.imputed;
            }
        }
    }
    s.values.push_back(std::move(m));
    return s;
}

SeriesTable load_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open '" + path.string() + "'");
    return parse_csv(is, path.string());
}

void write_csv(std::ostream& os, const SeriesTable& s) {
    if (s.features() != 1) throw DataError("write_csv: only single-feature tables are representable");
    const bool ts = !s.timestamps.empty();
    if (ts) os << "timestamp";
    for (std::size_t j = 0; j < s.nodes(); ++j) {
        if (ts || j) os << ',';
        os << (j < s.station_ids.size() ? s.station_ids[j] : "s" + std::to_string(j));
    }
    os << '\n';
    char buf[40];
    const Matrix& m = s.values.front();
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        if (ts) {
            std::snprintf(buf, sizeof buf, "%.17g", s.timestamps[t]);
            os << buf;
        }
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", m(t, j));
            if (ts || j) os << ',';
            os << buf;
        }
        os << '\n';
    }
}

NormalizationStats compute_stats(const SeriesTable& s, std::size_t begin, std::size_t count) {
    if (count == 0 || begin + count > s.steps()) throw DataError("compute_stats: empty or out-of-range segment");
    const std::size_t n = s.nodes(), d = s.features();
    NormalizationStats st;
    st.mean.assign(n * d, 0.0);
    st.stddev.assign(n * d, 1.0);
    for (std::size_t f = 0; f < d; ++f)
        for (std::size_t j = 0; j < n; ++j) {
            double sum = 0.0;
            for (std::size_t t = begin; t < begin + count; ++t) sum += s.values[f](t, j);
            const double mean = sum / static_cast<double>(count);
            double var = 0.0;
            for (std::size_t t = begin; t < begin + count; ++t) {
                const double dv = s.values[f](t, j) - mean;
                var += dv * dv;
            }
            const double sd = std::sqrt(var / static_cast<double>(count));
            st.mean[j * d + f] = mean;
            st.stddev[j * d + f] = sd > 1e-12 ? sd : 1.0;
        }
    return st;
}

namespace {

void check_stats(const DenseTensor& x, const NormalizationStats& st) {
    if (x.rank() != 4) throw ShapeError("normalize: expected a b x T x N x D tensor");
    if (st.mean.size() != x.extent(2) * x.extent(3) || st.stddev.size() != st.mean.size()) {
        throw ShapeError("normalize: statistics do not match N x D");
    }
}

}  // namespace

DenseTensor normalize(const DenseTensor& x, const NormalizationStats& st) {
    check_stats(x, st);
    DenseTensor out = x;
    const std::size_t nd = st.mean.size();
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = (data[i] - st.mean[i % nd]) / st.stddev[i % nd];
    return out;
}

DenseTensor denormalize(const DenseTensor& x, const NormalizationStats& st) {
    check_stats(x, st);
    DenseTensor out = x;
    const std::size_t nd = st.mean.size();
    auto data = out.data();
    for (std::size_t i = 0; i < data.size(); ++i) data[i] = data[i] * st.stddev[i % nd] + st.mean[i % nd];
    return out;
}

namespace {

WindowedDataset make_windows(const SeriesTable& s, std::size_t begin, std::size_t count, std::size_t window,
                             std::size_t horizon, Split split, const NormalizationStats& st) {
    WindowedDataset ds;
    ds.split = split;
    ds.stats = st;
    ds.first_step = begin;
    if (count < window + horizon) return ds;
    const std::size_t w = count - window - horizon + 1;
    const std::size_t n = s.nodes(), d = s.features();
    ds.x = DenseTensor({w, window, n, d});
    ds.y = DenseTensor({w, horizon, n, d});
    for (std::size_t i = 0; i < w; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t f = 0; f < d; ++f) {
                const double mu = st.mean[j * d + f], sd = st.stddev[j * d + f];
                for (std::size_t t = 0; t < window; ++t) ds.x(i, t, j, f) = (s.values[f](begin + i + t, j) - mu) / sd;
                for (std::size_t h = 0; h < horizon; ++h)
                    ds.y(i, h, j, f) = (s.values[f](begin + i + window + h, j) - mu) / sd;
            }
    return ds;
}

}  // namespace

DatasetSplits window_split(const SeriesTable& s, std::size_t window, std::size_t horizon,
                           const SplitFractions& fr) {
    if (window < 1 || horizon < 1) throw ConfigError("window_split: window and horizon must be at least 1");
    if (fr.train <= 0.0 || fr.val < 0.0 || fr.test < 0.0 || std::abs(fr.train + fr.val + fr.test - 1.0) > 1e-9) {
        throw ConfigError("window_split: fractions must be non-negative, train positive, summing to 1");
    }
    const std::size_t steps = s.steps();
    DatasetSplits out;
    out.train_steps = static_cast<std::size_t>(std::llround(fr.train * static_cast<double>(steps)));
    out.val_steps = static_cast<std::size_t>(std::llround(fr.val * static_cast<double>(steps)));
    out.train_steps = std::min(out.train_steps, steps);
    out.val_steps = std::min(out.val_steps, steps - out.train_steps);
    out.test_steps = fr.test > 0.0 ? steps - out.train_steps - out.val_steps : 0;

    // Only the train split is mandatory; short val/test segments are flagged.
    if (out.train_steps < window + horizon) {
        const auto minimum = static_cast<std::size_t>(std::ceil(static_cast<double>(window + horizon) / fr.train));
        throw DataError("window_split: train split has no window; series of " + std::to_string(steps) +
                        " steps is too short, need at least " + std::to_string(minimum) + " steps for l=" +
                        std::to_string(window) + ", T'=" + std::to_string(horizon));
    }

    const NormalizationStats st = compute_stats(s, 0, out.train_steps);
    out.train = make_windows(s, 0, out.train_steps, window, horizon, Split::Train, st);
    out.val = make_windows(s, out.train_steps, out.val_steps, window, horizon, Split::Val, st);
    out.test = make_windows(s, out.train_steps + out.val_steps, out.test_steps, window, horizon, Split::Test, st);
    if (out.val.empty()) out.flags.emplace_back("val split empty");
    if (out.test.empty()) out.flags.emplace_back("test split empty");
    return out;
}

DenseTensor persistence_forecast(const DenseTensor& x, std::size_t horizon) {
    if (x.rank() != 4) throw ShapeError("persistence_forecast: expected b x l x N x D windows");
    const std::size_t b = x.extent(0), l = x.extent(1), n = x.extent(2), d = x.extent(3);
    DenseTensor out({b, horizon, n, d});
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t h = 0; h < horizon; ++h)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t f = 0; f < d; ++f) out(i, h, j, f) = x(i, l - 1, j, f);
    return out;
}

SyntheticSeries synth_diffusion(const SynthOptions& opt) {
    if (opt.nodes < 2) throw ConfigError("synth_diffusion: need at least 2 nodes");
    if (opt.steps < 1) throw ConfigError("synth_diffusion: need at least 1 step");
    if (!(opt.period > 0.0)) throw ConfigError("synth_diffusion: period must be positive");
    if (!(opt.spread >= 0.0)) throw ConfigError("synth_diffusion: spread must be non-negative");
    const std::size_t n = opt.nodes;
    Rng rng(opt.seed);

    Matrix pos(n, 2);
    for (std::size_t i = 0; i < n; ++i) {
        pos(i, 0) = rng.uniform();
        pos(i, 1) = rng.uniform();
    }
    Matrix adj = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t nearest = i == 0 ? 1 : 0;
        double best = (pos.row(i) - pos.row(nearest)).norm();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double dist = (pos.row(i) - pos.row(j)).norm();
            if (dist < opt.radius) adj(i, j) = adj(j, i) = 1.0;
            if (dist < best) {
                best = dist;
                nearest = j;
            }
        }
        // No isolated stations.
        adj(i, nearest) = adj(nearest, i) = 1.0;
    }
    Matrix p = adj;
    for (std::size_t i = 0; i < n; ++i) p.row(i) /= p.row(i).sum();

    Vector z(n);
    for (std::size_t i = 0; i < n; ++i) z(i) = opt.level + opt.spread * rng.uniform();
    Vector phase(n);
    for (std::size_t i = 0; i < n; ++i) phase(i) = 2.0 * std::numbers::pi * rng.uniform();

    SyntheticSeries out;
    out.adjacency = adj;
    out.initial_state = z;
    Matrix values(opt.steps, n);
    const double omega = 2.0 * std::numbers::pi / opt.period;
    for (std::size_t t = 0; t < opt.steps; ++t) {
        for (std::size_t i = 0; i < n; ++i) {
            values(t, i) = z(i) + opt.amplitude * std::sin(omega * static_cast<double>(t) + phase(i));
        }
        Vector next = (1.0 - opt.gamma) * z + opt.gamma * (p * z);
        for (std::size_t i = 0; i < n; ++i) next(i) += opt.noise * rng.normal();
        z = std::move(next);
    }
    out.table.values.push_back(std::move(values));
    for (std::size_t i = 0; i < n; ++i) out.table.station_ids.push_back("s" + std::to_string(i));
    out.table.units = "synthetic";
    return out;
}

}  // namespace tengraph
