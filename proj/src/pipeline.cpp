#include "tengraph/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "tengraph/graph.hpp"
#include "tengraph/peps.hpp"
#include "tengraph/serialize.hpp"
#include "tengraph/train.hpp"

namespace tengraph {

namespace {

using io::TensorRecord;
using json = nlohmann::ordered_json;

fs::path artifact(const fs::path& out, const std::string& name) { return out / name; }

void require_artifact(const fs::path& p, const char* producer) {
    if (!fs::exists(p)) {
        throw DataError("missing artifact '" + p.string() + "' (run '" + producer + "' first)");
    }
}

void ensure_dir(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw DataError("cannot create output directory '" + out.string() + "': " + ec.message());
}

TensorRecord generic(const DenseTensor& t) { return {std::string(io::kGeneric), 0, t}; }
TensorRecord generic(const Matrix& m) { return generic(DenseTensor::from_matrix(m)); }

DenseTensor vector_tensor(const std::vector<double>& v) { return DenseTensor({v.size()}, v); }

std::vector<double> tensor_values(const DenseTensor& t) { return {t.data().begin(), t.data().end()}; }

const DenseTensor& entry(const io::Container& c, const std::string& name, const fs::path& path) {
    if (!c.contains(name)) throw DataError("'" + path.string() + "' has no entry '" + name + "'");
    return c.get(name).tensor;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string shape_text(const DenseTensor& t) {
    std::string s;
    for (std::size_t i = 0; i < t.rank(); ++i) s += (i ? "x" : "") + std::to_string(t.extent(i));
    return s.empty() ? "empty" : s;
}

json metrics_json(const Metrics& m) {
    json j;
    j["mae"] = m.mae;
    j["rmse"] = m.rmse;
    if (m.mape) {
        j["mape"] = *m.mape;
    } else {
        j["mape"] = nullptr;
    }
    return j;
}

json slice_summary_json(const DenseTensor& g, GraphMode mode) {
    const auto slices = summarize_slices(g);
    json j;
    j["mode"] = mode == GraphMode::Kernel ? "kernel" : "evolved";
    j["shape"] = g.shape();
    double density = 0.0;
    double lo = slices.front().min_weight, hi = slices.front().max_weight;
    json per = json::array();
    for (const auto& s : slices) {
        density += s.density;
        lo = std::min(lo, s.min_weight);
        hi = std::max(hi, s.max_weight);
        per.push_back({{"density", s.density}, {"min", s.min_weight}, {"max", s.max_weight}});
    }
    j["mean_density"] = density / static_cast<double>(slices.size());
    j["min"] = lo;
    j["max"] = hi;
    j["slices"] = std::move(per);
    return j;
}

LiftedGraph read_lifted(const fs::path& p, GraphKind kind) {
    return LiftedGraph{io::read_tensor_file(p, io::kLiftedGraph).tensor, kind};
}

void write_lifted(const fs::path& p, const LiftedGraph& g) {
    io::write_tensor_file(p, {std::string(io::kLiftedGraph), 0, g.filters});
}

void check_variant(const std::string& v) {
    if (std::find(kVariants.begin(), kVariants.end(), v) == kVariants.end()) {
        throw ConfigError("unknown variant '" + v + "' (expected stg, stg+ttg or stg+ttg+peps)");
    }
}

DenseTensor clamp_negative(DenseTensor t) {
    for (double& v : t.data()) v = std::max(v, 0.0);
    return t;
}

}  // namespace

std::string variant_tag(const std::string& variant) {
    std::string t = variant;
    std::replace(t.begin(), t.end(), '+', '_');
    return t;
}

// ---- datasets and checkpoints -------------------------------------------

void write_dataset(const fs::path& path, const DatasetSplits& d) {
    io::Container c;
    auto add_split = [&](const WindowedDataset& w) {
        if (w.empty()) return;
        const std::string name = split_name(w.split);
        c.add(name + ".x", generic(w.x));
        c.add(name + ".y", generic(w.y));
    };
    add_split(d.train);
    add_split(d.val);
    add_split(d.test);
    c.add("mean", generic(vector_tensor(d.train.stats.mean)));
    c.add("std", generic(vector_tensor(d.train.stats.stddev)));
    c.add("first_step", generic(vector_tensor({static_cast<double>(d.train.first_step),
                                               static_cast<double>(d.val.first_step),
                                               static_cast<double>(d.test.first_step)})));
    io::write_container(path, c);
}

PreparedData read_dataset(const fs::path& path) {
    require_artifact(path, "prepare");
    const io::Container c = io::read_container(path);
    NormalizationStats st{tensor_values(entry(c, "mean", path)), tensor_values(entry(c, "std", path))};
    const auto first = tensor_values(entry(c, "first_step", path));
    if (first.size() != 3) throw DataError("'" + path.string() + "': malformed first_step entry");
    PreparedData out;
    auto load = [&](WindowedDataset& w, Split s, double start) {
        w.split = s;
        w.stats = st;
        w.first_step = static_cast<std::size_t>(start);
        const std::string name = split_name(s);
        if (!c.contains(name + ".x")) return;
        w.x = entry(c, name + ".x", path);
        w.y = entry(c, name + ".y", path);
        if (w.x.rank() != 4 || w.y.rank() != 4 || w.x.extent(0) != w.y.extent(0)) {
            throw DataError("'" + path.string() + "': malformed " + name + " split");
        }
    };
    load(out.train, Split::Train, first[0]);
    load(out.val, Split::Val, first[1]);
    load(out.test, Split::Test, first[2]);
    if (out.train.empty()) throw DataError("'" + path.string() + "': no training windows");
    return out;
}

void write_checkpoint(const fs::path& path, const ModelParams& p) {
    io::Container c;
    c.add("input_proj", generic(p.input_proj));
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        const std::string b = "block" + std::to_string(i);
        const BlockParams& blk = p.blocks[i];
        c.add(b + ".w_a", {std::string(io::kSpatialKernel), io::kLayoutKMajor, blk.w_a.w});
        c.add(b + ".w_b", {std::string(io::kTemporalKernel), io::kLayoutKMajor, blk.w_b.w});
        if (blk.w_b2) c.add(b + ".w_b2", {std::string(io::kTemporalKernel), io::kLayoutKMajor, blk.w_b2->w});
    }
    c.add("output_head", generic(p.output_head));
    c.add("spatial", {std::string(io::kLiftedGraph), 0, p.spatial.filters});
    c.add("temporal", {std::string(io::kLiftedGraph), 0, p.temporal.filters});
    c.add("meta", generic(vector_tensor({static_cast<double>(p.layer.composition),
                                         static_cast<double>(p.layer.activation),
                                         static_cast<double>(p.between_blocks),
                                         static_cast<double>(p.horizon),
                                         static_cast<double>(p.blocks.size())})));
    io::write_container(path, c);
}

ModelParams read_checkpoint(const fs::path& path) {
    require_artifact(path, "train");
    const io::Container c = io::read_container(path);
    const auto meta = tensor_values(entry(c, "meta", path));
    if (meta.size() != 5) throw DataError("'" + path.string() + "': malformed meta entry");
    ModelParams p;
    p.layer.composition = static_cast<Composition>(static_cast<int>(meta[0]));
    p.layer.activation = static_cast<Activation>(static_cast<int>(meta[1]));
    p.between_blocks = static_cast<Activation>(static_cast<int>(meta[2]));
    p.horizon = static_cast<std::size_t>(meta[3]);
    const auto blocks = static_cast<std::size_t>(meta[4]);
    p.input_proj = entry(c, "input_proj", path).to_matrix();
    for (std::size_t i = 0; i < blocks; ++i) {
        const std::string b = "block" + std::to_string(i);
        BlockParams blk;
        blk.w_a.w = entry(c, b + ".w_a", path);
        blk.w_b.w = entry(c, b + ".w_b", path);
        if (c.contains(b + ".w_b2")) blk.w_b2 = TemporalKernel{c.get(b + ".w_b2").tensor};
        p.blocks.push_back(std::move(blk));
    }
    p.output_head = entry(c, "output_head", path).to_matrix();
    p.spatial = LiftedGraph{entry(c, "spatial", path), GraphKind::Spatial};
    p.temporal = LiftedGraph{entry(c, "temporal", path), GraphKind::Temporal};
    return p;
}

// ---- stages ---------------------------------------------------------------

void cmd_synth(const RunConfig& c, const fs::path& out) {
    validate(c);
    ensure_dir(out);
    const SyntheticSeries s = synth_diffusion(synth_options(c));
    std::ostringstream os;
    write_csv(os, s.table);
    io::write_text_file(artifact(out, "series.csv"), os.str());
    io::write_tensor_file(artifact(out, "truth_adjacency.bin"), generic(s.adjacency));
}

void cmd_ingest(const RunConfig& c, const fs::path& csv, const fs::path& out) {
    validate(c);
    ensure_dir(out);
    const SeriesTable s = load_csv(csv);
    if (s.imputed > 0) std::cerr << "ingest: imputed " << s.imputed << " missing cells\n";
    std::ostringstream os;
    write_csv(os, s);
    io::write_text_file(artifact(out, "series.csv"), os.str());
}

void cmd_prepare(const RunConfig& c, const fs::path& out) {
    validate(c);
    const fs::path series = artifact(out, "series.csv");
    require_artifact(series, "synth' or 'ingest");
    const SeriesTable s = load_csv(series);
    const DatasetSplits d = window_split(s, c.window, c.horizon, split_fractions(c));
    write_dataset(artifact(out, "dataset.bin"), d);
    if (!d.test.empty()) {
        io::write_tensor_file(artifact(out, "test_truth.bin"), generic(denormalize(d.test.y, d.test.stats)));
    }

    std::ostringstream m;
    m << "steps " << s.steps() << "\nnodes " << s.nodes() << "\nfeatures " << s.features() << "\n";
    m << "window " << c.window << "\nhorizon " << c.horizon << "\n";
    m << "split_fractions " << fmt(c.split_train) << ' ' << fmt(c.split_val) << ' ' << fmt(c.split_test) << "\n";
    m << "split_steps " << d.train_steps << ' ' << d.val_steps << ' ' << d.test_steps << "\n";
    for (const WindowedDataset* w : {&d.train, &d.val, &d.test}) {
        m << split_name(w->split) << ".x " << shape_text(w->x) << "\n";
        m << split_name(w->split) << ".y " << shape_text(w->y) << "\n";
    }
    m << "imputed " << s.imputed << "\nseed " << c.seed << "\n";
    for (const auto& f : d.flags) m << "flag " << f << "\n";
    for (std::size_t i = 0; i < d.train.stats.mean.size(); ++i) {
        m << "stats " << i << ' ' << fmt(d.train.stats.mean[i]) << ' ' << fmt(d.train.stats.stddev[i]) << "\n";
    }
    io::write_text_file(artifact(out, "manifest.txt"), m.str());
}

void cmd_build_graph(const RunConfig& c, const fs::path& out, bool edge_lists) {
    validate(c);
    const PreparedData d = read_dataset(artifact(out, "dataset.bin"));
    const DenseTensor x = c.distance_on == "raw" ? denormalize(d.train.x, d.train.stats) : d.train.x;
    const KernelParams kp = kernel_params(c);
    const std::size_t n = x.extent(2), l = x.extent(1);

    const SpatialTensorGraph stg = stg_mode(c) == GraphMode::Kernel
                                       ? build_kernel_stg(x, kp)
                                       : evolve_stg(build_initial_stg(x, kp), l, evolve_options(c, n), kp);
    const TemporalTensorGraph ttg =
        ttg_mode(c) == GraphMode::Kernel ? build_ttg(x, kp) : evolve_ttg(x, kp, evolve_options(c, l));

    io::write_tensor_file(artifact(out, "stg.bin"), {std::string(io::kSpatialGraph), 0, stg.weights});
    io::write_tensor_file(artifact(out, "ttg.bin"), {std::string(io::kTemporalGraph), 0, ttg.weights});

    json summary;
    summary["sigma2"] = kp.sigma2;
    summary["epsilon"] = kp.epsilon;
    summary["distance_on"] = c.distance_on;
    summary["stg"] = slice_summary_json(stg.weights, stg.mode);
    summary["ttg"] = slice_summary_json(ttg.weights, ttg.mode);
    io::write_text_file(artifact(out, "graph_summary.json"), summary.dump(2) + "\n");

    if (edge_lists) {
        std::ostringstream es, et;
        write_edge_list(es, stg.weights);
        write_edge_list(et, ttg.weights);
        io::write_text_file(artifact(out, "edges_stg.txt"), es.str());
        io::write_text_file(artifact(out, "edges_ttg.txt"), et.str());
    }
}

void cmd_lift(const RunConfig& c, const fs::path& out) {
    validate(c);
    const fs::path ps = artifact(out, "stg.bin"), pt = artifact(out, "ttg.bin");
    require_artifact(ps, "build-graph");
    require_artifact(pt, "build-graph");
    const DenseTensor a = io::read_tensor_file(ps, io::kSpatialGraph).tensor;
    const DenseTensor b = io::read_tensor_file(pt, io::kTemporalGraph).tensor;
    write_lifted(artifact(out, "stg_lifted.bin"),
                 lift_slices(a, GraphKind::Spatial, lift_options(c, GraphKind::Spatial)));
    write_lifted(artifact(out, "ttg_lifted.bin"),
                 lift_slices(b, GraphKind::Temporal, lift_options(c, GraphKind::Temporal)));
}

void cmd_peps(const RunConfig& c, const fs::path& out) {
    validate(c);
    const fs::path ps = artifact(out, "stg.bin"), pt = artifact(out, "ttg.bin");
    require_artifact(ps, "build-graph");
    require_artifact(pt, "build-graph");
    const DenseTensor a = io::read_tensor_file(ps, io::kSpatialGraph).tensor;
    const DenseTensor b = io::read_tensor_file(pt, io::kTemporalGraph).tensor;
    const std::size_t n = a.extent(0), t = a.extent(2);
    const PepsPair p = peps_fit(a, b, peps_options(c, n, t));

    io::Container cont;
    cont.add("node_factor", generic(p.node_factor));
    cont.add("time_factor", generic(p.time_factor));
    cont.add("core_a", generic(p.core_a));
    cont.add("core_b", generic(p.core_b));
    cont.add("history", generic(vector_tensor(p.history)));
    io::write_container(artifact(out, "peps.bin"), cont);

    auto [ra, rb] = peps_reconstruct(p);
    if (c.peps_clamp) {
        ra = clamp_negative(std::move(ra));
        rb = clamp_negative(std::move(rb));
    }
    std::ostringstream m;
    m << "rank_nodes " << p.rank_nodes() << "\nrank_time " << p.rank_time() << "\n";
    m << "sweeps " << p.sweeps << "\njoint_error " << fmt(p.joint_error) << "\n";
    m << "relative_error_stg " << fmt(relative_error(ra, a)) << "\n";
    m << "relative_error_ttg " << fmt(relative_error(rb, b)) << "\n";
    m << "parameters " << p.parameter_count() << "\n";
    m << "compression_ratio " << fmt(compression_ratio(p, n, t)) << "\n";
    m << "clamped " << (c.peps_clamp ? "true" : "false") << "\n";
    m << "history";
    for (double h : p.history) m << ' ' << fmt(h);
    m << "\n";
    io::write_text_file(artifact(out, "peps_meta.txt"), m.str());

    write_lifted(artifact(out, "stg_peps_lifted.bin"),
                 lift_slices(ra, GraphKind::Spatial, lift_options(c, GraphKind::Spatial)));
    write_lifted(artifact(out, "ttg_peps_lifted.bin"),
                 lift_slices(rb, GraphKind::Temporal, lift_options(c, GraphKind::Temporal)));
}

std::pair<LiftedGraph, LiftedGraph> variant_graphs(const RunConfig& c, const fs::path& out,
                                                   const std::string& variant) {
    check_variant(variant);
    if (variant == "stg+ttg+peps") {
        const fs::path ps = artifact(out, "stg_peps_lifted.bin"), pt = artifact(out, "ttg_peps_lifted.bin");
        require_artifact(ps, "peps");
        require_artifact(pt, "peps");
        return {read_lifted(ps, GraphKind::Spatial), read_lifted(pt, GraphKind::Temporal)};
    }
    const fs::path ps = artifact(out, "stg_lifted.bin");
    require_artifact(ps, "lift");
    LiftedGraph spatial = read_lifted(ps, GraphKind::Spatial);
    if (variant == "stg") {
        // No temporal graph: every temporal filter is the identity.
        LiftedGraph temporal =
            identity_lifted(spatial.slices(), lift_options(c, GraphKind::Temporal).order, spatial.size(),
                            GraphKind::Temporal);
        return {std::move(spatial), std::move(temporal)};
    }
    const fs::path pt = artifact(out, "ttg_lifted.bin");
    require_artifact(pt, "lift");
    return {std::move(spatial), read_lifted(pt, GraphKind::Temporal)};
}

void cmd_train(const RunConfig& c, const fs::path& out) {
    validate(c);
    const PreparedData d = read_dataset(artifact(out, "dataset.bin"));
    if (d.train.y.extent(1) != c.horizon || d.train.x.extent(1) != c.window) {
        throw DataError("dataset.bin was prepared with l=" + std::to_string(d.train.x.extent(1)) +
                        ", T'=" + std::to_string(d.train.y.extent(1)) + " but the config asks for l=" +
                        std::to_string(c.window) + ", T'=" + std::to_string(c.horizon) + "; rerun 'prepare'");
    }
    auto [spatial, temporal] = variant_graphs(c, out, c.variant);
    ModelShape shape;
    shape.features = d.train.x.extent(3);
    shape.hidden = c.hidden;
    shape.blocks = c.blocks;
    shape.horizon = c.horizon;
    shape.composition = composition(c);
    shape.between_blocks = block_activation(c);
    Rng rng(c.seed);
    const ModelParams init = init_model(shape, std::move(spatial), std::move(temporal), rng);
    const TrainResult r = train(init, d.train, d.val, train_options(c));

    const std::string tag = variant_tag(c.variant);
    write_checkpoint(artifact(out, "checkpoint_" + tag + ".bin"), r.params);
    std::ostringstream h;
    write_history_csv(h, r.history);
    io::write_text_file(artifact(out, "history_" + tag + ".csv"), h.str());
}

void cmd_predict(const RunConfig& c, const fs::path& out) {
    validate(c);
    check_variant(c.variant);
    const std::string tag = variant_tag(c.variant);
    const ModelParams p = read_checkpoint(artifact(out, "checkpoint_" + tag + ".bin"));
    const PreparedData d = read_dataset(artifact(out, "dataset.bin"));
    if (d.test.empty()) throw DataError("predict: dataset.bin has no test windows");
    const DenseTensor pred = denormalize(predict(p, d.test.x), d.test.stats);
    if (!pred.all_finite()) throw NumericalError("predict: forecast for '" + c.variant + "' is not finite");
    io::write_tensor_file(artifact(out, "forecast_" + tag + ".bin"), generic(pred));
}

namespace {

struct EvalRow {
    std::string name;
    std::vector<std::pair<std::size_t, Metrics>> per_horizon;
    Metrics overall;
};

EvalRow evaluate(const std::string& name, const DenseTensor& pred, const DenseTensor& truth,
                 const std::vector<std::size_t>& horizons, double threshold) {
    if (pred.shape() != truth.shape()) {
        throw DataError("eval: forecast '" + name + "' has shape " + shape_text(pred) + " but truth has " +
                        shape_text(truth));
    }
    EvalRow row{name, {}, metrics(pred, truth, threshold)};
    for (std::size_t h : horizons) {
        if (h > pred.extent(1)) {
            throw ConfigError("eval: horizon " + std::to_string(h) + " exceeds the trained horizon T'=" +
                              std::to_string(pred.extent(1)));
        }
        row.per_horizon.emplace_back(h, metrics_at_horizon(pred, truth, h, threshold));
    }
    return row;
}

std::string jsonl(const std::vector<EvalRow>& rows, const char* key) {
    std::string s;
    for (const auto& r : rows) {
        for (const auto& [h, m] : r.per_horizon) {
            json j;
            j[key] = r.name;
            j["horizon"] = h;
            j.update(metrics_json(m));
            s += j.dump() + "\n";
        }
        json j;
        j[key] = r.name;
        j["horizon"] = "all";
        j.update(metrics_json(r.overall));
        s += j.dump() + "\n";
    }
    return s;
}

// First horizon step of every window, feature 0.
std::string plot_csv(const DenseTensor& pred, const DenseTensor& truth, std::size_t time_offset) {
    std::string s = "time,node,truth,prediction\n";
    for (std::size_t i = 0; i < pred.extent(0); ++i)
        for (std::size_t n = 0; n < pred.extent(2); ++n)
            s += std::to_string(time_offset + i) + "," + std::to_string(n) + "," + fmt(truth(i, 0, n, 0)) + "," +
                 fmt(pred(i, 0, n, 0)) + "\n";
    return s;
}

std::size_t test_time_offset(const fs::path& out) {
    const fs::path p = artifact(out, "dataset.bin");
    if (!fs::exists(p)) return 0;
    const PreparedData d = read_dataset(p);
    return d.test.empty() ? 0 : d.test.first_step + d.test.x.extent(1);
}

std::string fixed(double v, int prec) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

std::string table_text(const std::vector<EvalRow>& rows, const std::vector<std::size_t>& horizons) {
    std::string s = "model";
    s.resize(16, ' ');
    for (std::size_t h : horizons) {
        std::string col = "  T'=" + std::to_string(h) + " MAE / RMSE / MAPE%";
        s += col;
    }
    s += "\n";
    for (const auto& r : rows) {
        std::string line = r.name;
        line.resize(16, ' ');
        for (const auto& [h, m] : r.per_horizon) {
            (void)h;
            line += "  " + fixed(m.mae, 4) + " / " + fixed(m.rmse, 4) + " / " + (m.mape ? fixed(*m.mape, 2) : "n/a");
        }
        s += line + "\n";
    }
    return s;
}

}  // namespace

void cmd_eval(const RunConfig& c, const fs::path& out, const EvalInputs& in) {
    validate(c);
    const auto horizons = eval_horizons(c);
    const fs::path truth_path = in.truth.value_or(artifact(out, "test_truth.bin"));
    require_artifact(truth_path, "prepare");
    const DenseTensor truth = io::read_tensor_file(truth_path, io::kGeneric).tensor;
    const std::size_t offset = in.truth ? 0 : test_time_offset(out);

    std::vector<std::pair<std::string, fs::path>> forecasts;
    if (in.prediction) {
        forecasts.emplace_back(in.prediction->stem().string(), *in.prediction);
    } else {
        for (const auto& v : kVariants) {
            const fs::path p = artifact(out, "forecast_" + variant_tag(v) + ".bin");
            if (fs::exists(p)) forecasts.emplace_back(v, p);
        }
        if (forecasts.empty()) throw DataError("eval: no forecast_<variant>.bin in '" + out.string() + "' (run 'predict')");
    }
    ensure_dir(out);
    std::vector<EvalRow> rows;
    for (const auto& [name, path] : forecasts) {
        require_artifact(path, "predict");
        const DenseTensor pred = io::read_tensor_file(path, io::kGeneric).tensor;
        rows.push_back(evaluate(name, pred, truth, horizons, c.mape_threshold));
        io::write_text_file(artifact(out, "plot_" + variant_tag(name) + ".csv"), plot_csv(pred, truth, offset));
    }
    io::write_text_file(artifact(out, "metrics.jsonl"), jsonl(rows, "variant"));
}

void cmd_ablate(const RunConfig& c, const fs::path& out) {
    validate(c);
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    auto log = [&](const std::string& what) {
        const double s = std::chrono::duration<double>(clock::now() - start).count();
        std::cerr << "[ablate " << fixed(s, 1) << "s] " << what << "\n";
    };
    cmd_prepare(c, out);
    cmd_build_graph(c, out);
    cmd_lift(c, out);
    cmd_peps(c, out);
    log("graphs ready");
    for (const auto& v : kVariants) {
        RunConfig vc = c;
        vc.variant = v;
        cmd_train(vc, out);
        cmd_predict(vc, out);
        log("trained " + v);
    }
    cmd_eval(c, out);

    const PreparedData d = read_dataset(artifact(out, "dataset.bin"));
    const DenseTensor truth = io::read_tensor_file(artifact(out, "test_truth.bin"), io::kGeneric).tensor;
    const auto horizons = eval_horizons(c);
    std::vector<EvalRow> rows;
    const DenseTensor base = denormalize(persistence_forecast(d.test.x, c.horizon), d.test.stats);
    rows.push_back(evaluate("persistence", base, truth, horizons, c.mape_threshold));
    for (const auto& v : kVariants) {
        const DenseTensor pred =
            io::read_tensor_file(artifact(out, "forecast_" + variant_tag(v) + ".bin"), io::kGeneric).tensor;
        rows.push_back(evaluate(v, pred, truth, horizons, c.mape_threshold));
    }
    for (const auto& r : rows) {
        if (!std::isfinite(r.overall.mae) || !std::isfinite(r.overall.rmse)) {
            throw NumericalError("ablate: non-finite metrics for '" + r.name + "'");
        }
    }
    io::write_text_file(artifact(out, "ablation.jsonl"), jsonl(rows, "model"));
    io::write_text_file(artifact(out, "ablation.txt"), table_text(rows, horizons));
    log("done");
}

}  // namespace tengraph
