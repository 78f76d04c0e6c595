#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>
#include <sys/wait.h>

#include "tengraph/pipeline.hpp"
#include "tengraph/serialize.hpp"

using namespace tengraph;
using json = nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "tengraph_pipeline_test" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

RunConfig small_config() {
    RunConfig c;
    c.synth_nodes = 6;
    c.synth_steps = 200;
    c.window = 6;
    c.horizon = 3;
    c.eval_horizons = "1,2,3";
    c.embed_rank = 3;
    c.hidden = 4;
    c.blocks = 1;
    c.epochs = 2;
    c.batch = 32;
    validate(c);
    return c;
}

std::string slurp(const fs::path& p) { return io::read_text_file(p); }

json summary(const fs::path& dir) { return json::parse(slurp(dir / "graph_summary.json")); }

std::vector<json> jsonl(const fs::path& p) {
    std::vector<json> rows;
    std::istringstream is(slurp(p));
    for (std::string line; std::getline(is, line);) rows.push_back(json::parse(line));
    return rows;
}

void through_eval(const RunConfig& c, const fs::path& dir) {
    cmd_synth(c, dir);
    cmd_prepare(c, dir);
    cmd_build_graph(c, dir, true);
    cmd_lift(c, dir);
    cmd_peps(c, dir);
    for (const auto& v : kVariants) {
        RunConfig vc = c;
        vc.variant = v;
        cmd_train(vc, dir);
        cmd_predict(vc, dir);
    }
    cmd_eval(c, dir);
}

void write_constant_csv(const fs::path& p, std::size_t steps, std::size_t nodes) {
    std::ofstream os(p);
    for (std::size_t j = 0; j < nodes; ++j) os << (j ? "," : "") << "n" << j;
    os << "\n";
    for (std::size_t t = 0; t < steps; ++t) {
        for (std::size_t j = 0; j < nodes; ++j) os << (j ? "," : "") << 4;
        os << "\n";
    }
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TENGRAPH_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_to_file(const std::string& args, const std::string& file) {
    const std::string cmd = std::string(TENGRAPH_CLI) + " " + args + " >" + file + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("every stage writes its artifacts") {
    const RunConfig c = small_config();
    const fs::path dir = fresh_dir("stages");
    through_eval(c, dir);
    for (const char* f : {"series.csv", "truth_adjacency.bin", "dataset.bin", "manifest.txt", "test_truth.bin",
                          "stg.bin", "ttg.bin", "graph_summary.json", "edges_stg.txt", "edges_ttg.txt",
                          "stg_lifted.bin", "ttg_lifted.bin", "peps.bin", "peps_meta.txt", "stg_peps_lifted.bin",
                          "ttg_peps_lifted.bin", "metrics.jsonl"})
        CHECK_MESSAGE(fs::exists(dir / f), f);
    for (const auto& v : kVariants) {
        const std::string t = variant_tag(v);
        for (const std::string f : {"checkpoint_" + t + ".bin", "history_" + t + ".csv", "forecast_" + t + ".bin",
                                    "plot_" + t + ".csv"})
            CHECK_MESSAGE(fs::exists(dir / f), f);
    }

    const json s = summary(dir);
    for (const char* g : {"stg", "ttg"}) {
        REQUIRE(s.contains(g));
        for (const char* key : {"mode", "shape", "mean_density", "min", "max", "slices"}) CHECK(s[g].contains(key));
        CHECK(std::isfinite(s[g]["mean_density"].get<double>()));
        CHECK(std::isfinite(s[g]["max"].get<double>()));
    }
    CHECK(s["stg"]["shape"] == json::array({6, 6, 6}));
    CHECK(s["ttg"]["shape"] == json::array({6, 6, 6}));

    const std::string manifest = slurp(dir / "manifest.txt");
    for (const char* key : {"steps 200", "nodes 6", "window 6", "horizon 3", "split_fractions", "seed 1"})
        CHECK_MESSAGE(manifest.find(key) != std::string::npos, key);

    // Stage outputs load back with the shapes the model expects.
    const ModelParams p = read_checkpoint(dir / "checkpoint_stg_ttg.bin");
    CHECK(p.window() == 6);
    CHECK(p.nodes() == 6);
    CHECK(p.hidden() == 4);

    const auto rows = jsonl(dir / "metrics.jsonl");
    CHECK(rows.size() == 3 * 4);
    for (const auto& r : rows) CHECK(std::isfinite(r["mae"].get<double>()));

    const std::string plot = slurp(dir / "plot_stg.csv");
    CHECK(plot.rfind("time,node,truth,prediction\n", 0) == 0);
}

TEST_CASE("constant data gives complete graphs") {
    RunConfig c = small_config();
    const fs::path dir = fresh_dir("constant");
    write_constant_csv(dir / "in.csv", 120, 4);
    c.embed_rank = 2;
    cmd_ingest(c, dir / "in.csv", dir);
    cmd_prepare(c, dir);
    for (const char* mode : {"kernel", "evolved"}) {
        c.stg_mode = mode;
        cmd_build_graph(c, dir);
        const json s = summary(dir);
        CHECK(s["stg"]["mean_density"].get<double>() == 1.0);
        CHECK(s["ttg"]["mean_density"].get<double>() == 1.0);
    }
}

TEST_CASE("epsilon of one leaves only zero-distance edges") {
    RunConfig c = small_config();
    c.epsilon = 1.0;
    c.stg_mode = "kernel";
    const fs::path dir = fresh_dir("eps1");
    cmd_synth(c, dir);
    cmd_prepare(c, dir);
    cmd_build_graph(c, dir);
    const json s = summary(dir);
    CHECK(s["stg"]["mean_density"].get<double>() == 0.0);
    CHECK(s["ttg"]["mean_density"].get<double>() == 0.0);
}

TEST_CASE("eval on identical files reports zeros") {
    const RunConfig c = small_config();
    const fs::path dir = fresh_dir("identical");
    cmd_synth(c, dir);
    cmd_prepare(c, dir);
    cmd_eval(c, dir, {dir / "test_truth.bin", dir / "test_truth.bin"});
    const auto rows = jsonl(dir / "metrics.jsonl");
    REQUIRE(rows.size() == 4);
    for (const auto& r : rows) {
        CHECK(r["mae"].get<double>() == 0.0);
        CHECK(r["rmse"].get<double>() == 0.0);
        CHECK(r["mape"].get<double>() == 0.0);
    }
    CHECK(rows.back()["horizon"] == "all");

    RunConfig far = c;
    far.eval_horizons = "4";
    far.horizon = 6;
    CHECK_THROWS_AS(cmd_eval(far, dir, {dir / "test_truth.bin", dir / "test_truth.bin"}), ConfigError);
}

TEST_CASE("missing artifacts and mismatched stages are data errors") {
    const RunConfig c = small_config();
    const fs::path dir = fresh_dir("missing");
    CHECK_THROWS_AS(cmd_prepare(c, dir), DataError);
    CHECK_THROWS_AS(cmd_build_graph(c, dir), DataError);
    CHECK_THROWS_AS(cmd_train(c, dir), DataError);
    CHECK_THROWS_AS(cmd_eval(c, dir), DataError);
    cmd_synth(c, dir);
    cmd_prepare(c, dir);
    cmd_build_graph(c, dir);
    cmd_lift(c, dir);
    RunConfig other = c;
    other.variant = "stg+ttg";
    other.window = 8;
    CHECK_THROWS_AS(cmd_train(other, dir), DataError);
}

TEST_CASE("reruns are byte-identical") {
    const RunConfig c = small_config();
    const fs::path a = fresh_dir("rerun_a"), b = fresh_dir("rerun_b");
    through_eval(c, a);
    through_eval(c, b);
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        const fs::path other = b / e.path().filename();
        REQUIRE(fs::exists(other));
        CHECK_MESSAGE(slurp(e.path()) == slurp(other), e.path().filename().string());
        ++compared;
    }
    CHECK(compared >= 25);
}

TEST_CASE("cli exit codes and config round trip") {
    const fs::path dir = fresh_dir("cli");
    const std::string out = "--out " + dir.string();
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("nosuchcommand") == 2);
    CHECK(run_cli(out + " --set nokey=1 synth") == 2);
    CHECK(run_cli(out + " --set k_a=zero synth") == 2);
    CHECK(run_cli(out + " --config " + (dir / "absent.json").string() + " synth") == 2);
    CHECK(run_cli(out + " prepare") == 3);
    CHECK(run_cli(out + " --set synth_nodes=5 --set synth_steps=150 synth") == 0);
    CHECK(fs::exists(dir / "series.csv"));

    const std::string cfg1 = (dir / "c1.json").string(), cfg2 = (dir / "c2.json").string();
    REQUIRE(run_to_file("--seed 9 --set hidden=7 --set stg_mode=kernel dump-config", cfg1) == 0);
    REQUIRE(run_to_file("--config " + cfg1 + " dump-config", cfg2) == 0);
    const std::string t1 = slurp(cfg1);
    CHECK(t1 == slurp(cfg2));
    const RunConfig parsed = parse_config_json(t1);
    CHECK(parsed.seed == 9);
    CHECK(parsed.hidden == 7);
    CHECK(parsed.stg_mode == "kernel");
}

TEST_CASE("ablation report structure") {
    RunConfig c = small_config();
    const fs::path dir = fresh_dir("ablate");
    cmd_synth(c, dir);
    cmd_ablate(c, dir);
    const auto rows = jsonl(dir / "ablation.jsonl");
    std::map<std::string, std::set<std::size_t>> horizons;
    for (const auto& r : rows) {
        for (const char* m : {"mae", "rmse", "mape"}) REQUIRE(r.contains(m));
        CHECK(std::isfinite(r["mae"].get<double>()));
        CHECK(std::isfinite(r["rmse"].get<double>()));
        if (r["horizon"].is_number()) horizons[r["model"].get<std::string>()].insert(r["horizon"].get<std::size_t>());
    }
    CHECK(horizons.size() == 4);
    CHECK(horizons.count("persistence") == 1);
    for (const auto& v : kVariants) CHECK(horizons[v] == std::set<std::size_t>{1, 2, 3});
    const std::string table = slurp(dir / "ablation.txt");
    for (const auto& v : kVariants) CHECK(table.find(v) != std::string::npos);
    CHECK(table.find("persistence") != std::string::npos);
}
