#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tengraph/config.hpp"
#include "tengraph/error.hpp"
#include "tengraph/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumerical = 4 };

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out = "run";
    std::vector<std::string> overrides;
};

tengraph::RunConfig resolve(const GlobalOptions& g, const std::string& variant) {
    tengraph::RunConfig c;
    if (!g.config_path.empty()) {
        std::ifstream is(g.config_path);
        if (!is) throw tengraph::ConfigError("cannot open config '" + g.config_path + "'");
        std::ostringstream ss;
        ss << is.rdbuf();
        try {
            c = tengraph::merge_config_json(c, ss.str());
        } catch (const tengraph::ConfigError& e) {
            throw tengraph::ConfigError(g.config_path + ": " + e.what());
        }
    }
    for (const auto& o : g.overrides) tengraph::apply_override(c, o);
    if (g.seed) c.seed = *g.seed;
    if (!variant.empty()) c.variant = variant;
    tengraph::validate(c);
    return c;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatio-temporal tensor-graph forecasting pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--config", g.config_path, "JSON config file (keys as printed by dump-config)");
    app.add_option("--seed", g.seed, "Random seed (overrides the config)");
    app.add_option("--out", g.out, "Work directory for artifacts")->capture_default_str();
    app.add_option("--set", g.overrides, "Override a config key: --set key=value (repeatable)");

    std::string variant, csv_path, pred_path, truth_path;
    bool edges = false;

    auto* synth = app.add_subcommand("synth", "Generate a synthetic diffusion series into the work directory");
    auto* ingest = app.add_subcommand("ingest", "Load a CSV series into the work directory");
    ingest->add_option("csv", csv_path, "Input CSV")->required();
    auto* prepare = app.add_subcommand("prepare", "Split, normalize and window the series");
    auto* build = app.add_subcommand("build-graph", "Build the spatial and temporal tensor graphs");
    build->add_flag("--edges", edges, "Also write edge lists");
    auto* lift = app.add_subcommand("lift", "Chebyshev-lift both graphs");
    auto* peps = app.add_subcommand("peps", "Fit the joint low-rank graph pair and lift its reconstruction");
    auto* trainc = app.add_subcommand("train", "Train one model variant");
    trainc->add_option("--variant", variant, "stg | stg+ttg | stg+ttg+peps");
    auto* predictc = app.add_subcommand("predict", "Forecast the test split with a trained variant");
    predictc->add_option("--variant", variant, "stg | stg+ttg | stg+ttg+peps");
    auto* eval = app.add_subcommand("eval", "Score forecasts against the test truth");
    eval->add_option("--pred", pred_path, "Forecast file (default: every forecast_<variant>.bin)");
    eval->add_option("--truth", truth_path, "Truth file (default: test_truth.bin)");
    auto* ablate = app.add_subcommand("ablate", "Run every stage for all three variants and a persistence baseline");
    auto* dump = app.add_subcommand("dump-config", "Print the effective configuration as JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfig;
    }

    try {
        const tengraph::RunConfig c = resolve(g, variant);
        const std::filesystem::path out = g.out;
        if (synth->parsed()) tengraph::cmd_synth(c, out);
        if (ingest->parsed()) tengraph::cmd_ingest(c, csv_path, out);
        if (prepare->parsed()) tengraph::cmd_prepare(c, out);
        if (build->parsed()) tengraph::cmd_build_graph(c, out, edges);
        if (lift->parsed()) tengraph::cmd_lift(c, out);
        if (peps->parsed()) tengraph::cmd_peps(c, out);
        if (trainc->parsed()) tengraph::cmd_train(c, out);
        if (predictc->parsed()) tengraph::cmd_predict(c, out);
        if (eval->parsed()) {
            tengraph::EvalInputs in;
            if (!pred_path.empty()) in.prediction = pred_path;
            if (!truth_path.empty()) in.truth = truth_path;
            tengraph::cmd_eval(c, out, in);
        }
        if (ablate->parsed()) tengraph::cmd_ablate(c, out);
        if (dump->parsed()) std::cout << tengraph::dump_config_json(c);
    } catch (const tengraph::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const tengraph::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kNumerical;
    } catch (const tengraph::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const tengraph::ShapeError& e) {
        std::cerr << "data error (shape): " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}
