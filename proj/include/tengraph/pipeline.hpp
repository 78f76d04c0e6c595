#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tengraph/config.hpp"
#include "tengraph/data.hpp"
#include "tengraph/model.hpp"
#include "tengraph/spectral.hpp"

namespace tengraph {

// Pipeline stages. Each reads and writes artifacts inside one work
// directory, so any stage can be rerun (or tested) on its own:
//
//   synth / ingest   series.csv [truth_adjacency.bin]
//   prepare          dataset.bin manifest.txt test_truth.bin
//   build-graph      stg.bin ttg.bin graph_summary.json [edges_stg.txt edges_ttg.txt]
//   lift             stg_lifted.bin ttg_lifted.bin
//   peps             peps.bin peps_meta.txt stg_peps_lifted.bin ttg_peps_lifted.bin
//   train            checkpoint_<tag>.bin history_<tag>.csv
//   predict          forecast_<tag>.bin
//   eval             metrics.jsonl plot_<tag>.csv
//   ablate           all of the above, plus ablation.jsonl and ablation.txt
//
// <tag> is the variant name with '+' replaced by '_'.

namespace fs = std::filesystem;

inline const std::vector<std::string> kVariants = {"stg", "stg+ttg", "stg+ttg+peps"};

std::string variant_tag(const std::string& variant);

void cmd_synth(const RunConfig& c, const fs::path& out);
void cmd_ingest(const RunConfig& c, const fs::path& csv, const fs::path& out);
void cmd_prepare(const RunConfig& c, const fs::path& out);
void cmd_build_graph(const RunConfig& c, const fs::path& out, bool edge_lists = false);
void cmd_lift(const RunConfig& c, const fs::path& out);
void cmd_peps(const RunConfig& c, const fs::path& out);
void cmd_train(const RunConfig& c, const fs::path& out);
void cmd_predict(const RunConfig& c, const fs::path& out);

struct EvalInputs {
    std::optional<fs::path> prediction;  ///< overrides forecast_<tag>.bin
    std::optional<fs::path> truth;       ///< overrides test_truth.bin
};

/// Metrics of every available forecast (or just `in.prediction`).
void cmd_eval(const RunConfig& c, const fs::path& out, const EvalInputs& in = {});
void cmd_ablate(const RunConfig& c, const fs::path& out);

// Artifact helpers shared with tests.

struct PreparedData {
    WindowedDataset train, val, test;
};
void write_dataset(const fs::path& path, const DatasetSplits& d);
PreparedData read_dataset(const fs::path& path);

void write_checkpoint(const fs::path& path, const ModelParams& p);
ModelParams read_checkpoint(const fs::path& path);

/// Lifted spatial and temporal graphs used by a variant.
std::pair<LiftedGraph, LiftedGraph> variant_graphs(const RunConfig& c, const fs::path& out,
                                                   const std::string& variant);

}  // namespace tengraph
