#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tengraph/data.hpp"
#include "tengraph/model.hpp"

namespace tengraph {

enum class Optimizer { Momentum, Adam };

struct TrainOptions {
    Optimizer optimizer = Optimizer::Momentum;
    double lr = 1e-3;
    double momentum = 0.9;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch = 16;
    std::size_t epochs = 100;
    std::size_t patience = 10;
    double lr_decay = 1.0;           ///< multiplied into lr every lr_decay_every epochs
    std::size_t lr_decay_every = 0;  ///< 0 disables step decay
    LossKind loss = LossKind::Mean;
    bool train_graphs = false;
    std::uint64_t seed = 1;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double lr = 0.0;
};

struct TrainResult {
    ModelParams params;  ///< parameters of the best validation epoch
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    bool stopped_early = false;
};

/// Mini-batch training on the configured loss. Samples are shuffled with a
/// seed-derived permutation each epoch, so a fixed seed reproduces the
/// parameter trajectory exactly. Early stopping watches the validation loss
/// (the training loss when no validation windows exist).
TrainResult train(ModelParams init, const WindowedDataset& train_set, const WindowedDataset& val_set,
                  const TrainOptions& opt);

/// Forecast a whole dataset in batches.
DenseTensor predict(const ModelParams& p, const DenseTensor& x, std::size_t batch = 64);

/// CSV lines "epoch,train_loss,val_loss,lr".
void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history);

struct Metrics {
    double mae = 0.0;
    double rmse = 0.0;
    std::optional<double> mape;  ///< percent; empty when every target is masked
};

/// MAE, RMSE and MAPE (entries with |y| > mask_threshold only).
Metrics metrics(const DenseTensor& prediction, const DenseTensor& target, double mask_threshold = 1e-3);

/// Metrics of horizon step `step` (1-based) of b x T' x N x D forecasts.
Metrics metrics_at_horizon(const DenseTensor& prediction, const DenseTensor& target, std::size_t step,
                           double mask_threshold = 1e-3);

}  // namespace tengraph
