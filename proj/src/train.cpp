#include "tengraph/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

namespace tengraph {

namespace {

DenseTensor gather_rows(const DenseTensor& x, std::span<const std::size_t> rows) {
    Shape shape = x.shape();
    shape[0] = rows.size();
    DenseTensor out(shape);
    const std::size_t stride = x.strides()[0];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto src = x.data().subspan(rows[i] * stride, stride);
        std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(i * stride));
    }
    return out;
}

double dataset_loss(const ModelParams& p, const WindowedDataset& ds, LossKind kind) {
    const DenseTensor pred = predict(p, ds.x);
    return loss(pred, ds.y, kind);
}

}  // namespace

TrainResult train(ModelParams init, const WindowedDataset& train_set, const WindowedDataset& val_set,
                  const TrainOptions& opt) {
    if (train_set.empty()) throw DataError("train: empty training split");
    if (opt.batch < 1) throw ConfigError("train: batch size must be at least 1");
    if (!(opt.lr >= 0.0)) throw ConfigError("train: learning rate must be non-negative");

    const std::size_t samples = train_set.windows();
    const bool graphs = opt.train_graphs;
    std::vector<double> theta = pack_parameters(init, graphs);
    std::vector<double> m1(theta.size(), 0.0), m2(theta.size(), 0.0);
    std::size_t adam_steps = 0;
    Rng rng(opt.seed ^ 0x9e3779b97f4a7c15ull);

    TrainResult result;
    ModelParams current = init;
    result.params = init;
    double best = std::numeric_limits<double>::infinity();
    std::size_t since_best = 0;
    double lr = opt.lr;

    std::vector<std::size_t> order(samples);
    std::iota(order.begin(), order.end(), std::size_t{0});

    for (std::size_t epoch = 1; epoch <= opt.epochs; ++epoch) {
        for (std::size_t i = samples; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < samples; start += opt.batch) {
            const std::size_t count = std::min(opt.batch, samples - start);
            const std::span<const std::size_t> rows(order.data() + start, count);
            const DenseTensor xb = gather_rows(train_set.x, rows);
            const DenseTensor yb = gather_rows(train_set.y, rows);
            const ModelGradients g = gradients(xb, yb, current, opt.loss, graphs);
            if (!std::isfinite(g.loss)) {
                throw NumericalError("train: loss diverged (non-finite) in epoch " + std::to_string(epoch));
            }
            epoch_loss += g.loss * static_cast<double>(count);
            const std::vector<double> grad = pack_gradients(g, graphs);
            if (opt.optimizer == Optimizer::Momentum) {
                for (std::size_t k = 0; k < theta.size(); ++k) {
                    m1[k] = opt.momentum * m1[k] + grad[k];
                    theta[k] -= lr * m1[k];
                }
            } else {
                ++adam_steps;
                const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(adam_steps));
                const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(adam_steps));
                for (std::size_t k = 0; k < theta.size(); ++k) {
                    m1[k] = opt.beta1 * m1[k] + (1.0 - opt.beta1) * grad[k];
                    m2[k] = opt.beta2 * m2[k] + (1.0 - opt.beta2) * grad[k] * grad[k];
                    theta[k] -= lr * (m1[k] / c1) / (std::sqrt(m2[k] / c2) + opt.adam_eps);
                }
            }
            unpack_parameters(theta, current, graphs);
        }
        EpochRecord rec;
        rec.epoch = epoch;
        rec.train_loss = epoch_loss / static_cast<double>(samples);
        rec.val_loss = val_set.empty() ? dataset_loss(current, train_set, opt.loss)
                                       : dataset_loss(current, val_set, opt.loss);
        rec.lr = lr;
        if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
            throw NumericalError("train: loss diverged (non-finite) in epoch " + std::to_string(epoch));
        }
        result.history.push_back(rec);

        if (rec.val_loss < best) {
            best = rec.val_loss;
            result.params = current;
            result.best_epoch = epoch;
            since_best = 0;
        } else if (++since_best >= opt.patience) {
            result.stopped_early = true;
            break;
        }
        if (opt.lr_decay_every > 0 && epoch % opt.lr_decay_every == 0) lr *= opt.lr_decay;
    }
    if (result.best_epoch == 0) result.params = current;
    return result;
}

DenseTensor predict(const ModelParams& p, const DenseTensor& x, std::size_t batch) {
    if (x.rank() != 4) throw ShapeError("predict: expected b x l x N x D windows");
    const std::size_t samples = x.extent(0);
    DenseTensor out({samples, p.horizon, x.extent(2), x.extent(3)});
    std::vector<std::size_t> rows;
    for (std::size_t start = 0; start < samples; start += batch) {
        const std::size_t count = std::min(batch, samples - start);
        rows.resize(count);
        std::iota(rows.begin(), rows.end(), start);
        const DenseTensor pb = model_forward(gather_rows(x, rows), p);
        std::copy(pb.data().begin(), pb.data().end(),
                  out.data().begin() + static_cast<std::ptrdiff_t>(start * out.strides()[0]));
    }
    return out;
}

void write_history_csv(std::ostream& os, const std::vector<EpochRecord>& history) {
    os << "epoch,train_loss,val_loss,lr\n";
    char buf[160];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.train_loss, r.val_loss, r.lr);
        os << buf;
    }
}

namespace {

Metrics metrics_over(const DenseTensor& pred, const DenseTensor& target, double threshold,
                     std::size_t step, bool one_step) {
    if (pred.shape() != target.shape()) throw ShapeError("metrics: prediction and target shapes differ");
    double abs_sum = 0.0, sq_sum = 0.0, pct_sum = 0.0;
    std::size_t count = 0, pct_count = 0;
    const std::size_t b = pred.rank() == 4 ? pred.extent(0) : 1;
    const std::size_t inner = pred.rank() == 4 ? pred.strides()[1] : pred.size();
    const std::size_t per_sample = pred.rank() == 4 ? pred.strides()[0] : pred.size();
    for (std::size_t i = 0; i < b; ++i) {
        const std::size_t begin = i * per_sample + (one_step ? step * inner : 0);
        const std::size_t len = one_step ? inner : per_sample;
        for (std::size_t k = begin; k < begin + len; ++k) {
            const double y = target.data()[k];
            const double e = pred.data()[k] - y;
            abs_sum += std::abs(e);
            sq_sum += e * e;
            ++count;
            if (std::abs(y) > threshold) {
                pct_sum += std::abs(e) / std::abs(y);
                ++pct_count;
            }
        }
    }
    Metrics m;
    m.mae = abs_sum / static_cast<double>(count);
    m.rmse = std::sqrt(sq_sum / static_cast<double>(count));
    if (pct_count > 0) m.mape = 100.0 * pct_sum / static_cast<double>(pct_count);
    return m;
}

}  // namespace

Metrics metrics(const DenseTensor& prediction, const DenseTensor& target, double mask_threshold) {
    return metrics_over(prediction, target, mask_threshold, 0, false);
}

Metrics metrics_at_horizon(const DenseTensor& prediction, const DenseTensor& target, std::size_t step,
                           double mask_threshold) {
    if (prediction.rank() != 4) throw ShapeError("metrics_at_horizon: expected b x T' x N x D forecasts");
    if (step < 1 || step > prediction.extent(1)) {
        throw ConfigError("horizon " + std::to_string(step) + " exceeds the trained horizon T' = " +
                          std::to_string(prediction.extent(1)));
    }
    return metrics_over(prediction, target, mask_threshold, step - 1, true);
}

}  // namespace tengraph
