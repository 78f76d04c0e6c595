#include "tengraph/model.hpp"

#include <cmath>
#include <string>

namespace tengraph {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

DenseTensor glorot(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    DenseTensor w(std::move(shape));
    const double sd = std::sqrt(2.0 / static_cast<double>(fan_in + fan_out));
    for (double& v : w.data()) v = sd * rng.normal();
    return w;
}

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    const double sd = std::sqrt(2.0 / static_cast<double>(rows + cols));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = sd * rng.normal();
    return m;
}

struct Banks {
    FilterBank spatial, temporal;
};

struct BlockCache {
    DenseTensor in, mid1, mid2, pre;
};

struct ForwardCache {
    DenseTensor projected;
    std::vector<BlockCache> blocks;
    DenseTensor last;
};

Activation block_activation(const ModelParams& p, std::size_t i) {
    return i + 1 < p.blocks.size() ? p.between_blocks : p.layer.activation;
}

void check_input(const DenseTensor& x, const ModelParams& p) {
    if (x.rank() != 4) throw ShapeError("model_forward: input must be b x l x N x D");
    if (x.extent(1) != p.window()) {
        throw ShapeError("model_forward: window length " + std::to_string(x.extent(1)) + " != graph T = " +
                         std::to_string(p.window()));
    }
    if (x.extent(2) != p.nodes()) {
        throw ShapeError("model_forward: node count " + std::to_string(x.extent(2)) + " != graph N = " +
                         std::to_string(p.nodes()));
    }
    if (x.extent(3) != p.features()) {
        throw ShapeError("model_forward: feature count " + std::to_string(x.extent(3)) + " != D = " +
                         std::to_string(p.features()));
    }
    if (p.blocks.empty()) throw ShapeError("model_forward: model has no blocks");
    if (static_cast<std::size_t>(p.output_head.rows()) != p.window() * p.hidden() ||
        static_cast<std::size_t>(p.output_head.cols()) != p.horizon * p.features()) {
        throw ShapeError("model_forward: output head must be (l*C) x (T'*D)");
    }
}

DenseTensor run_block(const DenseTensor& h, const BlockParams& blk, const Banks& banks, Composition comp,
                      Activation act, BlockCache* cache) {
    DenseTensor pre;
    if (comp != Composition::Sequential && !blk.w_b2) {
        throw ConfigError("model: Sandwich and Additive blocks need a second temporal kernel");
    }
    switch (comp) {
        case Composition::Sequential: {
            DenseTensor m1 = graph_conv_forward(h, banks.temporal, blk.w_b.w, ConvAxis::Time);
            pre = graph_conv_forward(m1, banks.spatial, blk.w_a.w, ConvAxis::Node);
            if (cache) cache->mid1 = std::move(m1);
            break;
        }
        case Composition::Sandwich: {
            DenseTensor m1 = graph_conv_forward(h, banks.temporal, blk.w_b.w, ConvAxis::Time);
            DenseTensor m2 = graph_conv_forward(m1, banks.spatial, blk.w_a.w, ConvAxis::Node);
            pre = graph_conv_forward(m2, banks.temporal, blk.w_b2->w, ConvAxis::Time);
            if (cache) {
                cache->mid1 = std::move(m1);
                cache->mid2 = std::move(m2);
            }
            break;
        }
        case Composition::Additive:
            pre = graph_conv_forward(h, banks.temporal, blk.w_b.w, ConvAxis::Time) +
                  graph_conv_forward(h, banks.spatial, blk.w_a.w, ConvAxis::Node) +
                  graph_conv_forward(h, banks.temporal, blk.w_b2->w, ConvAxis::Time);
            break;
    }
    if (cache) {
        cache->in = h;
        cache->pre = pre;
    }
    return act == Activation::ReLU ? relu(pre) : pre;
}

Matrix flatten_nodes(const DenseTensor& h) {
    const std::size_t b = h.extent(0), l = h.extent(1), n = h.extent(2), c = h.extent(3);
    Matrix f(b * n, l * c);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t t = 0; t < l; ++t)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < c; ++k) f(i * n + j, t * c + k) = h(i, t, j, k);
    return f;
}

DenseTensor forward_impl(const DenseTensor& x, const ModelParams& p, ForwardCache* cache) {
    check_input(x, p);
    const std::size_t b = x.extent(0), l = x.extent(1), n = x.extent(2), d = x.extent(3);
    const std::size_t c = p.hidden();
    const Banks banks{FilterBank(p.spatial), FilterBank(p.temporal)};

    DenseTensor h({b, l, n, c});
    Eigen::Map<const RowMatrix> xin(x.data().data(), b * l * n, d);
    Eigen::Map<RowMatrix>(h.data().data(), b * l * n, c) = xin * p.input_proj;
    if (cache) {
        cache->projected = h;
        cache->blocks.resize(p.blocks.size());
    }
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        h = run_block(h, p.blocks[i], banks, p.layer.composition, block_activation(p, i),
                      cache ? &cache->blocks[i] : nullptr);
    }
    if (h.extent(3) != c) throw ShapeError("model_forward: last block must emit C hidden channels");
    const Matrix out = flatten_nodes(h) * p.output_head;
    if (cache) cache->last = std::move(h);

    DenseTensor pred({b, p.horizon, n, d});
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t s = 0; s < p.horizon; ++s)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t f = 0; f < d; ++f) pred(i, s, j, f) = out(i * n + j, s * d + f);
    return pred;
}

void accumulate(std::optional<FilterBank>& acc, const FilterBank& like, const std::vector<Matrix>& d) {
    if (d.empty()) return;
    if (!acc) {
        std::vector<Matrix> zeros(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) zeros[i] = Matrix::Zero(d[i].rows(), d[i].cols());
        acc = FilterBank(like.size(), like.order(), like.slices(), std::move(zeros));
    }
    for (std::size_t s = 0; s < like.slices(); ++s)
        for (std::size_t k = 0; k < like.order(); ++k) (*acc)(k, s) += d[s * like.order() + k];
}

}  // namespace

ModelParams init_model(const ModelShape& shape, LiftedGraph spatial, LiftedGraph temporal, Rng& rng) {
    if (shape.blocks < 1 || shape.hidden < 1 || shape.features < 1 || shape.horizon < 1) {
        throw ConfigError("init_model: blocks, hidden, features and horizon must be positive");
    }
    if (spatial.slices() != temporal.size() || temporal.slices() != spatial.size()) {
        throw ShapeError("init_model: spatial graph must be N x N x K x l and temporal l x l x K x N");
    }
    ModelParams p;
    const std::size_t n = spatial.size(), l = temporal.size(), c = shape.hidden;
    const std::size_t ka = spatial.order(), kb = temporal.order();
    p.input_proj = glorot(shape.features, c, rng);
    for (std::size_t i = 0; i < shape.blocks; ++i) {
        BlockParams blk;
        blk.w_b.w = glorot({c * kb, c, n}, c * kb, c, rng);
        blk.w_a.w = glorot({c * ka, c, l}, c * ka, c, rng);
        if (shape.composition != Composition::Sequential) blk.w_b2 = TemporalKernel{glorot({c * kb, c, n}, c * kb, c, rng)};
        p.blocks.push_back(std::move(blk));
    }
    p.output_head = glorot(l * c, shape.horizon * shape.features, rng);
    p.spatial = std::move(spatial);
    p.temporal = std::move(temporal);
    p.layer.composition = shape.composition;
    p.between_blocks = shape.between_blocks;
    p.horizon = shape.horizon;
    return p;
}

DenseTensor model_forward(const DenseTensor& x, const ModelParams& p) { return forward_impl(x, p, nullptr); }

double loss(const DenseTensor& prediction, const DenseTensor& target, LossKind kind) {
    if (prediction.shape() != target.shape()) throw ShapeError("loss: prediction and target shapes differ");
    double s = 0.0;
    for (std::size_t i = 0; i < prediction.size(); ++i) {
        const double d = prediction.data()[i] - target.data()[i];
        s += d * d;
    }
    return kind == LossKind::Sum ? s : s / static_cast<double>(prediction.size());
}

ModelGradients gradients(const DenseTensor& x, const DenseTensor& target, const ModelParams& p, LossKind kind,
                         bool graph_gradients) {
    ForwardCache cache;
    const DenseTensor pred = forward_impl(x, p, &cache);
    if (pred.shape() != target.shape()) throw ShapeError("gradients: target shape differs from the forecast");
    const std::size_t b = x.extent(0), l = x.extent(1), n = x.extent(2), d = x.extent(3);
    const std::size_t c = p.hidden();
    const Banks banks{FilterBank(p.spatial), FilterBank(p.temporal)};

    ModelGradients g;
    g.loss = loss(pred, target, kind);
    const double scale = kind == LossKind::Sum ? 2.0 : 2.0 / static_cast<double>(pred.size());

    Matrix gout(b * n, p.horizon * d);
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t s = 0; s < p.horizon; ++s)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t f = 0; f < d; ++f)
                    gout(i * n + j, s * d + f) = scale * (pred(i, s, j, f) - target(i, s, j, f));

    g.output_head = flatten_nodes(cache.last).transpose() * gout;
    const Matrix dflat = gout * p.output_head.transpose();
    DenseTensor dh({b, l, n, c});
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t t = 0; t < l; ++t)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t k = 0; k < c; ++k) dh(i, t, j, k) = dflat(i * n + j, t * c + k);

    g.blocks.resize(p.blocks.size());
    for (std::size_t bi = p.blocks.size(); bi-- > 0;) {
        const BlockParams& blk = p.blocks[bi];
        const BlockCache& bc = cache.blocks[bi];
        BlockParams& gb = g.blocks[bi];
        if (block_activation(p, bi) == Activation::ReLU) {
            for (std::size_t i = 0; i < dh.size(); ++i)
                if (!(bc.pre.data()[i] > 0.0)) dh.data()[i] = 0.0;
        }
        switch (p.layer.composition) {
            case Composition::Sequential: {
                auto gs = graph_conv_backward(bc.mid1, banks.spatial, blk.w_a.w, dh, ConvAxis::Node, graph_gradients);
                auto gt = graph_conv_backward(bc.in, banks.temporal, blk.w_b.w, gs.dx, ConvAxis::Time, graph_gradients);
                gb.w_a.w = std::move(gs.dw);
                gb.w_b.w = std::move(gt.dw);
                accumulate(g.spatial, banks.spatial, gs.dfilters);
                accumulate(g.temporal, banks.temporal, gt.dfilters);
                dh = std::move(gt.dx);
                break;
            }
            case Composition::Sandwich: {
                auto g3 = graph_conv_backward(bc.mid2, banks.temporal, blk.w_b2->w, dh, ConvAxis::Time, graph_gradients);
                auto g2 = graph_conv_backward(bc.mid1, banks.spatial, blk.w_a.w, g3.dx, ConvAxis::Node, graph_gradients);
                auto g1 = graph_conv_backward(bc.in, banks.temporal, blk.w_b.w, g2.dx, ConvAxis::Time, graph_gradients);
                gb.w_b2 = TemporalKernel{std::move(g3.dw)};
                gb.w_a.w = std::move(g2.dw);
                gb.w_b.w = std::move(g1.dw);
                accumulate(g.temporal, banks.temporal, g3.dfilters);
                accumulate(g.spatial, banks.spatial, g2.dfilters);
                accumulate(g.temporal, banks.temporal, g1.dfilters);
                dh = std::move(g1.dx);
                break;
            }
            case Composition::Additive: {
                auto g1 = graph_conv_backward(bc.in, banks.temporal, blk.w_b.w, dh, ConvAxis::Time, graph_gradients);
                auto g2 = graph_conv_backward(bc.in, banks.spatial, blk.w_a.w, dh, ConvAxis::Node, graph_gradients);
                auto g3 = graph_conv_backward(bc.in, banks.temporal, blk.w_b2->w, dh, ConvAxis::Time, graph_gradients);
                gb.w_b.w = std::move(g1.dw);
                gb.w_a.w = std::move(g2.dw);
                gb.w_b2 = TemporalKernel{std::move(g3.dw)};
                accumulate(g.temporal, banks.temporal, g1.dfilters);
                accumulate(g.spatial, banks.spatial, g2.dfilters);
                accumulate(g.temporal, banks.temporal, g3.dfilters);
                dh = g1.dx + g2.dx + g3.dx;
                break;
            }
        }
    }
    Eigen::Map<const RowMatrix> xin(x.data().data(), b * l * n, d);
    Eigen::Map<const RowMatrix> dproj(dh.data().data(), b * l * n, c);
    g.input_proj = xin.transpose() * dproj;
    return g;
}

namespace {

template <class Visit>
void visit_params(const Matrix& input_proj, const std::vector<BlockParams>& blocks, const Matrix& head, Visit&& v) {
    v(std::span<const double>(input_proj.data(), input_proj.size()));
    for (const auto& blk : blocks) {
        v(blk.w_a.w.data());
        v(blk.w_b.w.data());
        if (blk.w_b2) v(blk.w_b2->w.data());
    }
    v(std::span<const double>(head.data(), head.size()));
}

void append_bank(std::vector<double>& out, const FilterBank& bank) {
    for (std::size_t s = 0; s < bank.slices(); ++s)
        for (std::size_t k = 0; k < bank.order(); ++k) {
            const Matrix& m = bank(k, s);
            out.insert(out.end(), m.data(), m.data() + m.size());
        }
}

}  // namespace

std::vector<double> pack_parameters(const ModelParams& p, bool with_graphs) {
    std::vector<double> out;
    visit_params(p.input_proj, p.blocks, p.output_head,
                 [&](std::span<const double> s) { out.insert(out.end(), s.begin(), s.end()); });
    if (with_graphs) {
        append_bank(out, FilterBank(p.spatial));
        append_bank(out, FilterBank(p.temporal));
    }
    return out;
}

void unpack_parameters(std::span<const double> flat, ModelParams& p, bool with_graphs) {
    std::size_t at = 0;
    auto take = [&](std::span<double> dst) {
        if (at + dst.size() > flat.size()) throw ShapeError("unpack_parameters: vector too short");
        std::copy(flat.begin() + at, flat.begin() + at + dst.size(), dst.begin());
        at += dst.size();
    };
    take(std::span<double>(p.input_proj.data(), p.input_proj.size()));
    for (auto& blk : p.blocks) {
        take(blk.w_a.w.data());
        take(blk.w_b.w.data());
        if (blk.w_b2) take(blk.w_b2->w.data());
    }
    take(std::span<double>(p.output_head.data(), p.output_head.size()));
    if (with_graphs) {
        for (LiftedGraph* g : {&p.spatial, &p.temporal}) {
            FilterBank bank(*g);
            for (std::size_t s = 0; s < bank.slices(); ++s)
                for (std::size_t k = 0; k < bank.order(); ++k) {
                    Matrix& m = bank(k, s);
                    take(std::span<double>(m.data(), m.size()));
                }
            *g = bank.to_lifted(g->kind);
        }
    }
    if (at != flat.size()) throw ShapeError("unpack_parameters: vector length does not match the model");
}

std::vector<double> pack_gradients(const ModelGradients& g, bool with_graphs) {
    std::vector<double> out;
    visit_params(g.input_proj, g.blocks, g.output_head,
                 [&](std::span<const double> s) { out.insert(out.end(), s.begin(), s.end()); });
    if (with_graphs) {
        if (!g.spatial || !g.temporal) throw ConfigError("pack_gradients: graph gradients were not computed");
        append_bank(out, *g.spatial);
        append_bank(out, *g.temporal);
    }
    return out;
}

}  // namespace tengraph
