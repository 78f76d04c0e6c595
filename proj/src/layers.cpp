#include "tengraph/layers.hpp"

#include <string>

namespace tengraph {

namespace {

struct ConvGeometry {
    std::size_t batch, steps, nodes, channels;
    std::size_t slices, contracted;

    // Flat offset of x[b, t, n, 0] given slice index s and contracted index e.
    std::size_t offset(std::size_t b, std::size_t s, std::size_t e, ConvAxis axis) const {
        const std::size_t t = axis == ConvAxis::Node ? s : e;
        const std::size_t n = axis == ConvAxis::Node ? e : s;
        return ((b * steps + t) * nodes + n) * channels;
    }
};

const char* axis_name(ConvAxis axis) { return axis == ConvAxis::Node ? "spatial" : "temporal"; }

ConvGeometry check_conv(const DenseTensor& x, const FilterBank& f, const DenseTensor& w, ConvAxis axis) {
    if (x.rank() != 4) throw ShapeError(std::string(axis_name(axis)) + " layer: input must be b x T x N x C");
    ConvGeometry g{x.extent(0), x.extent(1), x.extent(2), x.extent(3), 0, 0};
    g.slices = axis == ConvAxis::Node ? g.steps : g.nodes;
    g.contracted = axis == ConvAxis::Node ? g.nodes : g.steps;
    const std::string who = axis_name(axis);
    const char* slice_dim = axis == ConvAxis::Node ? "T" : "N";
    const char* contr_dim = axis == ConvAxis::Node ? "N" : "T";
    if (f.size() != g.contracted) {
        throw ShapeError(who + " layer: filter size " + std::to_string(f.size()) + " != input " + contr_dim +
                         " = " + std::to_string(g.contracted));
    }
    if (f.slices() != g.slices) {
        throw ShapeError(who + " layer: filter slices " + std::to_string(f.slices()) + " != input " +
                         slice_dim + " = " + std::to_string(g.slices));
    }
    if (w.rank() != 3) throw ShapeError(who + " layer: kernel must be rank 3");
    if (w.extent(0) != g.channels * f.order()) {
        throw ShapeError(who + " layer: kernel first extent " + std::to_string(w.extent(0)) +
                         " != C_in * K = " + std::to_string(g.channels) + " * " + std::to_string(f.order()));
    }
    if (w.extent(2) != g.slices) {
        throw ShapeError(who + " layer: kernel last extent " + std::to_string(w.extent(2)) + " != " +
                         slice_dim + " = " + std::to_string(g.slices));
    }
    return g;
}

Matrix gather_slice(const DenseTensor& x, const ConvGeometry& g, std::size_t s, ConvAxis axis) {
    Matrix xs(g.contracted, g.batch * g.channels);
    const double* src = x.data().data();
    for (std::size_t b = 0; b < g.batch; ++b)
        for (std::size_t e = 0; e < g.contracted; ++e) {
            const double* p = src + g.offset(b, s, e, axis);
            for (std::size_t c = 0; c < g.channels; ++c) xs(e, b * g.channels + c) = p[c];
        }
    return xs;
}

Matrix kernel_slice(const DenseTensor& w, std::size_t s) {
    const std::size_t rows = w.extent(0), cols = w.extent(1);
    Matrix m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = w(r, c, s);
    return m;
}

// (B*E) x (K*C) matrix of filtered inputs for slice s.
Matrix filtered_slice(const Matrix& xs, const FilterBank& f, const ConvGeometry& g, std::size_t s) {
    const std::size_t order = f.order();
    Matrix z(g.batch * g.contracted, order * g.channels);
    for (std::size_t k = 0; k < order; ++k) {
        const Matrix zk = f(k, s) * xs;
        for (std::size_t b = 0; b < g.batch; ++b)
            for (std::size_t c = 0; c < g.channels; ++c)
                z.col(k * g.channels + c).segment(b * g.contracted, g.contracted) = zk.col(b * g.channels + c);
    }
    return z;
}

}  // namespace

DenseTensor graph_conv_forward(const DenseTensor& x, const FilterBank& filters, const DenseTensor& w,
                               ConvAxis axis) {
    const ConvGeometry g = check_conv(x, filters, w, axis);
    const std::size_t c_out = w.extent(1);
    DenseTensor out({g.batch, g.steps, g.nodes, c_out});
    ConvGeometry og = g;
    og.channels = c_out;
    double* dst = out.data().data();
    for (std::size_t s = 0; s < g.slices; ++s) {
        const Matrix z = filtered_slice(gather_slice(x, g, s, axis), filters, g, s);
        const Matrix o = z * kernel_slice(w, s);
        for (std::size_t b = 0; b < g.batch; ++b)
            for (std::size_t e = 0; e < g.contracted; ++e) {
                double* p = dst + og.offset(b, s, e, axis);
                for (std::size_t c = 0; c < c_out; ++c) p[c] = o(b * g.contracted + e, c);
            }
    }
    return out;
}

GraphConvGradients graph_conv_backward(const DenseTensor& x, const FilterBank& filters, const DenseTensor& w,
                                       const DenseTensor& grad_out, ConvAxis axis, bool filter_gradients) {
    const ConvGeometry g = check_conv(x, filters, w, axis);
    const std::size_t c_out = w.extent(1), order = filters.order();
    if (grad_out.shape() != Shape{g.batch, g.steps, g.nodes, c_out}) {
        throw ShapeError(std::string(axis_name(axis)) + " layer backward: upstream gradient shape mismatch");
    }
    ConvGeometry og = g;
    og.channels = c_out;

    GraphConvGradients out{DenseTensor(x.shape()), DenseTensor(w.shape()), {}};
    if (filter_gradients) out.dfilters.assign(order * g.slices, Matrix());
    const double* gsrc = grad_out.data().data();
    double* dx = out.dx.data().data();

    for (std::size_t s = 0; s < g.slices; ++s) {
        const Matrix xs = gather_slice(x, g, s, axis);
        const Matrix z = filtered_slice(xs, filters, g, s);
        Matrix gs(g.batch * g.contracted, c_out);
        for (std::size_t b = 0; b < g.batch; ++b)
            for (std::size_t e = 0; e < g.contracted; ++e) {
                const double* p = gsrc + og.offset(b, s, e, axis);
                for (std::size_t c = 0; c < c_out; ++c) gs(b * g.contracted + e, c) = p[c];
            }
        const Matrix dws = z.transpose() * gs;
        for (std::size_t r = 0; r < w.extent(0); ++r)
            for (std::size_t c = 0; c < c_out; ++c) out.dw(r, c, s) = dws(r, c);

        const Matrix dz = gs * kernel_slice(w, s).transpose();
        Matrix dxs = Matrix::Zero(g.contracted, g.batch * g.channels);
        Matrix dzk(g.contracted, g.batch * g.channels);
        for (std::size_t k = 0; k < order; ++k) {
            for (std::size_t b = 0; b < g.batch; ++b)
                for (std::size_t c = 0; c < g.channels; ++c)
                    dzk.col(b * g.channels + c) = dz.col(k * g.channels + c).segment(b * g.contracted, g.contracted);
            dxs.noalias() += filters(k, s).transpose() * dzk;
            if (filter_gradients) out.dfilters[s * order + k] = dzk * xs.transpose();
        }
        for (std::size_t b = 0; b < g.batch; ++b)
            for (std::size_t e = 0; e < g.contracted; ++e) {
                double* p = dx + g.offset(b, s, e, axis);
                for (std::size_t c = 0; c < g.channels; ++c) p[c] = dxs(e, b * g.channels + c);
            }
    }
    return out;
}

DenseTensor sgcl_forward(const DenseTensor& x, const LiftedGraph& a4, const SpatialKernel& w) {
    return graph_conv_forward(x, FilterBank(a4), w.w, ConvAxis::Node);
}

DenseTensor tgcl_forward(const DenseTensor& x, const LiftedGraph& b4, const TemporalKernel& w) {
    return graph_conv_forward(x, FilterBank(b4), w.w, ConvAxis::Time);
}

DenseTensor stgcl_forward(const DenseTensor& x, const LiftedGraph& a4, const LiftedGraph& b4,
                          const SpatialKernel& w_a, const TemporalKernel& w_b,
                          const std::optional<TemporalKernel>& w_b2, const LayerConfig& cfg) {
    const FilterBank fa(a4), fb(b4);
    if (cfg.composition != Composition::Sequential && !w_b2) {
        throw ConfigError("stgcl_forward: Sandwich and Additive compositions need a second temporal kernel");
    }
    DenseTensor out;
    switch (cfg.composition) {
        case Composition::Sequential:
            out = graph_conv_forward(graph_conv_forward(x, fb, w_b.w, ConvAxis::Time), fa, w_a.w, ConvAxis::Node);
            break;
        case Composition::Sandwich: {
            const DenseTensor mid =
                graph_conv_forward(graph_conv_forward(x, fb, w_b.w, ConvAxis::Time), fa, w_a.w, ConvAxis::Node);
            out = graph_conv_forward(mid, fb, w_b2->w, ConvAxis::Time);
            break;
        }
        case Composition::Additive: {
            const DenseTensor t1 = graph_conv_forward(x, fb, w_b.w, ConvAxis::Time);
            const DenseTensor s1 = graph_conv_forward(x, fa, w_a.w, ConvAxis::Node);
            const DenseTensor t2 = graph_conv_forward(x, fb, w_b2->w, ConvAxis::Time);
            if (t1.shape() != s1.shape() || t1.shape() != t2.shape()) {
                throw ShapeError("stgcl_forward: Additive terms must share their output channel count");
            }
            out = t1 + s1 + t2;
            break;
        }
    }
    if (cfg.activation == Activation::ReLU) out = relu(out);
    return out;
}

EffectiveMaps fused_effective_maps(const LiftedGraph& a4, const LiftedGraph& b4, const SpatialKernel& w_a,
                                   const TemporalKernel& w_b, std::size_t c_in) {
    const std::size_t nodes = a4.size(), steps = b4.size();
    const std::size_t ka = a4.order(), kb = b4.order();
    if (a4.slices() != steps) throw ShapeError("tucker_fused: spatial filter slices != T");
    if (b4.slices() != nodes) throw ShapeError("tucker_fused: temporal filter slices != N");
    if (w_b.w.rank() != 3 || w_b.w.extent(0) != c_in * kb || w_b.w.extent(2) != nodes) {
        throw ShapeError("tucker_fused: temporal kernel must be (C_in*K_B) x C_mid x N");
    }
    const std::size_t c_mid = w_b.w.extent(1);
    if (w_a.w.rank() != 3 || w_a.w.extent(0) != c_mid * ka || w_a.w.extent(2) != steps) {
        throw ShapeError("tucker_fused: spatial kernel must be (C_mid*K_A) x C_out x T");
    }
    const std::size_t c_out = w_a.w.extent(1);

    EffectiveMaps maps;
    maps.c_in = c_in;
    maps.c_mid = c_mid;
    maps.c_out = c_out;
    const FilterBank fa(a4), fb(b4);
    maps.temporal.reserve(nodes);
    for (std::size_t n = 0; n < nodes; ++n) {
        Matrix m = Matrix::Zero(steps * c_mid, steps * c_in);
        for (std::size_t k = 0; k < kb; ++k) {
            const Matrix& f = fb(k, n);
            for (std::size_t t = 0; t < steps; ++t)
                for (std::size_t t2 = 0; t2 < steps; ++t2) {
                    const double fv = f(t, t2);
                    if (fv == 0.0) continue;
                    for (std::size_t c2 = 0; c2 < c_mid; ++c2)
                        for (std::size_t c1 = 0; c1 < c_in; ++c1)
                            m(t * c_mid + c2, t2 * c_in + c1) += fv * w_b.w(k * c_in + c1, c2, n);
                }
        }
        maps.temporal.push_back(std::move(m));
    }
    maps.spatial.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        Matrix m = Matrix::Zero(nodes * c_out, nodes * c_mid);
        for (std::size_t k = 0; k < ka; ++k) {
            const Matrix& f = fa(k, t);
            for (std::size_t n = 0; n < nodes; ++n)
                for (std::size_t j = 0; j < nodes; ++j) {
                    const double fv = f(n, j);
                    if (fv == 0.0) continue;
                    for (std::size_t c3 = 0; c3 < c_out; ++c3)
                        for (std::size_t c2 = 0; c2 < c_mid; ++c2)
                            m(n * c_out + c3, j * c_mid + c2) += fv * w_a.w(k * c_mid + c2, c3, t);
                }
        }
        maps.spatial.push_back(std::move(m));
    }
    return maps;
}

DenseTensor tucker_fused_forward(const DenseTensor& x, const EffectiveMaps& maps) {
    if (x.rank() != 4) throw ShapeError("tucker_fused_forward: input must be b x T x N x C");
    const std::size_t batch = x.extent(0), steps = x.extent(1), nodes = x.extent(2);
    if (x.extent(3) != maps.c_in || maps.temporal.size() != nodes || maps.spatial.size() != steps) {
        throw ShapeError("tucker_fused_forward: effective maps do not match the input extents");
    }
    DenseTensor mid({batch, steps, nodes, maps.c_mid});
    Vector v(steps * maps.c_in);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t n = 0; n < nodes; ++n) {
            for (std::size_t t = 0; t < steps; ++t)
                for (std::size_t c = 0; c < maps.c_in; ++c) v(t * maps.c_in + c) = x(b, t, n, c);
            const Vector y = maps.temporal[n] * v;
            for (std::size_t t = 0; t < steps; ++t)
                for (std::size_t c = 0; c < maps.c_mid; ++c) mid(b, t, n, c) = y(t * maps.c_mid + c);
        }
    DenseTensor out({batch, steps, nodes, maps.c_out});
    Vector u(nodes * maps.c_mid);
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < steps; ++t) {
            for (std::size_t n = 0; n < nodes; ++n)
                for (std::size_t c = 0; c < maps.c_mid; ++c) u(n * maps.c_mid + c) = mid(b, t, n, c);
            const Vector y = maps.spatial[t] * u;
            for (std::size_t n = 0; n < nodes; ++n)
                for (std::size_t c = 0; c < maps.c_out; ++c) out(b, t, n, c) = y(n * maps.c_out + c);
        }
    return out;
}

DenseTensor tucker_fused_forward(const DenseTensor& x, const LiftedGraph& a4, const LiftedGraph& b4,
                                 const SpatialKernel& w_a, const TemporalKernel& w_b) {
    if (x.rank() != 4) throw ShapeError("tucker_fused_forward: input must be b x T x N x C");
    return tucker_fused_forward(x, fused_effective_maps(a4, b4, w_a, w_b, x.extent(3)));
}

DenseTensor tucker_fused_forward(const DenseTensor& x, const Matrix& spatial, const Matrix& temporal) {
    if (x.rank() != 4) throw ShapeError("tucker_fused_forward: input must be b x T x N x C");
    return mode_n_product(mode_n_product(x, temporal, 1), spatial, 2);
}

}  // namespace tengraph
