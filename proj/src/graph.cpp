#include "tengraph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace tengraph {

namespace {

void require_data_tensor(const DenseTensor& x, const char* what) {
    if (x.rank() != 4) {
        throw DataError(std::string(what) + ": empty or malformed training split (expected b x T x N x D)");
    }
}

void require_kernel_params(const KernelParams& p) {
    if (!(p.sigma2 > 0.0)) throw ConfigError("sigma2 must be positive");
    if (!(p.epsilon > 0.0 && p.epsilon <= 1.0)) throw ConfigError("epsilon must lie in (0, 1]");
}

Matrix slice_of(const DenseTensor& g, std::size_t s) {
    const std::size_t n = g.extent(0);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = g(i, j, s);
    return m;
}

void set_slice(DenseTensor& g, std::size_t s, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) g(i, j, s) = m(i, j);
}

}  // namespace

Matrix SpatialTensorGraph::slice(std::size_t t) const { return slice_of(weights, t); }
Matrix TemporalTensorGraph::slice(std::size_t n) const { return slice_of(weights, n); }

double kernel_weight(double d, double sigma2, double epsilon) {
    if (!(d >= 0.0)) throw DataError("kernel_weight: distance must be non-negative");
    const double w = std::exp(-d * d / sigma2);
    return w >= epsilon ? w : 0.0;
}

double spatial_distance(const DenseTensor& x, std::size_t i, std::size_t j, std::size_t t) {
    require_data_tensor(x, "spatial_distance");
    const std::size_t b = x.extent(0), nd = x.extent(3);
    if (t >= x.extent(1) || i >= x.extent(2) || j >= x.extent(2)) {
        throw ShapeError("spatial_distance: index out of range");
    }
    if (i == j) return 0.0;
    double sum = 0.0;
    for (std::size_t s = 0; s < b; ++s)
        for (std::size_t d = 0; d < nd; ++d) sum += std::abs(x(s, t, i, d) - x(s, t, j, d));
    return sum / static_cast<double>(b * nd);
}

Matrix build_kernel_slice(const DenseTensor& x, std::size_t t, const KernelParams& p) {
    require_data_tensor(x, "build_kernel_slice");
    require_kernel_params(p);
    const std::size_t n = x.extent(2);
    Matrix a = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double w = kernel_weight(spatial_distance(x, i, j, t), p.sigma2, p.epsilon);
            a(i, j) = w;
            a(j, i) = w;
        }
    }
    return a;
}

Matrix build_initial_stg(const DenseTensor& x, const KernelParams& p) { return build_kernel_slice(x, 0, p); }

SpatialTensorGraph build_kernel_stg(const DenseTensor& x, const KernelParams& p) {
    require_data_tensor(x, "build_kernel_stg");
    const std::size_t n = x.extent(2), steps = x.extent(1);
    SpatialTensorGraph g{DenseTensor({n, n, steps}), p, GraphMode::Kernel};
    for (std::size_t t = 0; t < steps; ++t) set_slice(g.weights, t, build_kernel_slice(x, t, p));
    return g;
}

Matrix evolution_increment(const Matrix& a, std::size_t embed_rank) {
    const auto n = static_cast<std::size_t>(a.rows());
    if (embed_rank < 1 || embed_rank > n) {
        throw ConfigError("embed_rank " + std::to_string(embed_rank) + " must lie in [1, " +
                          std::to_string(n) + "]");
    }
    const SvdResult f = svd(a);
    const auto k = static_cast<Eigen::Index>(std::min<std::size_t>(embed_rank, f.s.size()));
    const Vector root = f.s.head(k).cwiseSqrt();
    const Matrix e1 = f.u.leftCols(k) * root.asDiagonal();
    const Matrix e2 = f.v.leftCols(k) * root.asDiagonal();
    return row_softmax(relu(Matrix(e1 * e2.transpose())));
}

SpatialTensorGraph evolve_stg(const Matrix& a0, std::size_t t_steps, const EvolveOptions& opt,
                              const KernelParams& kernel) {
    if (a0.rows() != a0.cols() || a0.rows() == 0) throw ShapeError("evolve_stg: seed slice must be square");
    if (t_steps < 1) throw ConfigError("evolve_stg: need at least one time step");
    if (!a0.allFinite()) throw NumericalError("evolve_stg: seed slice has non-finite entries");
    if (!(opt.step >= 0.0)) throw ConfigError("evolve_stg: step must be non-negative");
    const auto n = static_cast<std::size_t>(a0.rows());
    SpatialTensorGraph g{DenseTensor({n, n, t_steps}), kernel, GraphMode::Evolved};
    Matrix current = a0;
    set_slice(g.weights, 0, current);
    for (std::size_t t = 1; t < t_steps; ++t) {
        try {
            current += opt.step * evolution_increment(current, opt.embed_rank);
        } catch (const NumericalError& e) {
            throw NumericalError("evolve_stg at time step " + std::to_string(t) + ": " + e.what());
        }
        set_slice(g.weights, t, current);
    }
    return g;
}

namespace {

Matrix temporal_kernel_slice(const DenseTensor& x, std::size_t node, const KernelParams& p) {
    const std::size_t b = x.extent(0), steps = x.extent(1), nd = x.extent(3);
    Matrix m = Matrix::Zero(steps, steps);
    const double norm = static_cast<double>(b * nd);
    for (std::size_t t1 = 0; t1 < steps; ++t1) {
        for (std::size_t t2 = t1 + 1; t2 < steps; ++t2) {
            double sum = 0.0;
            for (std::size_t s = 0; s < b; ++s)
                for (std::size_t d = 0; d < nd; ++d) sum += std::abs(x(s, t1, node, d) - x(s, t2, node, d));
            const double w = kernel_weight(sum / norm, p.sigma2, p.epsilon);
            m(t1, t2) = w;
            m(t2, t1) = w;
        }
    }
    return m;
}

}  // namespace

TemporalTensorGraph build_ttg(const DenseTensor& x, const KernelParams& p) {
    require_data_tensor(x, "build_ttg");
    require_kernel_params(p);
    const std::size_t steps = x.extent(1), n = x.extent(2);
    if (steps < 2) throw DataError("build_ttg: need at least 2 time steps");
    TemporalTensorGraph g{DenseTensor({steps, steps, n}), p, GraphMode::Kernel};
    for (std::size_t node = 0; node < n; ++node) set_slice(g.weights, node, temporal_kernel_slice(x, node, p));
    return g;
}

TemporalTensorGraph evolve_ttg(const DenseTensor& x, const KernelParams& p, const EvolveOptions& opt) {
    require_data_tensor(x, "evolve_ttg");
    require_kernel_params(p);
    const std::size_t steps = x.extent(1), n = x.extent(2);
    if (steps < 2) throw DataError("evolve_ttg: need at least 2 time steps");
    const SpatialTensorGraph e = evolve_stg(temporal_kernel_slice(x, 0, p), n, opt, p);
    return TemporalTensorGraph{e.weights, p, GraphMode::Evolved};
}

std::vector<SliceSummary> summarize_slices(const DenseTensor& graph) {
    if (graph.rank() != 3 || graph.extent(0) != graph.extent(1)) {
        throw ShapeError("summarize_slices: expected an n x n x S graph");
    }
    const std::size_t n = graph.extent(0), slices = graph.extent(2);
    std::vector<SliceSummary> out(slices);
    for (std::size_t s = 0; s < slices; ++s) {
        std::size_t nonzero = 0;
        double lo = graph(0, 0, s), hi = graph(0, 0, s);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const double w = graph(i, j, s);
                lo = std::min(lo, w);
                hi = std::max(hi, w);
                if (i != j && w != 0.0) ++nonzero;
            }
        }
        const double pairs = static_cast<double>(n * (n - 1));
        out[s] = {pairs > 0 ? static_cast<double>(nonzero) / pairs : 0.0, lo, hi};
    }
    return out;
}

void write_edge_list(std::ostream& os, const DenseTensor& graph) {
    if (graph.rank() != 3) throw ShapeError("write_edge_list: expected a 3-way graph");
    char buf[96];
    for (std::size_t s = 0; s < graph.extent(2); ++s)
        for (std::size_t i = 0; i < graph.extent(0); ++i)
            for (std::size_t j = 0; j < graph.extent(1); ++j) {
                const double w = graph(i, j, s);
                if (w == 0.0) continue;
                std::snprintf(buf, sizeof buf, "%zu %zu %zu %.17g\n", i, j, s, w);
                os << buf;
            }
}

}  // namespace tengraph
