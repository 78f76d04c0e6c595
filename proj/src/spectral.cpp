#include "tengraph/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace tengraph {

Matrix ChebyshevStack::term(std::size_t k) const {
    const std::size_t n = filters.extent(0);
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = filters(i, j, k);
    return m;
}

Matrix LiftedGraph::filter(std::size_t k, std::size_t s) const {
    const std::size_t n = size();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = filters(i, j, k, s);
    return m;
}

FilterBank::FilterBank(const LiftedGraph& g)
    : n_(g.size()), order_(g.order()), slices_(g.slices()), mats_(order_ * slices_) {
    for (std::size_t s = 0; s < slices_; ++s)
        for (std::size_t k = 0; k < order_; ++k) (*this)(k, s) = g.filter(k, s);
}

FilterBank::FilterBank(std::size_t n, std::size_t order, std::size_t slices, std::vector<Matrix> mats)
    : n_(n), order_(order), slices_(slices), mats_(std::move(mats)) {
    if (mats_.size() != order * slices) throw ShapeError("FilterBank: wrong number of matrices");
}

LiftedGraph FilterBank::to_lifted(GraphKind kind) const {
    LiftedGraph g{DenseTensor({n_, n_, order_, slices_}), kind};
    for (std::size_t s = 0; s < slices_; ++s)
        for (std::size_t k = 0; k < order_; ++k) {
            const Matrix& m = (*this)(k, s);
            for (std::size_t i = 0; i < n_; ++i)
                for (std::size_t j = 0; j < n_; ++j) g.filters(i, j, k, s) = m(i, j);
        }
    return g;
}

Matrix normalized_laplacian(const Matrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("normalized_laplacian: adjacency must be square");
    if (!a.allFinite()) throw NumericalError("normalized_laplacian: non-finite adjacency");
    if ((a.array() < 0.0).any()) throw DataError("normalized_laplacian: negative adjacency entry");
    const Eigen::Index n = a.rows();
    Vector inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = a.row(i).sum();
        inv_sqrt(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    Matrix l = -(inv_sqrt.asDiagonal() * a * inv_sqrt.asDiagonal());
    l.diagonal().array() += 1.0;
    return l;
}

LambdaEstimate estimate_lambda_max(const Matrix& l) {
    if (l.rows() != l.cols() || l.rows() == 0) throw ShapeError("estimate_lambda_max: matrix must be square");
    constexpr double tol = 1e-6;
    constexpr int cap = 1000;
    const Eigen::Index n = l.rows();
    Matrix op = 0.5 * (l + l.transpose());

    // Smallest shift making the operator positive semidefinite by
    // Gershgorin; a larger shift would only slow convergence.
    double shift = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double radius = op.row(i).cwiseAbs().sum() - std::abs(op(i, i));
        shift = std::max(shift, radius - op(i, i));
    }
    op.diagonal().array() += shift;

    // Deterministic start with components along every direction in general.
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = 1.0 + 0.5 * std::sin(1.0 + 1.7 * static_cast<double>(i));
    v.normalize();

    LambdaEstimate est;
    for (int it = 1; it <= cap; ++it) {
        const Vector w = op * v;
        const double rq = v.dot(w);
        est.iterations = it;
        // For symmetric operators the residual bounds |lambda - rq|.
        if ((w - rq * v).norm() <= tol * std::max(1.0, std::abs(rq))) {
            est.value = std::clamp(rq - shift, 1e-6, 2.0 + 1e-6);
            est.converged = true;
            return est;
        }
        const double norm = w.norm();
        if (norm == 0.0) break;
        v = w / norm;
    }
    est.value = 2.0;
    est.converged = false;
    return est;
}

ChebyshevStack chebyshev_stack(const Matrix& l, double lambda_max, std::size_t order) {
    if (order < 1) throw ConfigError("chebyshev_stack: order must be at least 1");
    if (!(lambda_max > 0.0)) throw ConfigError("chebyshev_stack: lambda_max must be positive");
    if (l.rows() != l.cols()) throw ShapeError("chebyshev_stack: Laplacian must be square");
    const auto n = static_cast<std::size_t>(l.rows());
    const Matrix eye = Matrix::Identity(l.rows(), l.cols());
    const Matrix scaled = (2.0 / lambda_max) * l - eye;

    ChebyshevStack out{DenseTensor({n, n, order}), lambda_max};
    auto store = [&](const Matrix& m, std::size_t k) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out.filters(i, j, k) = m(i, j);
    };
    Matrix prev2 = eye;
    store(prev2, 0);
    if (order == 1) return out;
    Matrix prev1 = scaled;
    store(prev1, 1);
    for (std::size_t k = 2; k < order; ++k) {
        Matrix next = 2.0 * scaled * prev1 - prev2;
        store(next, k);
        prev2 = std::move(prev1);
        prev1 = std::move(next);
    }
    return out;
}

LiftedGraph lift_slices(const DenseTensor& graph, GraphKind kind, const LiftOptions& opt) {
    if (graph.rank() != 3 || graph.extent(0) != graph.extent(1)) {
        throw ShapeError("lift_graph: expected an n x n x S graph");
    }
    if (opt.order < 1) throw ConfigError("lift_graph: order must be at least 1");
    const std::size_t n = graph.extent(0), slices = graph.extent(2);
    LiftedGraph out{DenseTensor({n, n, opt.order, slices}), kind};
    for (std::size_t s = 0; s < slices; ++s) {
        Matrix a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) = graph(i, j, s);
        try {
            if (!opt.respect_asymmetry) a = 0.5 * (a + a.transpose()).eval();
            const Matrix l = normalized_laplacian(a);
            const LambdaEstimate lam = estimate_lambda_max(l);
            const ChebyshevStack stack = chebyshev_stack(l, lam.value, opt.order);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j)
                    for (std::size_t k = 0; k < opt.order; ++k) out.filters(i, j, k, s) = stack.filters(i, j, k);
        } catch (const NumericalError& e) {
            throw NumericalError("lift_graph slice " + std::to_string(s) + ": " + e.what());
        } catch (const Error& e) {
            throw DataError("lift_graph slice " + std::to_string(s) + ": " + e.what());
        }
    }
    return out;
}

LiftedGraph lift_graph(const SpatialTensorGraph& g, const LiftOptions& opt) {
    return lift_slices(g.weights, GraphKind::Spatial, opt);
}

LiftedGraph lift_graph(const TemporalTensorGraph& g, const LiftOptions& opt) {
    return lift_slices(g.weights, GraphKind::Temporal, opt);
}

LiftedGraph identity_lifted(std::size_t n, std::size_t order, std::size_t slices, GraphKind kind) {
    LiftedGraph out{DenseTensor({n, n, order, slices}), kind};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < order; ++k)
            for (std::size_t s = 0; s < slices; ++s) out.filters(i, i, k, s) = 1.0;
    return out;
}

}  // namespace tengraph
