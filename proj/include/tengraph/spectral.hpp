#pragma once

#include <cstddef>
#include <vector>

#include "tengraph/graph.hpp"
#include "tengraph/tensor.hpp"

namespace tengraph {

/// T_0(L^) ... T_{K-1}(L^) stacked along the last mode (n x n x K).
struct ChebyshevStack {
    DenseTensor filters;
    double lambda_max = 2.0;

    std::size_t order() const { return filters.extent(2); }
    Matrix term(std::size_t k) const;
};

enum class GraphKind { Spatial, Temporal };

/// n x n x K x S Chebyshev filters; one stack per slice s of a 3-way graph.
struct LiftedGraph {
    DenseTensor filters;
    GraphKind kind = GraphKind::Spatial;

    std::size_t size() const { return filters.extent(0); }
    std::size_t order() const { return filters.extent(2); }
    std::size_t slices() const { return filters.extent(3); }
    Matrix filter(std::size_t k, std::size_t s) const;
};

/// Filter matrices of a lifted graph unpacked once for repeated products.
class FilterBank {
public:
    FilterBank() = default;
    explicit FilterBank(const LiftedGraph& g);
    FilterBank(std::size_t n, std::size_t order, std::size_t slices, std::vector<Matrix> mats);

    std::size_t size() const { return n_; }
    std::size_t order() const { return order_; }
    std::size_t slices() const { return slices_; }
    const Matrix& operator()(std::size_t k, std::size_t s) const { return mats_[s * order_ + k]; }
    Matrix& operator()(std::size_t k, std::size_t s) { return mats_[s * order_ + k]; }

    LiftedGraph to_lifted(GraphKind kind) const;

private:
    std::size_t n_ = 0, order_ = 0, slices_ = 0;
    std::vector<Matrix> mats_;
};

/// L = I - D^{-1/2} A D^{-1/2} with D_ii = sum_j A_ij. Isolated nodes get
/// D^{-1/2}_ii = 0 (so L_ii = 1). Negative entries are rejected.
Matrix normalized_laplacian(const Matrix& a);

struct LambdaEstimate {
    double value = 2.0;
    int iterations = 0;
    bool converged = false;  ///< false: cap hit, value fell back to 2
};

/// Largest eigenvalue of the symmetric part of `l` by shifted power iteration.
LambdaEstimate estimate_lambda_max(const Matrix& l);

ChebyshevStack chebyshev_stack(const Matrix& l, double lambda_max, std::size_t order);

struct LiftOptions {
    std::size_t order = 3;
    /// Keep asymmetric adjacency in the Laplacian that multiplies signals;
    /// lambda_max always comes from the symmetric part.
    bool respect_asymmetry = false;
};

/// Laplacian, lambda_max estimate, and Chebyshev stack for every slice
/// along the last mode of an n x n x S graph.
LiftedGraph lift_slices(const DenseTensor& graph, GraphKind kind, const LiftOptions& opt);
LiftedGraph lift_graph(const SpatialTensorGraph& g, const LiftOptions& opt);
LiftedGraph lift_graph(const TemporalTensorGraph& g, const LiftOptions& opt);

/// Every filter the identity: the lift of an edgeless graph.
LiftedGraph identity_lifted(std::size_t n, std::size_t order, std::size_t slices, GraphKind kind);

}  // namespace tengraph
