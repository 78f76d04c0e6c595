#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tengraph/tensor.hpp"

namespace tengraph {

enum class GraphMode { Kernel, Evolved };

struct KernelParams {
    double sigma2 = 0.1;
    double epsilon = 0.5;
};

/// N x N x T stack of node adjacency slices, one per time step.
struct SpatialTensorGraph {
    DenseTensor weights;
    KernelParams kernel;
    GraphMode mode = GraphMode::Kernel;

    std::size_t nodes() const { return weights.extent(0); }
    std::size_t steps() const { return weights.extent(2); }
    Matrix slice(std::size_t t) const;
};

/// T x T x N stack of time-to-time adjacency slices, one per node.
struct TemporalTensorGraph {
    DenseTensor weights;
    KernelParams kernel;
    GraphMode mode = GraphMode::Kernel;

    std::size_t steps() const { return weights.extent(0); }
    std::size_t nodes() const { return weights.extent(2); }
    Matrix slice(std::size_t n) const;
};

/// exp(-d^2 / sigma2) when that value is >= epsilon, otherwise 0.
/// The i != j guard is the caller's responsibility.
double kernel_weight(double d, double sigma2, double epsilon);

/// Mean over samples and features of |x[b,t,i,d] - x[b,t,j,d]| for a
/// b x T x N x D data tensor.
double spatial_distance(const DenseTensor& x, std::size_t i, std::size_t j, std::size_t t);

/// Kernel adjacency of time step `t`: zero diagonal, symmetric.
Matrix build_kernel_slice(const DenseTensor& x, std::size_t t, const KernelParams& p);

/// The t = 0 kernel slice that seeds the evolved STG.
Matrix build_initial_stg(const DenseTensor& x, const KernelParams& p);

/// Direct kernel formula applied independently at every time step.
SpatialTensorGraph build_kernel_stg(const DenseTensor& x, const KernelParams& p);

struct EvolveOptions {
    std::size_t embed_rank = 10;
    double step = 1.0;
};

/// Increment of one evolution step: row_softmax(relu(E1 E2^T)) where
/// E1 = U_k sqrt(S_k), E2 = V_k sqrt(S_k) come from the SVD of `a`.
Matrix evolution_increment(const Matrix& a, std::size_t embed_rank);

/// Slice 0 is `a0`; slice t = slice t-1 + step * evolution_increment(slice t-1).
SpatialTensorGraph evolve_stg(const Matrix& a0, std::size_t t_steps, const EvolveOptions& opt,
                              const KernelParams& kernel = {});

TemporalTensorGraph build_ttg(const DenseTensor& x, const KernelParams& p);

/// Variant that seeds with node 0's kernel slice and evolves across the node
/// index with the same increment rule as the STG.
TemporalTensorGraph evolve_ttg(const DenseTensor& x, const KernelParams& p, const EvolveOptions& opt);

struct SliceSummary {
    double density = 0.0;  ///< fraction of off-diagonal entries that are non-zero
    double min_weight = 0.0;
    double max_weight = 0.0;
};

/// Per-slice statistics over the last mode of a square-sliced 3-way graph.
std::vector<SliceSummary> summarize_slices(const DenseTensor& graph);

/// One "i j s weight" line per non-zero entry.
void write_edge_list(std::ostream& os, const DenseTensor& graph);

}  // namespace tengraph
