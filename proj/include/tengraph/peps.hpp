#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tengraph/graph.hpp"
#include "tengraph/tensor.hpp"

namespace tengraph {

/// Joint low-rank representation of an STG (N x N x T) and a TTG (T x T x N)
/// that share their bond factors:
///
///   A ~ core_a x_0 U x_1 U x_2 V,     B ~ core_b x_0 V x_1 V x_2 U
///
/// with U = node_factor (N x r_N) and V = time_factor (T x r_T), both with
/// orthonormal columns. Each graph's node index and time index is carried
/// by the same factor in both cores, which is what couples the pair.
struct PepsPair {
    Matrix node_factor;
    Matrix time_factor;
    DenseTensor core_a;  ///< r_N x r_N x r_T
    DenseTensor core_b;  ///< r_T x r_T x r_N
    double joint_error = 0.0;
    std::size_t sweeps = 0;
    /// Joint objective after initialization (entry 0) and after every sweep.
    std::vector<double> history;

    std::size_t rank_nodes() const { return static_cast<std::size_t>(node_factor.cols()); }
    std::size_t rank_time() const { return static_cast<std::size_t>(time_factor.cols()); }
    /// N r_N + T r_T + r_N^2 r_T + r_T^2 r_N
    std::size_t parameter_count() const;
};

struct PepsOptions {
    std::size_t rank_nodes = 1;
    std::size_t rank_time = 1;
    std::size_t max_sweeps = 50;
    double tol = 1e-6;
};

/// Default bond dimensions: ceil(N / 4) and ceil(T / 2).
PepsOptions default_peps_options(std::size_t nodes, std::size_t steps);

/// Alternating least squares on the joint objective
///   J = ||A - A~||_F^2 + ||B - B~||_F^2,
/// initialized from truncated HOSVD factors. Cores are updated in closed
/// form; factor updates are accepted only when they do not increase J.
PepsPair peps_fit(const DenseTensor& stg, const DenseTensor& ttg, const PepsOptions& opt);
PepsPair peps_fit(const SpatialTensorGraph& a, const TemporalTensorGraph& b, const PepsOptions& opt);

/// (STG approximation, TTG approximation).
std::pair<DenseTensor, DenseTensor> peps_reconstruct(const PepsPair& p);

/// J for given factors, with the cores at their optimum.
double peps_joint_error(const DenseTensor& stg, const DenseTensor& ttg, const Matrix& node_factor,
                        const Matrix& time_factor);

/// (N^2 T + T^2 N) / parameter_count(); below 1 means no compression.
double compression_ratio(const PepsPair& p, std::size_t nodes, std::size_t steps);

}  // namespace tengraph
