#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tengraph/layers.hpp"
#include "tengraph/rng.hpp"
#include "tengraph/spectral.hpp"
#include "tengraph/tensor.hpp"

namespace tengraph {

struct BlockParams {
    SpatialKernel w_a;
    TemporalKernel w_b;
    std::optional<TemporalKernel> w_b2;  ///< Sandwich / Additive only
};

/// Input projection -> graph convolution blocks -> per-node output head.
///
/// The head flattens each node's (l x C) hidden features with time slowest
/// and maps them to T' x D outputs. The spatial and temporal graphs are
/// frozen unless training is asked to update them.
struct ModelParams {
    Matrix input_proj;   ///< D x C
    std::vector<BlockParams> blocks;
    Matrix output_head;  ///< (l * C) x (T' * D)
    LiftedGraph spatial;   ///< N x N x K_A x l
    LiftedGraph temporal;  ///< l x l x K_B x N
    LayerConfig layer;     ///< composition of every block
    Activation between_blocks = Activation::ReLU;
    std::size_t horizon = 1;

    std::size_t features() const { return static_cast<std::size_t>(input_proj.rows()); }
    std::size_t hidden() const { return static_cast<std::size_t>(input_proj.cols()); }
    std::size_t window() const { return temporal.size(); }
    std::size_t nodes() const { return spatial.size(); }
};

struct ModelShape {
    std::size_t features = 1;
    std::size_t hidden = 32;
    std::size_t blocks = 2;
    std::size_t horizon = 12;
    Composition composition = Composition::Sequential;
    Activation between_blocks = Activation::ReLU;
};

/// Glorot-style random initialization around the given frozen graphs.
ModelParams init_model(const ModelShape& shape, LiftedGraph spatial, LiftedGraph temporal, Rng& rng);

/// b x l x N x D windows -> b x T' x N x D forecasts.
DenseTensor model_forward(const DenseTensor& x, const ModelParams& p);

enum class LossKind {
    Mean,  ///< mean of squared errors
    Sum,   ///< plain squared Frobenius norm of the error
};

double loss(const DenseTensor& prediction, const DenseTensor& target, LossKind kind);

struct ModelGradients {
    Matrix input_proj;
    std::vector<BlockParams> blocks;
    Matrix output_head;
    std::optional<FilterBank> spatial;   ///< only with graph gradients
    std::optional<FilterBank> temporal;
    double loss = 0.0;
};

/// Exact gradients of `loss(model_forward(x), target, kind)`.
ModelGradients gradients(const DenseTensor& x, const DenseTensor& target, const ModelParams& p, LossKind kind,
                         bool graph_gradients = false);

/// Trainable entries in a fixed order (input projection, blocks, head, then
/// graph filters when `with_graphs`).
std::vector<double> pack_parameters(const ModelParams& p, bool with_graphs = false);
void unpack_parameters(std::span<const double> flat, ModelParams& p, bool with_graphs = false);
std::vector<double> pack_gradients(const ModelGradients& g, bool with_graphs = false);

}  // namespace tengraph
