#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tengraph/spectral.hpp"
#include "tengraph/tensor.hpp"

namespace tengraph {

/// (C_i * K_A) x C_o x T weights of the spatial layer. The first mode merges
/// (k, c) with k slowest; the Chebyshev coefficients live in that mode.
struct SpatialKernel {
    DenseTensor w;
};

/// (C'_i * K_B) x C'_o x N weights of the temporal layer, same layout.
struct TemporalKernel {
    DenseTensor w;
};

enum class Composition {
    Sequential,  ///< temporal layer, then spatial layer
    Sandwich,    ///< temporal, spatial, then a second temporal layer
    Additive,    ///< temporal(x) + spatial(x) + second temporal(x)
};

enum class Activation { None, ReLU };

struct LayerConfig {
    Composition composition = Composition::Sequential;
    Activation activation = Activation::None;
};

/// Which mode of the b x T x N x C input a graph filter contracts.
/// Node: slices run over time (spatial layer). Time: slices run over nodes.
enum class ConvAxis { Node, Time };

/// out[b,.,.,co] = sum_{k,c} (F(k,s) X_s)[e, c] * w[k*C + c, co, s], where s
/// indexes the slice mode and e the contracted mode.
DenseTensor graph_conv_forward(const DenseTensor& x, const FilterBank& filters, const DenseTensor& w,
                               ConvAxis axis);

struct GraphConvGradients {
    DenseTensor dx;
    DenseTensor dw;
    std::vector<Matrix> dfilters;  ///< indexed s * order + k; empty unless requested
};

/// Adjoint of graph_conv_forward for the upstream gradient `grad_out`.
GraphConvGradients graph_conv_backward(const DenseTensor& x, const FilterBank& filters, const DenseTensor& w,
                                       const DenseTensor& grad_out, ConvAxis axis,
                                       bool filter_gradients = false);

DenseTensor sgcl_forward(const DenseTensor& x, const LiftedGraph& a4, const SpatialKernel& w);
DenseTensor tgcl_forward(const DenseTensor& x, const LiftedGraph& b4, const TemporalKernel& w);

/// Composition of the two layers per `cfg`. Sandwich and Additive need w_b2.
DenseTensor stgcl_forward(const DenseTensor& x, const LiftedGraph& a4, const LiftedGraph& b4,
                          const SpatialKernel& w_a, const TemporalKernel& w_b,
                          const std::optional<TemporalKernel>& w_b2, const LayerConfig& cfg);

/// Graph filters pre-contracted with their weights.
struct EffectiveMaps {
    std::vector<Matrix> temporal;  ///< per node: (T * c_mid) x (T * c_in)
    std::vector<Matrix> spatial;   ///< per time step: (N * c_out) x (N * c_mid)
    std::size_t c_in = 0, c_mid = 0, c_out = 0;
};

EffectiveMaps fused_effective_maps(const LiftedGraph& a4, const LiftedGraph& b4, const SpatialKernel& w_a,
                                   const TemporalKernel& w_b, std::size_t c_in);

/// Single-layer form x x_time [B W_B] x_node [A W_A].
DenseTensor tucker_fused_forward(const DenseTensor& x, const EffectiveMaps& maps);
DenseTensor tucker_fused_forward(const DenseTensor& x, const LiftedGraph& a4, const LiftedGraph& b4,
                                 const SpatialKernel& w_a, const TemporalKernel& w_b);
/// Slice-invariant case: plain mode products along the node (N x N map) and
/// time (T x T map) modes, applied identically to every channel.
DenseTensor tucker_fused_forward(const DenseTensor& x, const Matrix& spatial, const Matrix& temporal);

}  // namespace tengraph
