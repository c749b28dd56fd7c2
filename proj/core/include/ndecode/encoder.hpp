#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ndecode/types.hpp"

namespace ndecode {

/// Weights of the voxel -> embedding MLP. Layer l maps d_{l-1} -> d_l with W_l of shape (d_l x d_{l-1}).
/// Hidden layers use ReLU; the output layer is affine.
struct EncoderParams {
  std::vector<std::size_t> layer_dims;
  std::vector<RowMatrix> weights;
  std::vector<Vector> biases;

  std::size_t n_layers() const noexcept { return weights.size(); }
  std::size_t input_dim() const { return layer_dims.front(); }
  std::size_t output_dim() const { return layer_dims.back(); }
  std::size_t parameter_count() const;

  /// Same shapes, every entry zero.
  EncoderParams zeros_like() const;

  /// Checks shapes against layer_dims and that all entries are finite.
  void validate() const;

  bool operator==(const EncoderParams& other) const;
};

EncoderParams make_params(const std::vector<std::size_t>& layer_dims);

/// He-normal weights (std sqrt(2/fan_in)), zero biases.
EncoderParams init_params(const std::vector<std::size_t>& layer_dims, std::uint64_t seed);

/// Intermediate values of a forward pass, reused by the backward pass.
struct ForwardTrace {
  /// inputs[l] is the input to layer l (inputs[0] is the batch itself).
  std::vector<RowMatrix> inputs;
  RowMatrix output;
};

RowMatrix mlp_forward(const EncoderParams& params, const RowMatrix& voxels);
ForwardTrace mlp_forward_trace(const EncoderParams& params, const RowMatrix& voxels);

struct EncoderGradients {
  EncoderParams params;  // d loss / d (W_l, b_l)
  RowMatrix inputs;      // d loss / d voxels
};

/// Reverse-mode gradients for upstream = d loss / d output. ReLU'(0) is taken as 0.
EncoderGradients mlp_backward(const EncoderParams& params, const RowMatrix& voxels, const RowMatrix& upstream);
EncoderGradients mlp_backward(const EncoderParams& params, const ForwardTrace& trace, const RowMatrix& upstream);

}  // namespace ndecode
