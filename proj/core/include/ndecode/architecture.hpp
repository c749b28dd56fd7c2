#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ndecode {

using Shape = std::vector<std::int64_t>;

std::string shape_string(const Shape& shape);

enum class LayerKind {
  conv3d,
  conv1d,
  linear,
  flatten,
  reshape,
  resblock,
  transformer_block,
  batchnorm,   // shape preserving; channel count checked
  activation,  // shape preserving
  mlp_block,   // stack of square linear layers on a flat vector
};

const char* to_string(LayerKind kind) noexcept;

/// One row of an architecture table. Only the fields relevant to `kind` are read.
struct LayerSpec {
  LayerKind kind = LayerKind::activation;
  std::string name;

  // conv3d / conv1d
  std::vector<std::int64_t> kernel;  // one entry per spatial axis, or a single entry broadcast to all
  std::int64_t stride = 1;
  std::int64_t padding = 0;
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;

  // linear / mlp_block: in_features is checked against the flattened input
  std::int64_t in_features = 0;
  Shape out_shape;

  // reshape
  Shape target_shape;

  // resblock / batchnorm: channel count; transformer_block: model width and heads
  std::int64_t channels = 0;
  std::int64_t width = 0;
  std::int64_t heads = 0;
  std::int64_t repeat = 1;
};

/// Output shape for one layer. in_shape is (channels, spatial...) for convolutions.
/// Spatial rule: floor((in + 2*padding - kernel) / stride) + 1.
/// Throws an architecture error for inconsistent parameters or non-positive results.
Shape layer_output_shape(const LayerSpec& spec, const Shape& in_shape);

/// Convolution-only entry point; rejects non-convolution kinds.
Shape conv_output_shape(const LayerSpec& spec, const Shape& in_shape);

struct ArchRow {
  LayerSpec layer;
  Shape expected;
};

struct ArchTable {
  std::string name;
  Shape input_shape;
  std::vector<ArchRow> rows;
};

struct RowCheck {
  std::string layer_name;
  LayerKind kind;
  Shape input;
  Shape computed;
  Shape expected;
  bool pass = false;
};

struct ArchReport {
  std::string table;
  std::vector<RowCheck> rows;

  bool pass() const;
  std::size_t failures() const;
};

/// Chains layer_output_shape over the rows. After a mismatching row the chain continues from that
/// row's expected shape, so each failure is reported at the row that caused it.
ArchReport validate_architecture(const ArchTable& table);

/// The MLP, 1D CNN, 3D CNN and Transformer tables for 113x136x113 whole-brain input.
ArchTable mlp_table();
ArchTable cnn1d_table();
ArchTable cnn3d_table();
ArchTable transformer_table();
std::vector<ArchTable> builtin_tables();

}  // namespace ndecode
