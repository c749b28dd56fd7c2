#include "ndecode/architecture.hpp"

#include <functional>
#include <numeric>

#include "ndecode/error.hpp"

namespace ndecode {

namespace {

std::int64_t product(const Shape& s) {
  return std::accumulate(s.begin(), s.end(), std::int64_t{1}, std::multiplies<>());
}

[[noreturn]] void arch_fail(const LayerSpec& spec, const std::string& msg) {
  fail(ErrorKind::architecture,
       "layer '" + (spec.name.empty() ? std::string(to_string(spec.kind)) : spec.name) + "': " + msg);
}

void check_positive(const LayerSpec& spec, const Shape& s, const char* what) {
  if (s.empty()) arch_fail(spec, std::string(what) + " shape is empty");
  for (auto d : s)
    if (d <= 0) arch_fail(spec, std::string(what) + " shape " + shape_string(s) + " has a non-positive dimension");
}

LayerSpec conv3d(std::string name, std::int64_t k, std::int64_t stride, std::int64_t pad, std::int64_t cin,
                 std::int64_t cout) {
  LayerSpec s;
  s.kind = LayerKind::conv3d;
  s.name = std::move(name);
  s.kernel = {k, k, k};
  s.stride = stride;
  s.padding = pad;
  s.in_channels = cin;
  s.out_channels = cout;
  return s;
}

LayerSpec conv1d(std::string name, std::int64_t k, std::int64_t stride, std::int64_t cin, std::int64_t cout) {
  LayerSpec s;
  s.kind = LayerKind::conv1d;
  s.name = std::move(name);
  s.kernel = {k};
  s.stride = stride;
  s.padding = 0;
  s.in_channels = cin;
  s.out_channels = cout;
  return s;
}

LayerSpec batchnorm(std::string name, std::int64_t channels) {
  LayerSpec s;
  s.kind = LayerKind::batchnorm;
  s.name = std::move(name);
  s.channels = channels;
  return s;
}

LayerSpec relu() {
  LayerSpec s;
  s.kind = LayerKind::activation;
  s.name = "activation";
  return s;
}

LayerSpec flatten() {
  LayerSpec s;
  s.kind = LayerKind::flatten;
  s.name = "flatten";
  return s;
}

LayerSpec reshape(Shape target) {
  LayerSpec s;
  s.kind = LayerKind::reshape;
  s.name = "reshape";
  s.target_shape = std::move(target);
  return s;
}

LayerSpec linear(std::string name, std::int64_t in, Shape out) {
  LayerSpec s;
  s.kind = LayerKind::linear;
  s.name = std::move(name);
  s.in_features = in;
  s.out_shape = std::move(out);
  return s;
}

LayerSpec resblock(std::string name, std::int64_t channels, std::int64_t repeat) {
  LayerSpec s;
  s.kind = LayerKind::resblock;
  s.name = std::move(name);
  s.channels = channels;
  s.repeat = repeat;
  return s;
}

// conv1 .. lin0, shared by the MLP, 1D CNN and Transformer tables.
std::vector<ArchRow> whole_brain_stem(bool with_lin0) {
  std::vector<ArchRow> rows = {
      {conv3d("conv1", 9, 3, 4, 1, 32), {32, 38, 46, 38}},
      {batchnorm("bn1", 32), {32, 38, 46, 38}},
      {conv3d("conv2", 7, 2, 3, 32, 48), {48, 19, 23, 19}},
      {batchnorm("bn2", 48), {48, 19, 23, 19}},
      {conv3d("conv3", 5, 2, 2, 48, 64), {64, 10, 12, 10}},
      {batchnorm("bn3", 64), {64, 10, 12, 10}},
  };
  if (with_lin0) {
    rows.push_back({relu(), {64, 10, 12, 10}});
    rows.push_back({flatten(), {76800}});
    rows.push_back({linear("lin0", 76800, {4096}), {4096}});
  }
  return rows;
}

const Shape kWholeBrainInput = {1, 113, 136, 113};
const Shape kClipFeature = {257, 1024};

}  // namespace

std::string shape_string(const Shape& shape) {
  std::string out;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out.empty() ? "()" : out;
}

const char* to_string(LayerKind kind) noexcept {
  switch (kind) {
    case LayerKind::conv3d: return "conv3d";
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::linear: return "linear";
    case LayerKind::flatten: return "flatten";
    case LayerKind::reshape: return "reshape";
    case LayerKind::resblock: return "resblock";
    case LayerKind::transformer_block: return "transformer_block";
    case LayerKind::batchnorm: return "batchnorm";
    case LayerKind::activation: return "activation";
    case LayerKind::mlp_block: return "mlp_block";
  }
  return "unknown";
}

Shape conv_output_shape(const LayerSpec& spec, const Shape& in_shape) {
  const std::size_t axes = spec.kind == LayerKind::conv3d ? 3 : spec.kind == LayerKind::conv1d ? 1 : 0;
  if (axes == 0) arch_fail(spec, "not a convolution");
  check_positive(spec, in_shape, "input");
  if (in_shape.size() != axes + 1)
    arch_fail(spec, "expects a (channels + " + std::to_string(axes) + " spatial) input, got " + shape_string(in_shape));
  if (spec.kernel.size() != 1 && spec.kernel.size() != axes) arch_fail(spec, "kernel rank does not match the input");
  if (spec.stride < 1) arch_fail(spec, "stride must be at least 1");
  if (spec.padding < 0) arch_fail(spec, "padding must be non-negative");
  if (spec.out_channels < 1) arch_fail(spec, "out_channels must be positive");
  if (spec.in_channels != 0 && spec.in_channels != in_shape[0])
    arch_fail(spec, "declares " + std::to_string(spec.in_channels) + " input channels, input has " +
                        std::to_string(in_shape[0]));

  Shape out{spec.out_channels};
  for (std::size_t a = 0; a < axes; ++a) {
    const std::int64_t k = spec.kernel.size() == 1 ? spec.kernel[0] : spec.kernel[a];
    if (k < 1) arch_fail(spec, "kernel must be at least 1");
    const std::int64_t span = in_shape[a + 1] + 2 * spec.padding - k;
    if (span < 0) arch_fail(spec, "kernel larger than the padded input on axis " + std::to_string(a));
    out.push_back(span / spec.stride + 1);
  }
  check_positive(spec, out, "output");
  return out;
}

Shape layer_output_shape(const LayerSpec& spec, const Shape& in_shape) {
  check_positive(spec, in_shape, "input");
  const std::int64_t repeat = spec.repeat;
  if (repeat < 1) arch_fail(spec, "repeat must be at least 1");
  switch (spec.kind) {
    case LayerKind::conv3d:
    case LayerKind::conv1d:
      return conv_output_shape(spec, in_shape);
    case LayerKind::activation:
      return in_shape;
    case LayerKind::batchnorm:
    case LayerKind::resblock:
      if (spec.channels != 0 && spec.channels != in_shape[0])
        arch_fail(spec, "declares " + std::to_string(spec.channels) + " channels, input has " +
                            std::to_string(in_shape[0]));
      return in_shape;
    case LayerKind::flatten:
      return {product(in_shape)};
    case LayerKind::reshape:
      check_positive(spec, spec.target_shape, "target");
      if (product(spec.target_shape) != product(in_shape))
        arch_fail(spec, "cannot reshape " + shape_string(in_shape) + " to " + shape_string(spec.target_shape));
      return spec.target_shape;
    case LayerKind::linear: {
      if (in_shape.size() != 1) arch_fail(spec, "expects a flat input, got " + shape_string(in_shape));
      if (spec.in_features != in_shape[0])
        arch_fail(spec, "declares " + std::to_string(spec.in_features) + " input features, input has " +
                            std::to_string(in_shape[0]));
      check_positive(spec, spec.out_shape, "output");
      return spec.out_shape;
    }
    case LayerKind::mlp_block: {
      if (in_shape.size() != 1) arch_fail(spec, "expects a flat input, got " + shape_string(in_shape));
      if (spec.in_features != 0 && spec.in_features != in_shape[0])
        arch_fail(spec, "declares width " + std::to_string(spec.in_features) + ", input has " +
                            std::to_string(in_shape[0]));
      return in_shape;
    }
    case LayerKind::transformer_block: {
      if (in_shape.size() != 2) arch_fail(spec, "expects (tokens x width), got " + shape_string(in_shape));
      if (spec.width != in_shape[1])
        arch_fail(spec, "model width " + std::to_string(spec.width) + " does not match input " + shape_string(in_shape));
      if (spec.heads < 1 || spec.width % spec.heads != 0)
        arch_fail(spec, "width " + std::to_string(spec.width) + " is not divisible by " + std::to_string(spec.heads) +
                            " heads");
      return in_shape;
    }
  }
  arch_fail(spec, "unknown layer kind");
}

bool ArchReport::pass() const { return failures() == 0; }

std::size_t ArchReport::failures() const {
  std::size_t n = 0;
  for (const auto& r : rows) n += r.pass ? 0 : 1;
  return n;
}

ArchReport validate_architecture(const ArchTable& table) {
  if (table.rows.empty()) fail(ErrorKind::architecture, "table '" + table.name + "' has no rows");
  ArchReport report{table.name, {}};
  Shape current = table.input_shape;
  for (const auto& row : table.rows) {
    RowCheck check{row.layer.name, row.layer.kind, current, layer_output_shape(row.layer, current), row.expected,
                   false};
    check.pass = check.computed == check.expected;
    current = check.expected;
    report.rows.push_back(std::move(check));
  }
  return report;
}

ArchTable mlp_table() {
  ArchTable t{"mlp", kWholeBrainInput, whole_brain_stem(true)};
  LayerSpec mlp;
  mlp.kind = LayerKind::mlp_block;
  mlp.name = "mlp";
  mlp.in_features = 4096;
  mlp.repeat = 4;
  t.rows.push_back({mlp, {4096}});
  t.rows.push_back({linear("lin1", 4096, kClipFeature), kClipFeature});
  return t;
}

ArchTable cnn1d_table() {
  ArchTable t{"cnn1d", kWholeBrainInput, whole_brain_stem(true)};
  t.rows.push_back({reshape({1, 4096}), {1, 4096}});
  t.rows.push_back({conv1d("conv01", 13, 6, 1, 64), {64, 680}});
  t.rows.push_back({batchnorm("bn01", 64), {64, 680}});
  t.rows.push_back({conv1d("conv02", 11, 5, 64, 128), {128, 134}});
  t.rows.push_back({batchnorm("bn02", 128), {128, 134}});
  t.rows.push_back({conv1d("conv03", 9, 4, 128, 256), {256, 32}});
  t.rows.push_back({batchnorm("bn03", 256), {256, 32}});
  t.rows.push_back({conv1d("conv04", 7, 3, 256, 512), {512, 9}});
  t.rows.push_back({batchnorm("bn04", 512), {512, 9}});
  t.rows.push_back({resblock("resblock1d", 512, 8), {512, 9}});
  t.rows.push_back({flatten(), {4608}});
  t.rows.push_back({linear("lin1", 4608, kClipFeature), kClipFeature});
  return t;
}

ArchTable cnn3d_table() {
  ArchTable t{"cnn3d", kWholeBrainInput, whole_brain_stem(false)};
  t.rows.push_back({conv3d("conv4", 5, 2, 2, 64, 90), {90, 5, 6, 5}});
  t.rows.push_back({batchnorm("bn4", 90), {90, 5, 6, 5}});
  t.rows.push_back({conv3d("conv5", 5, 2, 2, 90, 150), {150, 3, 3, 3}});
  t.rows.push_back({batchnorm("bn5", 150), {150, 3, 3, 3}});
  t.rows.push_back({relu(), {150, 3, 3, 3}});
  t.rows.push_back({resblock("resblock3d", 150, 8), {150, 3, 3, 3}});
  t.rows.push_back({flatten(), {4050}});
  t.rows.push_back({linear("lin1", 4050, kClipFeature), kClipFeature});
  return t;
}

ArchTable transformer_table() {
  ArchTable t{"transformer", kWholeBrainInput, whole_brain_stem(true)};
  t.rows.push_back({reshape({16, 256}), {16, 256}});
  LayerSpec block;
  block.kind = LayerKind::transformer_block;
  block.name = "transformer";
  block.width = 256;
  block.heads = 8;
  block.repeat = 24;
  t.rows.push_back({block, {16, 256}});
  t.rows.push_back({reshape({4096}), {4096}});
  t.rows.push_back({linear("lin1", 4096, kClipFeature), kClipFeature});
  return t;
}

std::vector<ArchTable> builtin_tables() { return {mlp_table(), cnn1d_table(), cnn3d_table(), transformer_table()}; }

}  // namespace ndecode
