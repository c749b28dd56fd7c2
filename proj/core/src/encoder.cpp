#include "ndecode/encoder.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ndecode/error.hpp"

namespace ndecode {

namespace {

Eigen::Index idx(std::size_t n) { return static_cast<Eigen::Index>(n); }

void check_dims(const std::vector<std::size_t>& layer_dims) {
  require(layer_dims.size() >= 2, ErrorKind::config, "encoder needs at least an input and an output width");
  for (std::size_t d : layer_dims) require(d >= 1, ErrorKind::config, "encoder layer widths must be positive");
}

}  // namespace

std::size_t EncoderParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  return n;
}

EncoderParams EncoderParams::zeros_like() const { return make_params(layer_dims); }

void EncoderParams::validate() const {
  require(layer_dims.size() >= 2, ErrorKind::shape, "encoder has no layers");
  require(weights.size() + 1 == layer_dims.size() && biases.size() == weights.size(), ErrorKind::shape,
          "encoder layer count does not match layer_dims");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    require(weights[l].rows() == idx(layer_dims[l + 1]) && weights[l].cols() == idx(layer_dims[l]), ErrorKind::shape,
            "weight " + std::to_string(l) + " has the wrong shape");
    require(biases[l].size() == idx(layer_dims[l + 1]), ErrorKind::shape,
            "bias " + std::to_string(l) + " has the wrong length");
    require(weights[l].allFinite() && biases[l].allFinite(), ErrorKind::data,
            "layer " + std::to_string(l) + " has non-finite parameters");
  }
}

bool EncoderParams::operator==(const EncoderParams& other) const {
  if (layer_dims != other.layer_dims || weights.size() != other.weights.size()) return false;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l] != other.weights[l] || biases[l] != other.biases[l]) return false;
  }
  return true;
}

EncoderParams make_params(const std::vector<std::size_t>& layer_dims) {
  check_dims(layer_dims);
  EncoderParams p;
  p.layer_dims = layer_dims;
  for (std::size_t l = 1; l < layer_dims.size(); ++l) {
    p.weights.push_back(RowMatrix::Zero(idx(layer_dims[l]), idx(layer_dims[l - 1])));
    p.biases.push_back(Vector::Zero(idx(layer_dims[l])));
  }
  return p;
}

EncoderParams init_params(const std::vector<std::size_t>& layer_dims, std::uint64_t seed) {
  EncoderParams p = make_params(layer_dims);
  for (std::size_t l = 0; l < p.weights.size(); ++l) {
    std::mt19937_64 rng(derive_seed(seed, 0x696e6974 /* "init" */, l));
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / static_cast<double>(layer_dims[l])));
    auto& w = p.weights[l];
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = normal(rng);
  }
  return p;
}

ForwardTrace mlp_forward_trace(const EncoderParams& params, const RowMatrix& voxels) {
  require(voxels.cols() == idx(params.input_dim()), ErrorKind::shape,
          "encoder expects width " + std::to_string(params.input_dim()) + ", got " + std::to_string(voxels.cols()));
  ForwardTrace trace;
  trace.inputs.reserve(params.n_layers());
  trace.inputs.push_back(voxels);
  const std::size_t last = params.n_layers() - 1;
  for (std::size_t l = 0; l < params.n_layers(); ++l) {
    RowMatrix h = trace.inputs.back() * params.weights[l].transpose();
    h.rowwise() += params.biases[l].transpose();
    if (l == last) {
      trace.output = std::move(h);
    } else {
      trace.inputs.push_back(h.cwiseMax(0.0));
    }
  }
  return trace;
}

RowMatrix mlp_forward(const EncoderParams& params, const RowMatrix& voxels) {
  return mlp_forward_trace(params, voxels).output;
}

EncoderGradients mlp_backward(const EncoderParams& params, const ForwardTrace& trace, const RowMatrix& upstream) {
  require(trace.inputs.size() == params.n_layers(), ErrorKind::shape, "forward trace does not match the encoder");
  const Eigen::Index n = trace.inputs.front().rows();
  require(upstream.rows() == n && upstream.cols() == idx(params.output_dim()), ErrorKind::shape,
          "upstream gradient must be " + std::to_string(n) + "x" + std::to_string(params.output_dim()));

  EncoderGradients g{params.zeros_like(), {}};
  RowMatrix delta = upstream;  // d loss / d pre-activation of layer l
  for (std::size_t l = params.n_layers(); l-- > 0;) {
    const RowMatrix& input = trace.inputs[l];
    g.params.weights[l].noalias() = delta.transpose() * input;
    g.params.biases[l] = delta.colwise().sum().transpose();
    RowMatrix back = delta * params.weights[l];
    if (l > 0) {
      // input = relu(pre); relu'(pre) is 1 exactly where input > 0.
      back = back.cwiseProduct((input.array() > 0.0).cast<double>().matrix());
    }
    delta = std::move(back);
  }
  g.inputs = std::move(delta);
  return g;
}

EncoderGradients mlp_backward(const EncoderParams& params, const RowMatrix& voxels, const RowMatrix& upstream) {
  return mlp_backward(params, mlp_forward_trace(params, voxels), upstream);
}

}  // namespace ndecode
