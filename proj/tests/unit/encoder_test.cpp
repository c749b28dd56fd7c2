#include "ndecode/encoder.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "finite_diff.hpp"
#include "ndecode/error.hpp"

namespace ndecode {
namespace {

using testing::compare_gradients;
using testing::numeric_gradient;
using testing::numeric_param_gradient;
using testing::random_matrix;

// Weighted sum of outputs: its gradient w.r.t. the output is exactly `weights`.
double probe_loss(const EncoderParams& p, const RowMatrix& x, const RowMatrix& weights) {
  return (mlp_forward(p, x).array() * weights.array()).sum();
}

EncoderParams random_params(const std::vector<std::size_t>& dims, std::mt19937_64& rng) {
  EncoderParams p = init_params(dims, rng());
  for (auto& b : p.biases)
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = std::normal_distribution<double>(0.0, 0.3)(rng);
  return p;
}

TEST(InitParams, BiasesZeroAndDeterministic) {
  const auto a = init_params({16, 8, 4}, 5);
  for (const auto& b : a.biases) EXPECT_TRUE((b.array() == 0.0).all());
  EXPECT_EQ(a, init_params({16, 8, 4}, 5));
  EXPECT_FALSE(a == init_params({16, 8, 4}, 6));
  EXPECT_EQ(a.parameter_count(), 16u * 8 + 8 + 8 * 4 + 4);
}

TEST(InitParams, HeStandardDeviation) {
  const auto p = init_params({512, 256, 64}, 3);
  for (std::size_t l = 0; l < p.n_layers(); ++l) {
    const auto& w = p.weights[l];
    const double mean = w.mean();
    const double sd = std::sqrt((w.array() - mean).square().sum() / static_cast<double>(w.size() - 1));
    const double expect = std::sqrt(2.0 / static_cast<double>(p.layer_dims[l]));
    EXPECT_NEAR(sd, expect, 0.1 * expect) << "layer " << l;
  }
}

TEST(InitParams, InvalidDimsAreConfigErrors) {
  try {
    init_params({8}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::config);
  }
  EXPECT_THROW(init_params({8, 0, 2}, 0), Error);
}

TEST(Forward, ZeroParamsGiveZeroOutput) {
  const auto p = make_params({6, 5, 3});
  std::mt19937_64 rng(1);
  EXPECT_TRUE(mlp_forward(p, random_matrix(4, 6, rng)).isZero(0.0));
}

TEST(Forward, IdentityLayer) {
  auto p = make_params({5, 5});
  p.weights[0].setIdentity();
  std::mt19937_64 rng(2);
  const RowMatrix x = random_matrix(3, 5, rng);
  EXPECT_EQ(mlp_forward(p, x), x);
}

TEST(Forward, MatchesHandComputation) {
  auto p = make_params({2, 2, 1});
  p.weights[0] << 1.0, -1.0, 2.0, 0.5;
  p.biases[0] << 0.0, -3.0;
  p.weights[1] << 2.0, 1.0;
  p.biases[1] << 0.25;
  RowMatrix x(1, 2);
  x << 3.0, 1.0;
  // hidden pre-activations (2, 3.5) -> relu (2, 3.5); output 2*2 + 3.5 + 0.25
  EXPECT_DOUBLE_EQ(mlp_forward(p, x)(0, 0), 7.75);
  x << 0.0, 4.0;
  // (-4, -1) -> (0, 0); output is the bias alone
  EXPECT_DOUBLE_EQ(mlp_forward(p, x)(0, 0), 0.25);
}

TEST(Forward, RowsAreIndependent) {
  std::mt19937_64 rng(3);
  const auto p = random_params({7, 6, 4}, rng);
  const RowMatrix x = random_matrix(5, 7, rng);
  const RowMatrix batch = mlp_forward(p, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i) EXPECT_EQ(batch.row(i), mlp_forward(p, x.row(i)).row(0));
}

TEST(Forward, WidthMismatchIsShapeError) {
  const auto p = make_params({4, 2});
  try {
    mlp_forward(p, RowMatrix::Zero(1, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
  EXPECT_THROW(mlp_backward(p, RowMatrix::Zero(1, 4), RowMatrix::Zero(1, 3)), Error);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  std::mt19937_64 rng(4);
  const auto p = random_params({6, 5, 3}, rng);
  const auto g = mlp_backward(p, random_matrix(4, 6, rng), RowMatrix::Zero(4, 3));
  EXPECT_TRUE(g.inputs.isZero(0.0));
  for (std::size_t l = 0; l < p.n_layers(); ++l) {
    EXPECT_TRUE(g.params.weights[l].isZero(0.0));
    EXPECT_TRUE(g.params.biases[l].isZero(0.0));
  }
}

TEST(Backward, LinearInUpstream) {
  std::mt19937_64 rng(5);
  const auto p = random_params({6, 5, 3}, rng);
  const RowMatrix x = random_matrix(4, 6, rng);
  const RowMatrix up = random_matrix(4, 3, rng);
  const auto g1 = mlp_backward(p, x, up);
  const auto g3 = mlp_backward(p, x, -2.5 * up);
  EXPECT_TRUE(g3.inputs.isApprox(-2.5 * g1.inputs, 1e-14));
  for (std::size_t l = 0; l < p.n_layers(); ++l)
    EXPECT_TRUE(g3.params.weights[l].isApprox(-2.5 * g1.params.weights[l], 1e-14));
}

TEST(Backward, TraceOverloadAgrees) {
  std::mt19937_64 rng(6);
  const auto p = random_params({5, 4, 4, 2}, rng);
  const RowMatrix x = random_matrix(3, 5, rng);
  const RowMatrix up = random_matrix(3, 2, rng);
  const auto trace = mlp_forward_trace(p, x);
  EXPECT_EQ(trace.output, mlp_forward(p, x));
  const auto a = mlp_backward(p, x, up);
  const auto b = mlp_backward(p, trace, up);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_TRUE(a.params == b.params);
}

TEST(Backward, ThreeLayerFiniteDifferences) {
  std::mt19937_64 rng(7);
  const auto p = random_params({12, 16, 10, 8}, rng);
  const RowMatrix x = random_matrix(4, 12, rng);
  const RowMatrix up = random_matrix(4, 8, rng);
  const auto analytic = mlp_backward(p, x, up);
  const auto numeric = numeric_param_gradient([&](const EncoderParams& q) { return probe_loss(q, x, up); }, p);
  for (std::size_t l = 0; l < p.n_layers(); ++l) {
    const auto w = compare_gradients(analytic.params.weights[l], numeric.weights[l], 1e-9, 1e-6);
    EXPECT_TRUE(w.pass()) << "layer " << l << " weights, max err " << w.max_abs_err;
    const auto b = compare_gradients(analytic.params.biases[l], numeric.biases[l], 1e-9, 1e-6);
    EXPECT_TRUE(b.pass()) << "layer " << l << " biases, max err " << b.max_abs_err;
  }
  const auto in = compare_gradients(
      analytic.inputs, numeric_gradient([&](const RowMatrix& xx) { return probe_loss(p, xx, up); }, x), 1e-9, 1e-6);
  EXPECT_TRUE(in.pass()) << "inputs, max err " << in.max_abs_err;
}

TEST(Backward, RandomNetworksFiniteDifferences) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> width(1, 32), depth(1, 4), batch(1, 5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> dims(depth(rng) + 1);
    for (auto& d : dims) d = width(rng);
    const auto p = random_params(dims, rng);
    const RowMatrix x = random_matrix(static_cast<Eigen::Index>(batch(rng)), static_cast<Eigen::Index>(dims[0]), rng);
    const RowMatrix up = random_matrix(x.rows(), static_cast<Eigen::Index>(dims.back()), rng);
    const auto analytic = mlp_backward(p, x, up);
    const auto numeric = numeric_param_gradient([&](const EncoderParams& q) { return probe_loss(q, x, up); }, p);
    for (std::size_t l = 0; l < p.n_layers(); ++l) {
      EXPECT_TRUE(compare_gradients(analytic.params.weights[l], numeric.weights[l], 1e-6, 1e-4).pass());
      EXPECT_TRUE(compare_gradients(analytic.params.biases[l], numeric.biases[l], 1e-6, 1e-4).pass());
    }
  }
}

TEST(Backward, ReluSubgradientAtZeroIsZero) {
  auto p = make_params({1, 1, 1});
  p.weights[0](0, 0) = 1.0;
  p.weights[1](0, 0) = 1.0;
  RowMatrix x = RowMatrix::Zero(1, 1);
  const auto g = mlp_backward(p, x, RowMatrix::Ones(1, 1));
  EXPECT_EQ(g.inputs(0, 0), 0.0);
  EXPECT_EQ(g.params.weights[0](0, 0), 0.0);
  EXPECT_EQ(g.params.biases[0][0], 0.0);
  EXPECT_EQ(g.params.biases[1][0], 1.0);
}

TEST(Params, ValidateCatchesBadShapesAndValues) {
  auto p = make_params({3, 2});
  p.validate();
  p.weights[0](0, 0) = std::nan("");
  EXPECT_THROW(p.validate(), Error);
  auto q = make_params({3, 2});
  q.biases[0] = Vector::Zero(3);
  EXPECT_THROW(q.validate(), Error);
}

}  // namespace
}  // namespace ndecode
