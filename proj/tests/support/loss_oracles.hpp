#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ndecode/losses.hpp"

namespace ndecode::testing {

// Loop oracles written straight from the formulas, sharing nothing with the library.

inline double log_softmax_at(const std::vector<double>& logits, std::size_t at) {
  double mx = logits[0];
  for (double v : logits) mx = std::max(mx, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - mx);
  return logits[at] - mx - std::log(z);
}

inline double oracle_cos(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) {
  double dot = 0, na = 0, nb = 0;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    dot += a(i, c) * b(j, c);
    na += a(i, c) * a(i, c);
    nb += b(j, c) * b(j, c);
  }
  return dot / std::sqrt(na * nb);
}

inline double oracle_clip(const RowMatrix& img, const RowMatrix& brain, double tau) {
  const auto n = img.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> fwd, bwd;
    for (Eigen::Index j = 0; j < n; ++j) {
      fwd.push_back(oracle_cos(img, i, brain, j) / tau);
      bwd.push_back(oracle_cos(brain, i, img, j) / tau);
    }
    total -= log_softmax_at(fwd, i) + log_softmax_at(bwd, i);
  }
  return total / (2.0 * n);
}

inline double dot(const RowMatrix& a, Eigen::Index i, const RowMatrix& b, Eigen::Index j) { return a.row(i).dot(b.row(j)); }

inline double oracle_bimixco(const RowMatrix& p, const RowMatrix& t, const MixSpec& mix, double tau) {
  const auto n = p.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> row;
    for (Eigen::Index m = 0; m < n; ++m) row.push_back(dot(p, i, t, m) / tau);
    const double lam = mix.lambdas[i];
    total -= lam * log_softmax_at(row, i) + (1 - lam) * log_softmax_at(row, mix.partners[i]);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    std::vector<double> col;
    for (Eigen::Index m = 0; m < n; ++m) col.push_back(dot(p, m, t, j) / tau);
    total -= mix.lambdas[j] * log_softmax_at(col, j);
    for (Eigen::Index l = 0; l < n; ++l)
      if (mix.partners[l] == static_cast<std::size_t>(j)) total -= (1 - mix.lambdas[l]) * log_softmax_at(col, l);
  }
  return total;
}

inline double oracle_softclip(const RowMatrix& p, const RowMatrix& t, double tau, bool bidirectional) {
  const auto n = p.rows();
  auto soft = [&](Eigen::Index i, Eigen::Index j) {
    std::vector<double> row;
    for (Eigen::Index m = 0; m < n; ++m) row.push_back(dot(t, i, t, m) / tau);
    return std::exp(log_softmax_at(row, j));
  };
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> row;
    for (Eigen::Index m = 0; m < n; ++m) row.push_back(dot(p, i, t, m) / tau);
    for (Eigen::Index j = 0; j < n; ++j) total -= soft(i, j) * log_softmax_at(row, j);
  }
  if (bidirectional) {
    for (Eigen::Index j = 0; j < n; ++j) {
      std::vector<double> col;
      for (Eigen::Index m = 0; m < n; ++m) col.push_back(dot(p, m, t, j) / tau);
      for (Eigen::Index i = 0; i < n; ++i) total -= soft(j, i) * log_softmax_at(col, i);
    }
  }
  return total;
}

}  // namespace ndecode::testing
