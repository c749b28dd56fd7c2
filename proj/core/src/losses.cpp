#include "ndecode/losses.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ndecode/error.hpp"

namespace ndecode {

namespace {

// Row-wise log-softmax with max subtraction.
RowMatrix row_log_softmax(const RowMatrix& logits) {
  RowMatrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    const double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

RowMatrix col_log_softmax(const RowMatrix& logits) {
  return row_log_softmax(logits.transpose()).transpose();
}

void check_pair(const EmbeddingBatch& a, const EmbeddingBatch& b, const char* what) {
  require(a.rows() >= 1, ErrorKind::data, std::string(what) + ": empty batch");
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::shape,
          std::string(what) + ": batches are " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " and " +
              std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  require(a.allFinite() && b.allFinite(), ErrorKind::data, std::string(what) + ": non-finite embedding");
}

void check_unit_rows(const EmbeddingBatch& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double norm = m.row(i).norm();
    require(std::abs(norm - 1.0) <= 1e-9, ErrorKind::contract,
            std::string(what) + " row " + std::to_string(i) + " has norm " + std::to_string(norm) +
                "; rows must be L2-normalized");
  }
}

void check_tau(double tau) { require(tau > 0.0 && std::isfinite(tau), ErrorKind::config, "tau must be positive"); }

}  // namespace

double cosine_sim(std::span<const double> x, std::span<const double> y) {
  require(x.size() == y.size(), ErrorKind::shape,
          "cosine_sim: lengths " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
  double xy = 0.0;
  double xx = 0.0;
  double yy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    xy += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  require(xx > 0.0 && yy > 0.0, ErrorKind::degenerate, "cosine_sim of a zero-norm vector");
  return xy / (std::sqrt(xx) * std::sqrt(yy));
}

double cosine_sim(const Vector& x, const Vector& y) {
  return cosine_sim(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                    std::span<const double>(y.data(), static_cast<std::size_t>(y.size())));
}

EmbeddingBatch normalize_rows(const EmbeddingBatch& rows) {
  EmbeddingBatch out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const double norm = rows.row(i).norm();
    require(norm > 0.0, ErrorKind::degenerate, "row " + std::to_string(i) + " has zero norm");
    out.row(i) = rows.row(i) / norm;
  }
  return out;
}

EmbeddingBatch normalize_rows_backward(const EmbeddingBatch& raw, const EmbeddingBatch& grad_normalized) {
  EmbeddingBatch out(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    const double norm = raw.row(i).norm();
    require(norm > 0.0, ErrorKind::degenerate, "row " + std::to_string(i) + " has zero norm");
    const Eigen::RowVectorXd unit = raw.row(i) / norm;
    out.row(i) = (grad_normalized.row(i) - unit * unit.dot(grad_normalized.row(i))) / norm;
  }
  return out;
}

LossResult clip_loss(const EmbeddingBatch& image, const EmbeddingBatch& brain, double tau) {
  check_pair(image, brain, "clip_loss");
  check_tau(tau);
  const Eigen::Index n = image.rows();
  const EmbeddingBatch a = normalize_rows(image);
  const EmbeddingBatch u = normalize_rows(brain);
  const RowMatrix logits = (a * u.transpose()) / tau;  // logits(i, j) = sim(image_i, brain_j) / tau

  const RowMatrix log_row = row_log_softmax(logits);  // image -> brain
  const RowMatrix log_col = col_log_softmax(logits);  // brain -> image

  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) sum -= log_row(i, i) + log_col(i, i);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));

  RowMatrix g = log_row.array().exp() + log_col.array().exp();
  g.diagonal().array() -= 2.0;
  g *= scale / tau;  // d loss / d (a u^T)
  const EmbeddingBatch grad_u = g.transpose() * a;

  return {sum * scale, normalize_rows_backward(brain, grad_u)};
}

MixSpec sample_mixspec(std::size_t n, double alpha, std::uint64_t seed) {
  require(n >= 1, ErrorKind::config, "sample_mixspec: batch size must be at least 1");
  require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::config, "sample_mixspec: alpha must be positive");
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(alpha, 1.0);
  MixSpec spec;
  spec.lambdas.resize(n);
  spec.partners.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Beta(a, a) = G1 / (G1 + G2); both gammas can underflow to 0 for small alpha.
    double g1 = 0.0;
    double g2 = 0.0;
    do {
      g1 = gamma(rng);
      g2 = gamma(rng);
    } while (!(g1 + g2 > 0.0));
    spec.lambdas[i] = g1 / (g1 + g2);
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t k = pick(rng);
    while (n > 1 && k == i) k = pick(rng);
    spec.partners[i] = k;
  }
  return spec;
}

RowMatrix mixco_mix(const RowMatrix& x, const MixSpec& spec) {
  require(spec.lambdas.size() == static_cast<std::size_t>(x.rows()) && spec.partners.size() == spec.lambdas.size(),
          ErrorKind::shape,
          "mix spec of length " + std::to_string(spec.lambdas.size()) + " for a batch of " + std::to_string(x.rows()));
  RowMatrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto k = static_cast<Eigen::Index>(spec.partners[static_cast<std::size_t>(i)]);
    require(k < x.rows(), ErrorKind::shape, "mix partner out of range");
    const double lam = spec.lambdas[static_cast<std::size_t>(i)];
    out.row(i) = lam * x.row(i) + (1.0 - lam) * x.row(k);
  }
  return out;
}

LossResult bimixco_loss(const EmbeddingBatch& p_star, const EmbeddingBatch& targets, const MixSpec& spec,
                        const LossConfig& config) {
  check_pair(p_star, targets, "bimixco_loss");
  check_tau(config.tau);
  const Eigen::Index n = p_star.rows();
  require(spec.size() == static_cast<std::size_t>(n) && spec.partners.size() == spec.size(), ErrorKind::shape,
          "bimixco_loss: mix spec does not match the batch");
  if (config.normalize) {
    check_unit_rows(p_star, "bimixco_loss p_star");
    check_unit_rows(targets, "bimixco_loss targets");
  }

  // Mixed one-hot targets: weight lambda_i on t_i and 1 - lambda_i on t_{k_i}. The row direction reads
  // rows of this matrix, the column direction reads its columns (the {l | k_l = j} sum).
  RowMatrix mixed = RowMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(spec.partners[static_cast<std::size_t>(i)]);
    require(k < n, ErrorKind::shape, "mix partner out of range");
    const double lam = spec.lambdas[static_cast<std::size_t>(i)];
    mixed(i, i) += lam;
    mixed(i, k) += 1.0 - lam;
  }

  const RowMatrix logits = (p_star * targets.transpose()) / config.tau;
  const RowMatrix log_row = row_log_softmax(logits);
  const RowMatrix log_col = col_log_softmax(logits);
  const double loss = -(mixed.cwiseProduct(log_row).sum() + mixed.cwiseProduct(log_col).sum());

  // Row direction: each row of `mixed` sums to 1. Column direction: column j carries total weight w_j.
  const Eigen::RowVectorXd col_weight = mixed.colwise().sum();
  RowMatrix g = log_row.array().exp().matrix() - mixed;
  g += (log_col.array().exp().rowwise() * col_weight.array()).matrix() - mixed;
  g /= config.tau;
  return {loss, g * targets};
}

LossResult softclip_loss(const EmbeddingBatch& p, const EmbeddingBatch& targets, const LossConfig& config) {
  check_pair(p, targets, "softclip_loss");
  check_tau(config.tau);
  if (config.normalize) {
    check_unit_rows(p, "softclip_loss p");
    check_unit_rows(targets, "softclip_loss targets");
  }
  const RowMatrix soft = row_log_softmax((targets * targets.transpose()) / config.tau).array().exp();
  const RowMatrix logits = (p * targets.transpose()) / config.tau;
  const RowMatrix log_row = row_log_softmax(logits);

  double loss = -soft.cwiseProduct(log_row).sum();
  RowMatrix g = log_row.array().exp().matrix() - soft;
  if (config.softclip_bidirectional) {
    // Column j of the logits against soft-label row j.
    const RowMatrix log_col = col_log_softmax(logits);
    loss -= soft.transpose().cwiseProduct(log_col).sum();
    g += log_col.array().exp().matrix() - soft.transpose();
  }
  g /= config.tau;
  return {loss, g * targets};
}

double soft_label_entropy(const EmbeddingBatch& targets, double tau, bool bidirectional) {
  check_tau(tau);
  const RowMatrix log_soft = row_log_softmax((targets * targets.transpose()) / tau);
  const double h = -(log_soft.array().exp() * log_soft.array()).sum();
  return bidirectional ? 2.0 * h : h;
}

}  // namespace ndecode
