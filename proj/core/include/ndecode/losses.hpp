#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ndecode/types.hpp"

namespace ndecode {

struct LossConfig {
  double tau = 0.01;
  /// Beta(alpha, alpha) parameter for mixup coefficients.
  double alpha = 0.15;
  /// Require unit-norm rows for the dot-product losses (BiMixCo, SoftCLIP).
  bool normalize = true;
  /// Add the column-wise (target -> prediction) term to SoftCLIP.
  bool softclip_bidirectional = true;
};

/// Per-row mixup coefficients and partner rows (0-based).
struct MixSpec {
  std::vector<double> lambdas;
  std::vector<std::size_t> partners;

  std::size_t size() const noexcept { return lambdas.size(); }
  bool operator==(const MixSpec&) const = default;
};

struct LossResult {
  double loss = 0.0;
  EmbeddingBatch grad;  // d loss / d (brain-side batch), same shape as that batch
};

double cosine_sim(std::span<const double> x, std::span<const double> y);
double cosine_sim(const Vector& x, const Vector& y);

/// Rows scaled to unit L2 norm. Zero rows raise a degenerate-input error.
EmbeddingBatch normalize_rows(const EmbeddingBatch& rows);

/// Back-propagates d loss / d normalize_rows(raw) to d loss / d raw.
EmbeddingBatch normalize_rows_backward(const EmbeddingBatch& raw, const EmbeddingBatch& grad_normalized);

/// Symmetric InfoNCE with cosine logits / tau and the 1/(2N) prefactor.
/// The gradient is taken w.r.t. the raw (unnormalized) rows of `brain`.
LossResult clip_loss(const EmbeddingBatch& image, const EmbeddingBatch& brain, double tau);

/// lambda_i ~ Beta(alpha, alpha); partner k_i uniform over the other rows (k_0 = 0 when n = 1).
MixSpec sample_mixspec(std::size_t n, double alpha, std::uint64_t seed);

/// Row i becomes lambda_i * x_i + (1 - lambda_i) * x_{k_i}.
RowMatrix mixco_mix(const RowMatrix& x, const MixSpec& spec);

/// Two-direction MixCo loss on dot-product logits (raw sums, no batch prefactor).
/// The gradient is w.r.t. p_star as given; callers normalise upstream.
LossResult bimixco_loss(const EmbeddingBatch& p_star, const EmbeddingBatch& targets, const MixSpec& spec,
                        const LossConfig& config);

/// Soft-label contrastive loss: cross-entropy between softmax(t_i . t / tau) and softmax(p_i . t / tau),
/// summed over rows, plus the column direction when config.softclip_bidirectional is set.
LossResult softclip_loss(const EmbeddingBatch& p, const EmbeddingBatch& targets, const LossConfig& config);

/// Total entropy of the SoftCLIP soft labels (doubled when bidirectional); softclip_loss attains it at p = t.
double soft_label_entropy(const EmbeddingBatch& targets, double tau, bool bidirectional);

}  // namespace ndecode
