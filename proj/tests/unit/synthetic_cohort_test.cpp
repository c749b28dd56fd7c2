#include "ndecode/synthetic_cohort.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "ndecode/error.hpp"
#include "ndecode/losses.hpp"

namespace ndecode {
namespace {

// Mean |cos| and root-mean-square cos over all distinct pairs.
std::pair<double, double> pairwise_cosine_moments(const std::vector<Stimulus>& s) {
  double abs_sum = 0.0, sq_sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      const double c = s[i].embedding.dot(s[j].embedding);
      abs_sum += std::abs(c);
      sq_sum += c * c;
      ++n;
    }
  return {abs_sum / static_cast<double>(n), std::sqrt(sq_sum / static_cast<double>(n))};
}

double operator_correlation(const RowMatrix& a, const RowMatrix& b) {
  const double ma = a.mean(), mb = b.mean();
  const auto ca = (a.array() - ma).matrix();
  const auto cb = (b.array() - mb).matrix();
  return (ca.array() * cb.array()).sum() / std::sqrt(ca.squaredNorm() * cb.squaredNorm());
}

CohortConfig small_config(double shared, double sigma, std::uint64_t seed) {
  CohortConfig c;
  c.n_subjects = 4;
  c.voxel_dim = 64;
  c.latent_dim = 16;
  c.shared_frac = shared;
  c.noise_sigma = sigma;
  c.seed = seed;
  return c;
}

TEST(GenStimuli, UnitNormAndIds) {
  const auto s = gen_stimuli(30, 12, 4);
  ASSERT_EQ(s.size(), 30u);
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].id, i + 1);
    EXPECT_NEAR(s[i].embedding.norm(), 1.0, 1e-12);
  }
}

TEST(GenStimuli, Deterministic) {
  const auto a = gen_stimuli(10, 8, 21);
  const auto b = gen_stimuli(10, 8, 21);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].embedding, b[i].embedding);
  EXPECT_NE(gen_stimuli(10, 8, 22)[0].embedding, a[0].embedding);
}

TEST(GenStimuli, RandomDirectionCosineMagnitude) {
  // For independent uniform directions in d dims, E[cos^2] = 1/d and
  // E|cos| = Gamma(d/2) / (sqrt(pi) * Gamma((d+1)/2)).
  const double d = 64.0;
  const double mean_abs = std::exp(std::lgamma(d / 2) - std::lgamma((d + 1) / 2)) / std::sqrt(M_PI);
  const auto [abs_mean, rms] = pairwise_cosine_moments(gen_stimuli(1000, 64, 8));
  EXPECT_NEAR(rms, 0.125, 0.02);
  EXPECT_NEAR(abs_mean, mean_abs, 0.005);
}

TEST(GenCohort, FullySharedSubjectsAreIdentical) {
  const auto c = gen_cohort(small_config(1.0, 0.0, 3));
  for (const auto& s : c) EXPECT_EQ(s.op, c[0].op);
}

TEST(GenCohort, UnsharedOperatorsAreUncorrelated) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto c = gen_cohort(small_config(0.0, 0.0, seed));
    for (std::size_t i = 0; i < c.size(); ++i)
      for (std::size_t j = i + 1; j < c.size(); ++j) {
        sum += operator_correlation(c[i].op, c[j].op);
        ++n;
      }
  }
  EXPECT_NEAR(sum / static_cast<double>(n), 0.0, 0.01);
}

TEST(GenCohort, EntryScale) {
  CohortConfig cfg = small_config(0.6, 0.0, 5);
  cfg.voxel_dim = 2048;
  cfg.latent_dim = 32;
  cfg.n_subjects = 2;
  const auto c = gen_cohort(cfg);
  const double var = c[0].op.squaredNorm() / static_cast<double>(c[0].op.size());
  EXPECT_NEAR(var, 1.0 / 32.0, 0.05 / 32.0);
}

TEST(GenCohort, DeterministicAndValidated) {
  const auto a = gen_cohort(small_config(0.5, 0.1, 9));
  const auto b = gen_cohort(small_config(0.5, 0.1, 9));
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].op, b[i].op);
    EXPECT_EQ(a[i].subject_id, i + 1);
  }
  auto bad = small_config(1.5, 0.1, 0);
  EXPECT_THROW(gen_cohort(bad), Error);
  bad = small_config(0.5, 0.1, 0);
  bad.n_subjects = 0;
  EXPECT_THROW(gen_cohort(bad), Error);
}

TEST(SimulateResponse, NoiselessIsLinear) {
  const auto c = gen_cohort(small_config(0.6, 0.0, 1));
  const Vector zero = Vector::Zero(16);
  EXPECT_EQ(simulate_response(c[0], zero, 3), Vector::Zero(64));
  const auto e = gen_stimuli(1, 16, 2)[0].embedding;
  EXPECT_EQ(simulate_response(c[1], e, 7), c[1].op * e);
}

TEST(SimulateResponse, SharedSubjectsRespondIdentically) {
  const auto c = gen_cohort(small_config(1.0, 0.0, 1));
  const auto e = gen_stimuli(1, 16, 2)[0].embedding;
  EXPECT_NEAR(cosine_sim(simulate_response(c[0], e, 1), simulate_response(c[2], e, 2)), 1.0, 1e-12);
}

TEST(SimulateResponse, NoiseIsSeededAndScaled) {
  auto c = gen_cohort(small_config(0.6, 0.0, 1));
  c[0].noise_sigma = 2.0;
  c[0].op.setZero();
  const Vector e = Vector::Zero(16);
  const Vector a = simulate_response(c[0], e, 5);
  EXPECT_EQ(a, simulate_response(c[0], e, 5));
  EXPECT_NE(a, simulate_response(c[0], e, 6));
  EXPECT_NEAR(std::sqrt(a.squaredNorm() / 64.0), 2.0, 0.5);
}

TEST(SimulateResponse, WrongLengthIsShapeError) {
  const auto c = gen_cohort(small_config(0.6, 0.0, 1));
  try {
    simulate_response(c[0], Vector::Zero(15), 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
}

TEST(Cohort, SimilarityIsMonotoneInSharedFraction) {
  // Noiseless responses, averaged over 100 stimuli and all pairs of 5 subjects.
  const auto stimuli = gen_stimuli(100, 64, 12);
  double previous = -1.0;
  for (double shared : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    CohortConfig cfg;
    cfg.n_subjects = 5;
    cfg.voxel_dim = 256;
    cfg.latent_dim = 64;
    cfg.shared_frac = shared;
    cfg.noise_sigma = 0.0;
    cfg.seed = 31;
    const auto c = gen_cohort(cfg);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& st : stimuli)
      for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = i + 1; j < c.size(); ++j) {
          sum += cosine_sim(simulate_response(c[i], st.embedding, 0), simulate_response(c[j], st.embedding, 0));
          ++n;
        }
    const double mean = sum / static_cast<double>(n);
    EXPECT_GE(mean, previous - 1e-12) << "shared_frac " << shared;
    if (shared == 0.0) EXPECT_LE(std::abs(mean), 0.05);
    if (shared == 1.0) EXPECT_NEAR(mean, 1.0, 1e-12);
    previous = mean;
  }
}

TEST(GradedCandidates, WeightsControlSimilarity) {
  CohortConfig cfg = small_config(0.0, 0.0, 4);
  cfg.voxel_dim = 512;
  cfg.n_subjects = 1;
  const auto target = gen_cohort(cfg)[0];
  const std::vector<double> weights{0.0, 0.3, 0.9, 1.0};
  const auto cands = gen_graded_candidates(target, weights, 0.2, 6, 100);
  ASSERT_EQ(cands.size(), 4u);
  EXPECT_EQ(cands[0].subject_id, 100u);
  EXPECT_EQ(cands[3].subject_id, 103u);
  EXPECT_EQ(cands[3].op, target.op);
  double previous = -1.0;
  for (const auto& c : cands) {
    EXPECT_EQ(c.noise_sigma, 0.2);
    const double corr = operator_correlation(c.op, target.op);
    EXPECT_GT(corr, previous);
    previous = corr;
  }
  const std::vector<double> bad{1.2};
  EXPECT_THROW(gen_graded_candidates(target, bad, 0.2, 6, 100), Error);
}

TEST(SynthesizePairs, OneRecordPerSubjectAndStimulus) {
  const auto c = gen_cohort(small_config(0.6, 0.5, 1));
  const auto s = gen_stimuli(7, 16, 2);
  const auto pairs = synthesize_pairs(c, s, 3, true);
  EXPECT_EQ(pairs.records.size(), 28u);
  EXPECT_EQ(pairs.voxel_dim, 64u);
  EXPECT_EQ(pairs.embed_dim, 16u);
  EXPECT_TRUE(pairs.standardized);
  pairs.validate();

  const auto raw = synthesize_pairs(c, s, 3, false);
  const auto& rec = raw.records[9];
  const SubjectModel& subj = c[rec.subject_id - 1];
  const Vector expect =
      simulate_response(subj, s[rec.stimulus_id - 1].embedding, response_noise_seed(3, rec.subject_id, rec.stimulus_id));
  for (std::size_t i = 0; i < rec.voxels.size(); ++i) EXPECT_EQ(rec.voxels[i], expect[static_cast<Eigen::Index>(i)]);
}

TEST(SynthesizePairs, Deterministic) {
  const auto c = gen_cohort(small_config(0.6, 0.5, 1));
  const auto s = gen_stimuli(5, 16, 2);
  EXPECT_EQ(synthesize_pairs(c, s, 3, true), synthesize_pairs(c, s, 3, true));
  EXPECT_NE(synthesize_pairs(c, s, 3, true), synthesize_pairs(c, s, 4, true));
}

}  // namespace
}  // namespace ndecode
