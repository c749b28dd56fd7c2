#include "ndecode/synthetic_cohort.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ndecode/error.hpp"

namespace ndecode {

namespace {

constexpr std::uint64_t kStimulusTag = 0x5354494d;  // "STIM"
constexpr std::uint64_t kSharedTag = 0x53484152;    // "SHAR"
constexpr std::uint64_t kIndividualTag = 0x494e4456;
constexpr std::uint64_t kNoiseTag = 0x4e4f4953;

RowMatrix gaussian_operator(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cols)));
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

void CohortConfig::validate() const {
  require(n_subjects >= 1, ErrorKind::config, "cohort needs at least one subject");
  require(voxel_dim >= 1 && latent_dim >= 1, ErrorKind::config, "cohort dims must be positive");
  require(shared_frac >= 0.0 && shared_frac <= 1.0, ErrorKind::config, "shared_frac must lie in [0, 1]");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), ErrorKind::config, "noise_sigma must be non-negative");
}

std::vector<Stimulus> gen_stimuli(std::size_t n, std::size_t embed_dim, std::uint64_t seed) {
  require(n >= 1 && embed_dim >= 1, ErrorKind::config, "gen_stimuli needs n >= 1 and embed_dim >= 1");
  std::vector<Stimulus> out;
  out.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    const auto id = static_cast<StimulusId>(s + 1);
    std::mt19937_64 rng(derive_seed(seed, kStimulusTag, id));
    std::normal_distribution<double> normal;
    Vector v(static_cast<Eigen::Index>(embed_dim));
    do {
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
    } while (v.norm() == 0.0);
    out.push_back({id, v / v.norm()});
  }
  return out;
}

std::vector<SubjectModel> gen_cohort(const CohortConfig& config) {
  config.validate();
  const RowMatrix shared = gaussian_operator(config.voxel_dim, config.latent_dim, derive_seed(config.seed, kSharedTag));
  const double ws = std::sqrt(config.shared_frac);
  const double wi = std::sqrt(1.0 - config.shared_frac);
  std::vector<SubjectModel> out;
  out.reserve(config.n_subjects);
  for (std::size_t s = 0; s < config.n_subjects; ++s) {
    const auto id = static_cast<SubjectId>(s + 1);
    SubjectModel m{id, ws * shared, config.noise_sigma};
    if (wi > 0.0)
      m.op += wi * gaussian_operator(config.voxel_dim, config.latent_dim, derive_seed(config.seed, kIndividualTag, id));
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<SubjectModel> gen_graded_candidates(const SubjectModel& target, std::span<const double> weights,
                                                double noise_sigma, std::uint64_t seed, SubjectId first_id) {
  std::vector<SubjectModel> out;
  out.reserve(weights.size());
  for (std::size_t c = 0; c < weights.size(); ++c) {
    const double w = weights[c];
    require(w >= 0.0 && w <= 1.0, ErrorKind::config, "candidate mixing weights must lie in [0, 1]");
    const auto id = static_cast<SubjectId>(first_id + c);
    SubjectModel m{id, std::sqrt(w) * target.op, noise_sigma};
    if (w < 1.0)
      m.op += std::sqrt(1.0 - w) *
              gaussian_operator(target.voxel_dim(), target.latent_dim(), derive_seed(seed, kIndividualTag, id));
    out.push_back(std::move(m));
  }
  return out;
}

Vector simulate_response(const SubjectModel& subject, const Vector& embedding, std::uint64_t noise_seed) {
  require(embedding.size() == subject.op.cols(), ErrorKind::shape,
          "embedding length " + std::to_string(embedding.size()) + " does not match latent_dim " +
              std::to_string(subject.op.cols()));
  Vector v = subject.op * embedding;
  if (subject.noise_sigma > 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += subject.noise_sigma * normal(rng);
  }
  return v;
}

std::uint64_t response_noise_seed(std::uint64_t noise_seed, SubjectId subject, StimulusId stimulus) {
  return derive_seed(derive_seed(noise_seed, kNoiseTag), subject, stimulus);
}

PairSet synthesize_pairs(const std::vector<SubjectModel>& subjects, const std::vector<Stimulus>& stimuli,
                         std::uint64_t noise_seed, bool standardize) {
  require(!subjects.empty() && !stimuli.empty(), ErrorKind::config, "synthesize_pairs needs subjects and stimuli");
  PairSet out;
  out.embed_dim = static_cast<std::size_t>(stimuli.front().embedding.size());
  out.voxel_dim = subjects.front().voxel_dim();
  out.standardized = standardize;
  out.records.reserve(subjects.size() * stimuli.size());
  for (const auto& subject : subjects) {
    require(subject.voxel_dim() == out.voxel_dim, ErrorKind::shape, "subjects disagree on voxel_dim");
    for (const auto& stim : stimuli) {
      const Vector v = simulate_response(subject, stim.embedding, response_noise_seed(noise_seed, subject.subject_id, stim.id));
      PairRecord rec{stim.id, subject.subject_id,
                     std::vector<double>(stim.embedding.data(), stim.embedding.data() + stim.embedding.size()),
                     std::vector<double>(v.data(), v.data() + v.size())};
      if (standardize) standardize_in_place(rec.voxels);
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

EmbeddingTable embedding_table(const std::vector<Stimulus>& stimuli) {
  EmbeddingTable table;
  for (const auto& s : stimuli)
    table.emplace(s.id, std::vector<double>(s.embedding.data(), s.embedding.data() + s.embedding.size()));
  return table;
}

}  // namespace ndecode
