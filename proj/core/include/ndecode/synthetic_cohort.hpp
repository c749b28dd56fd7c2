#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ndecode/types.hpp"
#include "ndecode/volume_pipeline.hpp"

namespace ndecode {

/// Linear stand-in for a subject's brain response: voxels = operator * embedding + noise.
struct SubjectModel {
  SubjectId subject_id = 0;
  RowMatrix op;  // voxel_dim x latent_dim
  double noise_sigma = 0.0;

  std::size_t voxel_dim() const { return static_cast<std::size_t>(op.rows()); }
  std::size_t latent_dim() const { return static_cast<std::size_t>(op.cols()); }
};

struct CohortConfig {
  std::size_t n_subjects = 10;
  std::size_t voxel_dim = 2048;
  std::size_t latent_dim = 32;
  /// Weight of the operator shared by every subject; 1 makes all subjects identical.
  double shared_frac = 0.6;
  double noise_sigma = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Stimulus {
  StimulusId id = 0;
  Vector embedding;
};

/// n unit-norm Gaussian directions with ids 1..n.
std::vector<Stimulus> gen_stimuli(std::size_t n, std::size_t embed_dim, std::uint64_t seed);

/// Subjects 1..n. op_s = sqrt(shared_frac) * A_shared + sqrt(1 - shared_frac) * A_s,
/// with A entries i.i.d. N(0, 1/latent_dim).
std::vector<SubjectModel> gen_cohort(const CohortConfig& config);

/// Candidates whose operators lean toward `target`: op_c = sqrt(w_c) * op_target + sqrt(1 - w_c) * A_c.
/// Candidate c gets subject id first_id + c.
std::vector<SubjectModel> gen_graded_candidates(const SubjectModel& target, std::span<const double> weights,
                                                double noise_sigma, std::uint64_t seed, SubjectId first_id);

Vector simulate_response(const SubjectModel& subject, const Vector& embedding, std::uint64_t noise_seed);

/// Noise seed used for (subject, stimulus) draws by synthesize_pairs.
std::uint64_t response_noise_seed(std::uint64_t noise_seed, SubjectId subject, StimulusId stimulus);

/// One record per (subject, stimulus), with voxels drawn by simulate_response.
PairSet synthesize_pairs(const std::vector<SubjectModel>& subjects, const std::vector<Stimulus>& stimuli,
                         std::uint64_t noise_seed, bool standardize);

EmbeddingTable embedding_table(const std::vector<Stimulus>& stimuli);

}  // namespace ndecode
