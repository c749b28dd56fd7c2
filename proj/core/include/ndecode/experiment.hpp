#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "ndecode/encoder.hpp"
#include "ndecode/retrieval.hpp"
#include "ndecode/trainer.hpp"
#include "ndecode/volume_pipeline.hpp"

namespace ndecode {

struct SubjectScore {
  SubjectId subject = 0;
  bool seen = false;
  double top1 = 0.0;
  double top3 = 0.0;
  std::size_t n_queries = 0;
};

struct PointResult {
  std::vector<SubjectId> train_subjects;
  std::vector<SubjectScore> scores;
  double unseen_top1 = 0.0;
  double unseen_top3 = 0.0;
  double seen_top1 = 0.0;
  double seen_top3 = 0.0;
  TrainHistory history;
  EncoderParams params;
};

/// Per-subject retrieval on `test` (gallery: that subject's test stimuli).
std::vector<SubjectScore> score_subjects(const EncoderParams& params, const PairSet& test,
                                         const std::vector<SubjectId>& subjects, bool seen);

double mean_top1(const std::vector<SubjectScore>& scores, bool seen);
double mean_top3(const std::vector<SubjectScore>& scores, bool seen);

/// [voxel_dim, hidden..., embed_dim]
std::vector<std::size_t> encoder_dims(std::size_t voxel_dim, const std::vector<std::size_t>& hidden,
                                      std::size_t embed_dim);

/// Trains one encoder on `train_subjects` and scores it on the held-out stimuli of both the
/// training subjects (seen) and `unseen_subjects`.
PointResult run_generalization_point(const PairSet& train, const PairSet& test,
                                     const std::vector<SubjectId>& train_subjects,
                                     const std::vector<SubjectId>& unseen_subjects,
                                     const std::vector<std::size_t>& hidden, const TrainConfig& config,
                                     std::uint64_t init_seed);

struct SweepPoint {
  std::size_t n_subjects = 0;
  std::uint64_t seed = 0;
  PointResult result;
};

struct CountSweepConfig {
  std::vector<std::size_t> grid{1, 2, 4, 8};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<SubjectId> seen_pool;
  std::vector<SubjectId> unseen;
  std::vector<std::size_t> hidden{1024, 1024};
  TrainConfig train;
  /// Draw each seed's training subjects from a seed-specific shuffle of seen_pool (nested across n).
  bool shuffle_pool = true;
  std::size_t threads = 1;
};

/// Seed and subject set used for grid point (n, seed); independent of evaluation order and threading.
TrainConfig point_train_config(const TrainConfig& base, std::size_t n_subjects, std::uint64_t seed);
std::uint64_t point_init_seed(std::size_t n_subjects, std::uint64_t seed);
std::vector<SubjectId> point_subjects(const std::vector<SubjectId>& pool, std::size_t n_subjects, std::uint64_t seed,
                                      bool shuffle);

/// Results in grid-major, then seed order.
std::vector<SweepPoint> run_count_sweep(const PairSet& train, const PairSet& test, const CountSweepConfig& config);

/// Mean over seeds of each grid point's unseen / seen top-1, in grid order.
std::vector<double> mean_unseen_top1(const std::vector<SweepPoint>& points, const std::vector<std::size_t>& grid);
std::vector<double> mean_seen_top1(const std::vector<SweepPoint>& points, const std::vector<std::size_t>& grid);

/// Runs `jobs` on up to `threads` worker threads; job i writes only its own slot.
void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace ndecode
