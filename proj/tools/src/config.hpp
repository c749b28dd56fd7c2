#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ndecode/synthetic_cohort.hpp"
#include "ndecode/trainer.hpp"
#include "ndecode/volume_pipeline.hpp"

namespace ndecode::cli {

struct CohortSection {
  CohortConfig model;             // voxel_dim is derived from dims
  GridDims dims{16, 16, 8};
  std::uint32_t n_trs = 404;
  double tr_seconds = 1.0;
  std::uint64_t stimulus_seed = 0;
  std::uint64_t noise_seed = 0;
};

struct PairsSection {
  PairingConfig pairing;
  std::size_t n_test = 100;
  std::uint64_t split_seed = 0;
};

struct EncoderSection {
  std::vector<std::size_t> hidden{1024, 1024};
  std::uint64_t init_seed = 0;
};

struct TrainSection {
  TrainConfig train;
  std::vector<SubjectId> subjects;  // empty: every subject in the pack
};

struct EvalSection {
  std::vector<std::size_t> ks{1, 3};
  std::size_t subsample = 0;  // 0 disables the subsample protocol
  std::size_t trials = 30;
  std::size_t subsample_k = 1;
  std::uint64_t seed = 0;
};

struct SimilaritySection {
  SubjectId target = 1;
  std::vector<SubjectId> candidates;  // empty: every other subject
  std::size_t top_k = 10;
  std::string method = "rank_credit";  // or "mean"
  std::size_t select = 0;
  std::string mode = "most_similar";   // or "least_similar"
};

struct SweepSection {
  std::vector<std::size_t> grid{1, 2, 4, 8};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<SubjectId> seen_pool;  // empty: every subject not listed as unseen
  std::vector<SubjectId> unseen;
  bool shuffle_pool = true;
};

struct ExperimentConfig {
  CohortSection cohort;
  PairsSection pairs;
  EncoderSection encoder;
  TrainSection train;
  EvalSection eval;
  SimilaritySection similarity;
  SweepSection sweep;

  ExperimentConfig();
};

/// Parses INI text; unknown sections or keys and malformed values are config errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its effective value; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const ExperimentConfig& config);

/// Replaces every seed key with `seed`.
void override_seeds(ExperimentConfig& config, std::uint64_t seed);

}  // namespace ndecode::cli
