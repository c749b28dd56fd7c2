#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ndecode/types.hpp"

namespace ndecode {

struct GridDims {
  std::uint32_t x = 1;
  std::uint32_t y = 1;
  std::uint32_t z = 1;

  std::size_t count() const noexcept { return std::size_t{x} * y * z; }
  bool operator==(const GridDims&) const = default;
};

/// One 3D volume. Values are row-major with z fastest: index = (i*y + j)*z + k.
struct VoxelGrid {
  GridDims dims;
  std::vector<double> values;

  VoxelGrid() = default;
  VoxelGrid(GridDims d, double fill = 0.0) : dims(d), values(d.count(), fill) {}
  VoxelGrid(GridDims d, std::vector<double> v);

  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return (i * dims.y + j) * dims.z + k;
  }
  double& at(std::size_t i, std::size_t j, std::size_t k) { return values[index(i, j, k)]; }
  double at(std::size_t i, std::size_t j, std::size_t k) const { return values[index(i, j, k)]; }

  /// Throws data error on size mismatch or non-finite values.
  void validate() const;
};

/// A subject's fMRI recording: one grid per TR, all with identical dims.
struct VolumeSeries {
  SubjectId subject_id = 0;
  double tr_seconds = 1.0;
  std::vector<VoxelGrid> grids;

  std::size_t n_trs() const noexcept { return grids.size(); }
  void validate() const;
};

struct PairRecord {
  StimulusId stimulus_id = 0;
  SubjectId subject_id = 0;
  std::vector<double> embedding;
  std::vector<double> voxels;

  bool operator==(const PairRecord&) const = default;
};

/// Aligned (stimulus embedding, voxel response) records.
struct PairSet {
  std::size_t embed_dim = 0;
  std::size_t voxel_dim = 0;
  bool standardized = false;
  std::vector<PairRecord> records;

  /// Checks vector lengths against the header and (stimulus, subject) uniqueness.
  void validate() const;

  std::vector<StimulusId> stimulus_ids() const;  // sorted, distinct
  std::vector<SubjectId> subject_ids() const;    // sorted, distinct

  /// Records whose subject is in `subjects`, in original order.
  PairSet filter_subjects(const std::vector<SubjectId>& subjects) const;

  RowMatrix voxel_matrix() const;
  RowMatrix embedding_matrix() const;

  bool operator==(const PairSet&) const = default;
};

struct PairingConfig {
  std::uint32_t window_len = 5;
  /// Volumes between the stimulus TR and the first averaged volume. 0 includes the stimulus TR.
  std::uint32_t window_offset = 0;
  GridDims target_dims;
  bool standardize = true;
};

/// Scheduled stimulus and the inclusive 1-based TR window averaged for it.
struct ScheduleEntry {
  std::uint32_t stimulus_t = 0;
  std::uint32_t first = 0;
  std::uint32_t last = 0;

  bool operator==(const ScheduleEntry&) const = default;
};

std::vector<ScheduleEntry> pair_schedule(std::uint32_t n_trs, std::uint32_t window_len,
                                         std::uint32_t window_offset = 0);

/// Element-wise mean of grids [stimulus_t + offset, stimulus_t + offset + window_len - 1] (1-based).
VoxelGrid average_window(const VolumeSeries& series, std::uint32_t stimulus_t,
                         std::uint32_t window_len, std::uint32_t window_offset = 0);

/// Align-corners trilinear resampling; singleton input axes are replicated.
VoxelGrid resample_trilinear(const VoxelGrid& grid, GridDims target);

/// Per-vector zero mean, unit (population) standard deviation.
void standardize_in_place(std::vector<double>& values, double eps = 1e-8);

using EmbeddingTable = std::map<StimulusId, std::vector<double>>;

PairSet build_pairs(const std::vector<VolumeSeries>& series_list, const EmbeddingTable& embeddings,
                    const PairingConfig& config);

struct TrainTestSplit {
  PairSet train;
  PairSet test;
  std::vector<StimulusId> test_stimuli;  // sorted
};

/// Holds out `n_test_stimuli` stimulus ids (for every subject) chosen uniformly under `seed`.
TrainTestSplit split_train_test(const PairSet& pairs, std::size_t n_test_stimuli, std::uint64_t seed);

}  // namespace ndecode
