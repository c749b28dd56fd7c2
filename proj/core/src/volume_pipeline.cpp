#include "ndecode/volume_pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "ndecode/error.hpp"

namespace ndecode {

namespace {

std::string dims_string(GridDims d) {
  return std::to_string(d.x) + "x" + std::to_string(d.y) + "x" + std::to_string(d.z);
}

// Align-corners source coordinate for each output index along one axis.
struct AxisSample {
  std::size_t lo;
  std::size_t hi;
  double frac;
};

std::vector<AxisSample> axis_samples(std::uint32_t n_in, std::uint32_t n_out) {
  std::vector<AxisSample> out(n_out);
  for (std::uint32_t i = 0; i < n_out; ++i) {
    if (n_in == 1) {
      out[i] = {0, 0, 0.0};
      continue;
    }
    const double pos =
        n_out == 1 ? 0.0 : static_cast<double>(i) * static_cast<double>(n_in - 1) / static_cast<double>(n_out - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo >= n_in - 1) lo = n_in - 2;
    out[i] = {lo, lo + 1, pos - static_cast<double>(lo)};
  }
  return out;
}

}  // namespace

VoxelGrid::VoxelGrid(GridDims d, std::vector<double> v) : dims(d), values(std::move(v)) {
  require(values.size() == dims.count(), ErrorKind::data,
          "voxel grid " + dims_string(dims) + " expects " + std::to_string(dims.count()) + " values, got " +
              std::to_string(values.size()));
}

void VoxelGrid::validate() const {
  require(dims.x >= 1 && dims.y >= 1 && dims.z >= 1, ErrorKind::data, "voxel grid has a zero dimension");
  require(values.size() == dims.count(), ErrorKind::data, "voxel grid value count does not match its dims");
  for (double v : values) require(std::isfinite(v), ErrorKind::data, "voxel grid contains a non-finite value");
}

void VolumeSeries::validate() const {
  require(!grids.empty(), ErrorKind::data, "volume series for subject " + std::to_string(subject_id) + " is empty");
  require(tr_seconds > 0.0, ErrorKind::data, "tr_seconds must be positive");
  for (std::size_t t = 0; t < grids.size(); ++t) {
    require(grids[t].dims == grids.front().dims, ErrorKind::data,
            "subject " + std::to_string(subject_id) + " TR " + std::to_string(t + 1) + " has dims " +
                dims_string(grids[t].dims) + ", expected " + dims_string(grids.front().dims));
    grids[t].validate();
  }
}

void PairSet::validate() const {
  std::set<std::pair<StimulusId, SubjectId>> seen;
  for (const auto& r : records) {
    require(r.embedding.size() == embed_dim, ErrorKind::data,
            "record (stimulus " + std::to_string(r.stimulus_id) + ", subject " + std::to_string(r.subject_id) +
                ") has embedding length " + std::to_string(r.embedding.size()) + ", header says " +
                std::to_string(embed_dim));
    require(r.voxels.size() == voxel_dim, ErrorKind::data,
            "record (stimulus " + std::to_string(r.stimulus_id) + ", subject " + std::to_string(r.subject_id) +
                ") has voxel length " + std::to_string(r.voxels.size()) + ", header says " +
                std::to_string(voxel_dim));
    require(seen.emplace(r.stimulus_id, r.subject_id).second, ErrorKind::data,
            "duplicate record (stimulus " + std::to_string(r.stimulus_id) + ", subject " +
                std::to_string(r.subject_id) + ")");
  }
}

std::vector<StimulusId> PairSet::stimulus_ids() const {
  std::set<StimulusId> ids;
  for (const auto& r : records) ids.insert(r.stimulus_id);
  return {ids.begin(), ids.end()};
}

std::vector<SubjectId> PairSet::subject_ids() const {
  std::set<SubjectId> ids;
  for (const auto& r : records) ids.insert(r.subject_id);
  return {ids.begin(), ids.end()};
}

PairSet PairSet::filter_subjects(const std::vector<SubjectId>& subjects) const {
  const std::set<SubjectId> keep(subjects.begin(), subjects.end());
  PairSet out{embed_dim, voxel_dim, standardized, {}};
  for (const auto& r : records)
    if (keep.contains(r.subject_id)) out.records.push_back(r);
  return out;
}

RowMatrix PairSet::voxel_matrix() const {
  RowMatrix m(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(voxel_dim));
  for (std::size_t i = 0; i < records.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(records[i].voxels.data(), static_cast<Eigen::Index>(voxel_dim));
  return m;
}

RowMatrix PairSet::embedding_matrix() const {
  RowMatrix m(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(embed_dim));
  for (std::size_t i = 0; i < records.size(); ++i)
    m.row(static_cast<Eigen::Index>(i)) =
        Eigen::Map<const Eigen::RowVectorXd>(records[i].embedding.data(), static_cast<Eigen::Index>(embed_dim));
  return m;
}

std::vector<ScheduleEntry> pair_schedule(std::uint32_t n_trs, std::uint32_t window_len, std::uint32_t window_offset) {
  require(window_len >= 1, ErrorKind::config, "window_len must be at least 1");
  const std::uint64_t span = std::uint64_t{window_len} + window_offset;
  require(n_trs >= span, ErrorKind::data,
          "series of " + std::to_string(n_trs) + " TRs is too short for a window of " + std::to_string(window_len) +
              " (offset " + std::to_string(window_offset) + ")");
  std::vector<ScheduleEntry> out;
  const auto count = static_cast<std::uint32_t>(n_trs - span + 1);
  out.reserve(count);
  for (std::uint32_t t = 1; t <= count; ++t) out.push_back({t, t + window_offset, t + window_offset + window_len - 1});
  return out;
}

VoxelGrid average_window(const VolumeSeries& series, std::uint32_t stimulus_t, std::uint32_t window_len,
                         std::uint32_t window_offset) {
  require(window_len >= 1, ErrorKind::config, "window_len must be at least 1");
  const std::uint64_t first = std::uint64_t{stimulus_t} + window_offset;
  const std::uint64_t last = first + window_len - 1;
  require(stimulus_t >= 1 && last <= series.grids.size(), ErrorKind::range,
          "window [" + std::to_string(first) + ", " + std::to_string(last) + "] outside series of " +
              std::to_string(series.grids.size()) + " TRs");
  const GridDims dims = series.grids[first - 1].dims;
  VoxelGrid out(dims, 0.0);
  for (std::uint64_t t = first; t <= last; ++t) {
    const auto& g = series.grids[t - 1];
    require(g.dims == dims, ErrorKind::data, "grids inside the averaging window have different dims");
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += g.values[i];
  }
  const double inv = 1.0 / static_cast<double>(window_len);
  for (double& v : out.values) v *= inv;
  return out;
}

VoxelGrid resample_trilinear(const VoxelGrid& grid, GridDims target) {
  require(target.x >= 1 && target.y >= 1 && target.z >= 1, ErrorKind::config,
          "target dims " + dims_string(target) + " must be positive");
  require(grid.dims.x >= 1 && grid.dims.y >= 1 && grid.dims.z >= 1, ErrorKind::data, "input grid has a zero dimension");
  if (target == grid.dims) return grid;

  const auto sx = axis_samples(grid.dims.x, target.x);
  const auto sy = axis_samples(grid.dims.y, target.y);
  const auto sz = axis_samples(grid.dims.z, target.z);

  VoxelGrid out(target, 0.0);
  for (std::uint32_t i = 0; i < target.x; ++i) {
    const auto& ax = sx[i];
    for (std::uint32_t j = 0; j < target.y; ++j) {
      const auto& ay = sy[j];
      for (std::uint32_t k = 0; k < target.z; ++k) {
        const auto& az = sz[k];
        auto lerp_z = [&](std::size_t a, std::size_t b) {
          return (1.0 - az.frac) * grid.at(a, b, az.lo) + az.frac * grid.at(a, b, az.hi);
        };
        const double c0 = (1.0 - ay.frac) * lerp_z(ax.lo, ay.lo) + ay.frac * lerp_z(ax.lo, ay.hi);
        const double c1 = (1.0 - ay.frac) * lerp_z(ax.hi, ay.lo) + ay.frac * lerp_z(ax.hi, ay.hi);
        out.at(i, j, k) = (1.0 - ax.frac) * c0 + ax.frac * c1;
      }
    }
  }
  return out;
}

void standardize_in_place(std::vector<double>& values, double eps) {
  if (values.empty()) return;
  const auto n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  const double scale = 1.0 / (sd + eps);
  for (double& v : values) v = (v - mean) * scale;
}

PairSet build_pairs(const std::vector<VolumeSeries>& series_list, const EmbeddingTable& embeddings,
                    const PairingConfig& config) {
  require(config.window_len >= 1, ErrorKind::config, "window_len must be at least 1");
  require(config.target_dims.x >= 1 && config.target_dims.y >= 1 && config.target_dims.z >= 1, ErrorKind::config,
          "target dims must be positive");
  require(!embeddings.empty(), ErrorKind::data, "no stimulus embeddings supplied");

  const std::size_t embed_dim = embeddings.begin()->second.size();
  for (const auto& [id, e] : embeddings)
    require(e.size() == embed_dim, ErrorKind::data, "embedding for stimulus " + std::to_string(id) + " has length " +
                                                        std::to_string(e.size()) + ", expected " +
                                                        std::to_string(embed_dim));

  PairSet out;
  out.embed_dim = embed_dim;
  out.voxel_dim = config.target_dims.count();
  out.standardized = config.standardize;

  std::set<SubjectId> subjects;
  for (const auto& series : series_list) {
    series.validate();
    require(series.tr_seconds == series_list.front().tr_seconds, ErrorKind::data,
            "subject " + std::to_string(series.subject_id) + " has a different TR than subject " +
                std::to_string(series_list.front().subject_id));
    require(subjects.insert(series.subject_id).second, ErrorKind::data,
            "subject " + std::to_string(series.subject_id) + " appears twice");

    const auto schedule =
        pair_schedule(static_cast<std::uint32_t>(series.n_trs()), config.window_len, config.window_offset);
    for (const auto& entry : schedule) {
      const auto it = embeddings.find(entry.stimulus_t);
      require(it != embeddings.end(), ErrorKind::data,
              "no embedding for scheduled stimulus " + std::to_string(entry.stimulus_t));
      VoxelGrid avg = average_window(series, entry.stimulus_t, config.window_len, config.window_offset);
      VoxelGrid resized = resample_trilinear(avg, config.target_dims);
      PairRecord rec{entry.stimulus_t, series.subject_id, it->second, std::move(resized.values)};
      if (config.standardize) standardize_in_place(rec.voxels);
      out.records.push_back(std::move(rec));
    }
  }
  return out;
}

TrainTestSplit split_train_test(const PairSet& pairs, std::size_t n_test_stimuli, std::uint64_t seed) {
  std::vector<StimulusId> ids = pairs.stimulus_ids();
  require(n_test_stimuli < ids.size(), ErrorKind::config,
          "cannot hold out " + std::to_string(n_test_stimuli) + " of " + std::to_string(ids.size()) + " stimuli");

  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first n_test_stimuli entries form a uniform sample.
  for (std::size_t i = 0; i < n_test_stimuli; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, ids.size() - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  std::vector<StimulusId> test_ids(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_test_stimuli));
  std::sort(test_ids.begin(), test_ids.end());
  const std::set<StimulusId> held(test_ids.begin(), test_ids.end());

  TrainTestSplit split;
  split.train = PairSet{pairs.embed_dim, pairs.voxel_dim, pairs.standardized, {}};
  split.test = PairSet{pairs.embed_dim, pairs.voxel_dim, pairs.standardized, {}};
  split.test_stimuli = std::move(test_ids);
  for (const auto& r : pairs.records) (held.contains(r.stimulus_id) ? split.test : split.train).records.push_back(r);
  return split;
}

}  // namespace ndecode
