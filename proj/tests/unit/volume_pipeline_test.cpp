#include "ndecode/volume_pipeline.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "ndecode/error.hpp"

namespace ndecode {
namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an ndecode::Error";
  return ErrorKind::io;
}

VolumeSeries scalar_series(SubjectId subject, const std::vector<double>& per_tr, GridDims dims = {2, 2, 2}) {
  VolumeSeries s;
  s.subject_id = subject;
  for (double v : per_tr) s.grids.emplace_back(dims, v);
  return s;
}

VolumeSeries random_series(SubjectId subject, std::size_t n_trs, GridDims dims, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  VolumeSeries s;
  s.subject_id = subject;
  for (std::size_t t = 0; t < n_trs; ++t) {
    VoxelGrid g(dims);
    for (double& v : g.values) v = normal(rng);
    s.grids.push_back(std::move(g));
  }
  return s;
}

EmbeddingTable identity_embeddings(std::size_t n, std::size_t dim) {
  EmbeddingTable t;
  for (std::size_t i = 1; i <= n; ++i) {
    std::vector<double> e(dim, 0.0);
    e[i % dim] = 1.0;
    t[static_cast<StimulusId>(i)] = e;
  }
  return t;
}

TEST(PairSchedule, TenTrsWindowFive) {
  const auto s = pair_schedule(10, 5);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s.front(), (ScheduleEntry{1, 1, 5}));
  EXPECT_EQ(s.back(), (ScheduleEntry{6, 6, 10}));
}

TEST(PairSchedule, MinimalSeries) {
  const auto s = pair_schedule(5, 5);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0], (ScheduleEntry{1, 1, 5}));
}

TEST(PairSchedule, TooShortIsAnError) {
  EXPECT_EQ(kind_of([] { pair_schedule(4, 5); }), ErrorKind::data);
}

TEST(PairSchedule, CountIdentity) {
  for (std::uint32_t len = 1; len <= 8; ++len)
    for (std::uint32_t n = len; n <= 40; ++n) EXPECT_EQ(pair_schedule(n, len).size(), n - len + 1);
}

TEST(PairSchedule, OffsetShiftsWindow) {
  const auto s = pair_schedule(10, 4, 1);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_EQ(s.front(), (ScheduleEntry{1, 2, 5}));
  EXPECT_EQ(s.back(), (ScheduleEntry{6, 7, 10}));
}

TEST(AverageWindow, ConstantSeries) {
  const auto s = scalar_series(1, std::vector<double>(7, 2.5));
  const auto g = average_window(s, 2, 5);
  for (double v : g.values) EXPECT_EQ(v, 2.5);
}

TEST(AverageWindow, ArithmeticMean) {
  const auto s = scalar_series(1, {1, 2, 3, 4, 5}, {3, 1, 2});
  const auto g = average_window(s, 1, 5);
  EXPECT_EQ(g.dims, (GridDims{3, 1, 2}));
  for (double v : g.values) EXPECT_DOUBLE_EQ(v, 3.0);
}

TEST(AverageWindow, OutOfRange) {
  const auto s = scalar_series(1, {1, 2, 3, 4, 5});
  EXPECT_EQ(kind_of([&] { average_window(s, 2, 5); }), ErrorKind::range);
  EXPECT_EQ(kind_of([&] { average_window(s, 0, 2); }), ErrorKind::range);
  EXPECT_EQ(kind_of([&] { average_window(s, 1, 5, 1); }), ErrorKind::range);
}

TEST(AverageWindow, Linearity) {
  std::mt19937_64 rng(5);
  const GridDims dims{3, 4, 2};
  const auto s1 = random_series(1, 9, dims, rng);
  const auto s2 = random_series(1, 9, dims, rng);
  const double a = 1.7, b = -0.4;
  VolumeSeries mixed = s1;
  for (std::size_t t = 0; t < mixed.grids.size(); ++t)
    for (std::size_t i = 0; i < dims.count(); ++i)
      mixed.grids[t].values[i] = a * s1.grids[t].values[i] + b * s2.grids[t].values[i];

  for (std::uint32_t t = 1; t <= 5; ++t) {
    const auto lhs = average_window(mixed, t, 5);
    const auto g1 = average_window(s1, t, 5);
    const auto g2 = average_window(s2, t, 5);
    for (std::size_t i = 0; i < dims.count(); ++i) {
      const double rhs = a * g1.values[i] + b * g2.values[i];
      EXPECT_NEAR(lhs.values[i], rhs, 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST(Resample, OnesStayOnes) {
  const auto out = resample_trilinear(VoxelGrid({2, 2, 2}, 1.0), {4, 4, 4});
  EXPECT_EQ(out.dims, (GridDims{4, 4, 4}));
  for (double v : out.values) EXPECT_EQ(v, 1.0);
}

TEST(Resample, RampAlongX) {
  const auto out = resample_trilinear(VoxelGrid({2, 1, 1}, {0.0, 1.0}), {3, 1, 1});
  ASSERT_EQ(out.values.size(), 3u);
  EXPECT_EQ(out.values[0], 0.0);
  EXPECT_EQ(out.values[1], 0.5);
  EXPECT_EQ(out.values[2], 1.0);
}

TEST(Resample, IdentityIsBitExact) {
  std::mt19937_64 rng(1);
  const auto s = random_series(1, 1, {5, 3, 4}, rng);
  const auto out = resample_trilinear(s.grids[0], {5, 3, 4});
  EXPECT_EQ(out.values, s.grids[0].values);
}

TEST(Resample, SingletonAxisReplicates) {
  const auto out = resample_trilinear(VoxelGrid({1, 2, 1}, {3.0, 7.0}), {4, 2, 3});
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      EXPECT_EQ(out.at(i, 0, k), 3.0);
      EXPECT_EQ(out.at(i, 1, k), 7.0);
    }
}

TEST(Resample, ZeroTargetIsConfigError) {
  EXPECT_EQ(kind_of([] { resample_trilinear(VoxelGrid({2, 2, 2}, 1.0), {0, 2, 2}); }), ErrorKind::config);
}

TEST(Resample, AffineFieldsAreReproduced) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  std::uniform_int_distribution<std::uint32_t> dim(1, 7);
  for (int trial = 0; trial < 50; ++trial) {
    const GridDims in{dim(rng), dim(rng), dim(rng)};
    const GridDims out{dim(rng), dim(rng), dim(rng)};
    const double al = coef(rng), be = coef(rng), ga = coef(rng), de = coef(rng);
    // Field in normalised coordinates u = i/(n-1); a singleton axis contributes nothing.
    auto coord = [](std::size_t i, std::uint32_t n) { return n == 1 ? 0.0 : static_cast<double>(i) / (n - 1); };
    VoxelGrid g(in);
    for (std::size_t i = 0; i < in.x; ++i)
      for (std::size_t j = 0; j < in.y; ++j)
        for (std::size_t k = 0; k < in.z; ++k)
          g.at(i, j, k) = al * coord(i, in.x) + be * coord(j, in.y) + ga * coord(k, in.z) + de;
    const auto r = resample_trilinear(g, out);
    for (std::size_t i = 0; i < out.x; ++i)
      for (std::size_t j = 0; j < out.y; ++j)
        for (std::size_t k = 0; k < out.z; ++k) {
          const double expect = (in.x == 1 ? 0.0 : al * coord(i, out.x)) + (in.y == 1 ? 0.0 : be * coord(j, out.y)) +
                                (in.z == 1 ? 0.0 : ga * coord(k, out.z)) + de;
          ASSERT_NEAR(r.at(i, j, k), expect, 1e-10);
        }
  }
}

TEST(Resample, StaysWithinInputBounds) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> dim(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_series(1, 1, {dim(rng), dim(rng), dim(rng)}, rng);
    const auto& g = s.grids[0];
    const auto [lo, hi] = std::minmax_element(g.values.begin(), g.values.end());
    const auto r = resample_trilinear(g, {dim(rng), dim(rng), dim(rng)});
    for (double v : r.values) {
      EXPECT_GE(v, *lo - 1e-12);
      EXPECT_LE(v, *hi + 1e-12);
    }
  }
}

TEST(Standardize, ZeroMeanUnitStd) {
  std::vector<double> v{1, 2, 3, 4, 10};
  standardize_in_place(v);
  double mean = 0, sq = 0;
  for (double x : v) mean += x;
  mean /= v.size();
  for (double x : v) sq += (x - mean) * (x - mean);
  EXPECT_NEAR(mean, 0.0, 1e-12);
  EXPECT_NEAR(std::sqrt(sq / v.size()), 1.0, 1e-6);
}

TEST(Standardize, ConstantVectorBecomesZero) {
  std::vector<double> v(6, 4.0);
  standardize_in_place(v);
  for (double x : v) EXPECT_EQ(x, 0.0);
}

TEST(BuildPairs, TwoSubjectsTenTrs) {
  std::mt19937_64 rng(2);
  const std::vector<VolumeSeries> series{random_series(1, 10, {2, 2, 2}, rng), random_series(2, 10, {2, 2, 2}, rng)};
  PairingConfig cfg;
  cfg.target_dims = {2, 2, 2};
  const auto pairs = build_pairs(series, identity_embeddings(6, 4), cfg);
  EXPECT_EQ(pairs.records.size(), 12u);
  EXPECT_EQ(pairs.voxel_dim, 8u);
  EXPECT_EQ(pairs.embed_dim, 4u);
  EXPECT_TRUE(pairs.standardized);
  EXPECT_EQ(pairs.subject_ids(), (std::vector<SubjectId>{1, 2}));
  EXPECT_EQ(pairs.stimulus_ids().size(), 6u);
}

TEST(BuildPairs, RecordIsResampledWindowAverage) {
  std::mt19937_64 rng(9);
  const auto s = random_series(4, 8, {2, 3, 2}, rng);
  PairingConfig cfg;
  cfg.target_dims = {3, 3, 4};
  cfg.standardize = false;
  const auto pairs = build_pairs({s}, identity_embeddings(4, 3), cfg);
  ASSERT_EQ(pairs.records.size(), 4u);
  for (const auto& rec : pairs.records) {
    const auto expect = resample_trilinear(average_window(s, rec.stimulus_id, 5), cfg.target_dims);
    EXPECT_EQ(rec.voxels, expect.values);
    EXPECT_EQ(rec.subject_id, 4u);
  }
}

TEST(BuildPairs, ConstantSeriesGivesIdenticalRecords) {
  const auto s = scalar_series(1, std::vector<double>(9, 1.25));
  PairingConfig cfg;
  cfg.target_dims = {3, 3, 3};
  cfg.standardize = false;
  const auto pairs = build_pairs({s}, identity_embeddings(5, 2), cfg);
  ASSERT_EQ(pairs.records.size(), 5u);
  for (const auto& rec : pairs.records) EXPECT_EQ(rec.voxels, pairs.records[0].voxels);
}

TEST(BuildPairs, MissingEmbeddingIsDataError) {
  auto table = identity_embeddings(6, 3);
  table.erase(3);
  PairingConfig cfg;
  cfg.target_dims = {2, 2, 2};
  const auto s = scalar_series(1, std::vector<double>(10, 1.0));
  EXPECT_EQ(kind_of([&] { build_pairs({s}, table, cfg); }), ErrorKind::data);
}

TEST(BuildPairs, MismatchedGridDimsIsDataError) {
  auto s = scalar_series(1, std::vector<double>(6, 1.0));
  s.grids[3] = VoxelGrid({2, 2, 3}, 1.0);
  PairingConfig cfg;
  cfg.target_dims = {2, 2, 2};
  EXPECT_EQ(kind_of([&] { build_pairs({s}, identity_embeddings(2, 2), cfg); }), ErrorKind::data);
}

TEST(BuildPairs, MixedTrIsDataError) {
  auto a = scalar_series(1, std::vector<double>(6, 1.0));
  auto b = scalar_series(2, std::vector<double>(6, 1.0));
  b.tr_seconds = 2.0;
  PairingConfig cfg;
  cfg.target_dims = {2, 2, 2};
  EXPECT_EQ(kind_of([&] { build_pairs({a, b}, identity_embeddings(2, 2), cfg); }), ErrorKind::data);
}

PairSet synthetic_pairs(std::size_t n_subjects, std::size_t n_stimuli) {
  PairSet p;
  p.embed_dim = 2;
  p.voxel_dim = 3;
  for (SubjectId s = 1; s <= n_subjects; ++s)
    for (StimulusId i = 1; i <= n_stimuli; ++i)
      p.records.push_back({i, s, {double(i), 0.0}, {double(s), double(i), 1.0}});
  return p;
}

TEST(Split, DeterministicAndDisjoint) {
  const auto pairs = synthetic_pairs(3, 40);
  const auto a = split_train_test(pairs, 10, 77);
  const auto b = split_train_test(pairs, 10, 77);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_EQ(a.test_stimuli, b.test_stimuli);

  const auto train_ids = a.train.stimulus_ids();
  const auto test_ids = a.test.stimulus_ids();
  EXPECT_EQ(test_ids, a.test_stimuli);
  EXPECT_EQ(test_ids.size(), 10u);
  EXPECT_EQ(train_ids.size(), 30u);
  std::vector<StimulusId> both;
  std::set_intersection(train_ids.begin(), train_ids.end(), test_ids.begin(), test_ids.end(),
                        std::back_inserter(both));
  EXPECT_TRUE(both.empty());
  EXPECT_EQ(a.train.records.size() + a.test.records.size(), pairs.records.size());
}

TEST(Split, EverySubjectSharesTheTestImages) {
  const auto pairs = synthetic_pairs(2, 25);
  const auto split = split_train_test(pairs, 7, 3);
  EXPECT_EQ(split.test.records.size(), 14u);
  for (StimulusId id : split.test_stimuli) {
    const auto n = std::count_if(split.test.records.begin(), split.test.records.end(),
                                 [&](const PairRecord& r) { return r.stimulus_id == id; });
    EXPECT_EQ(n, 2);
  }
}

TEST(Split, HundredOfThreeThousand) {
  PairSet p;
  p.embed_dim = 1;
  p.voxel_dim = 1;
  for (StimulusId i = 1; i <= 3127; ++i) p.records.push_back({i, 1, {0.0}, {0.0}});
  const auto split = split_train_test(p, 100, 0);
  EXPECT_EQ(split.train.filter_subjects({1}).records.size(), 3027u);
  EXPECT_EQ(split.test.records.size(), 100u);
}

TEST(Split, SeedChangesSelection) {
  const auto pairs = synthetic_pairs(1, 50);
  EXPECT_NE(split_train_test(pairs, 10, 1).test_stimuli, split_train_test(pairs, 10, 2).test_stimuli);
}

TEST(Split, TooManyTestStimuli) {
  const auto pairs = synthetic_pairs(2, 5);
  EXPECT_EQ(kind_of([&] { split_train_test(pairs, 5, 0); }), ErrorKind::config);
}

TEST(PairSet, ValidateRejectsDuplicates) {
  auto p = synthetic_pairs(1, 3);
  p.records.push_back(p.records[0]);
  EXPECT_EQ(kind_of([&] { p.validate(); }), ErrorKind::data);
}

}  // namespace
}  // namespace ndecode
