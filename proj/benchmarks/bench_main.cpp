#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ndecode/encoder.hpp"
#include "ndecode/losses.hpp"
#include "ndecode/retrieval.hpp"
#include "ndecode/similarity.hpp"

namespace {

using namespace ndecode;

RowMatrix random_rows(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  RowMatrix m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

void BM_MlpForwardBackward(benchmark::State& state) {
  const auto width = static_cast<std::size_t>(state.range(0));
  const auto params = init_params({2048, width, 512}, 1);
  const RowMatrix x = random_rows(100, 2048, 2);
  const RowMatrix upstream = random_rows(100, 512, 3);
  for (auto _ : state) {
    const auto trace = mlp_forward_trace(params, x);
    benchmark::DoNotOptimize(mlp_backward(params, trace, upstream));
  }
}
BENCHMARK(BM_MlpForwardBackward)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ClipLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RowMatrix image = random_rows(n, 512, 4), brain = random_rows(n, 512, 5);
  for (auto _ : state) benchmark::DoNotOptimize(clip_loss(image, brain, 0.05));
}
BENCHMARK(BM_ClipLoss)->Arg(100)->Arg(300);

void BM_SoftClipLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const RowMatrix p = normalize_rows(random_rows(n, 512, 6)), t = normalize_rows(random_rows(n, 512, 7));
  LossConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(softclip_loss(p, t, config));
}
BENCHMARK(BM_SoftClipLoss)->Arg(100)->Arg(300);

void BM_EvalTopk(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<StimulusId> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<StimulusId>(i);
  const Gallery gallery(ids, random_rows(n, 512, 8));
  const RowMatrix queries = random_rows(n, 512, 9);
  for (auto _ : state) benchmark::DoNotOptimize(eval_topk(queries, ids, gallery));
}
BENCHMARK(BM_EvalTopk)->Arg(100)->Arg(1000);

void BM_RankCredit(benchmark::State& state) {
  const auto n_candidates = static_cast<std::size_t>(state.range(0));
  auto responses = [](SubjectId id, std::uint64_t seed) {
    SubjectResponses r;
    r.subject_id = id;
    const RowMatrix m = random_rows(200, 512, seed);
    for (Eigen::Index i = 0; i < m.rows(); ++i) r.by_stimulus[static_cast<StimulusId>(i)] = m.row(i).transpose();
    return r;
  };
  const auto target = responses(0, 10);
  std::vector<SubjectResponses> candidates;
  for (std::size_t c = 1; c <= n_candidates; ++c) candidates.push_back(responses(static_cast<SubjectId>(c), 10 + c));
  for (auto _ : state) benchmark::DoNotOptimize(rank_credit(target, candidates, 10));
}
BENCHMARK(BM_RankCredit)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
