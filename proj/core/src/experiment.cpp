#include "ndecode/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <random>
#include <set>
#include <thread>

#include "ndecode/error.hpp"

namespace ndecode {

namespace {

constexpr std::uint64_t kPointTag = 0x504f494e;  // "POIN"
constexpr std::uint64_t kInitTag = 0x494e4954;
constexpr std::uint64_t kPoolTag = 0x504f4f4c;

double mean_of(const std::vector<SubjectScore>& scores, bool seen, double SubjectScore::*field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : scores) {
    if (s.seen != seen) continue;
    sum += s.*field;
    ++n;
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::vector<double> grid_means(const std::vector<SweepPoint>& points, const std::vector<std::size_t>& grid,
                               double PointResult::*field) {
  std::vector<double> out;
  for (std::size_t n : grid) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& p : points) {
      if (p.n_subjects != n) continue;
      sum += p.result.*field;
      ++count;
    }
    out.push_back(count == 0 ? 0.0 : sum / static_cast<double>(count));
  }
  return out;
}

}  // namespace

std::vector<SubjectScore> score_subjects(const EncoderParams& params, const PairSet& test,
                                         const std::vector<SubjectId>& subjects, bool seen) {
  std::vector<SubjectScore> out;
  for (SubjectId s : subjects) {
    const PairSet mine = test.filter_subjects({s});
    require(!mine.records.empty(), ErrorKind::data, "no test records for subject " + std::to_string(s));
    const RetrievalReport r = evaluate_encoder(params, mine);
    out.push_back({s, seen, r.top1, r.top3, r.n_queries()});
  }
  return out;
}

double mean_top1(const std::vector<SubjectScore>& scores, bool seen) { return mean_of(scores, seen, &SubjectScore::top1); }
double mean_top3(const std::vector<SubjectScore>& scores, bool seen) { return mean_of(scores, seen, &SubjectScore::top3); }

std::vector<std::size_t> encoder_dims(std::size_t voxel_dim, const std::vector<std::size_t>& hidden,
                                      std::size_t embed_dim) {
  std::vector<std::size_t> dims{voxel_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(embed_dim);
  return dims;
}

PointResult run_generalization_point(const PairSet& train, const PairSet& test,
                                     const std::vector<SubjectId>& train_subjects,
                                     const std::vector<SubjectId>& unseen_subjects,
                                     const std::vector<std::size_t>& hidden, const TrainConfig& config,
                                     std::uint64_t init_seed) {
  require(!train_subjects.empty(), ErrorKind::config, "no training subjects");
  const std::set<SubjectId> seen(train_subjects.begin(), train_subjects.end());
  for (SubjectId u : unseen_subjects)
    require(!seen.contains(u), ErrorKind::config, "subject " + std::to_string(u) + " is both seen and unseen");

  const PairSet train_subset = train.filter_subjects(train_subjects);
  require(!train_subset.records.empty(), ErrorKind::data, "training subjects have no training records");
  const EncoderParams init = init_params(encoder_dims(train.voxel_dim, hidden, train.embed_dim), init_seed);

  PointResult out;
  out.train_subjects = train_subjects;
  TrainResult trained = ndecode::train(train_subset, PairSet{}, init, config);
  out.params = std::move(trained.params);
  out.history = std::move(trained.history);

  out.scores = score_subjects(out.params, test, train_subjects, true);
  const auto unseen_scores = score_subjects(out.params, test, unseen_subjects, false);
  out.scores.insert(out.scores.end(), unseen_scores.begin(), unseen_scores.end());
  out.seen_top1 = mean_top1(out.scores, true);
  out.seen_top3 = mean_top3(out.scores, true);
  out.unseen_top1 = mean_top1(out.scores, false);
  out.unseen_top3 = mean_top3(out.scores, false);
  return out;
}

TrainConfig point_train_config(const TrainConfig& base, std::size_t n_subjects, std::uint64_t seed) {
  TrainConfig c = base;
  c.seed = derive_seed(seed, kPointTag, n_subjects);
  return c;
}

std::uint64_t point_init_seed(std::size_t n_subjects, std::uint64_t seed) {
  return derive_seed(seed, kInitTag, n_subjects);
}

std::vector<SubjectId> point_subjects(const std::vector<SubjectId>& pool, std::size_t n_subjects, std::uint64_t seed,
                                      bool shuffle) {
  require(n_subjects >= 1 && n_subjects <= pool.size(), ErrorKind::config,
          "cannot train on " + std::to_string(n_subjects) + " of " + std::to_string(pool.size()) + " seen subjects");
  std::vector<SubjectId> order = pool;
  if (shuffle) {
    std::mt19937_64 rng(derive_seed(seed, kPoolTag));
    std::shuffle(order.begin(), order.end(), rng);
  }
  order.resize(n_subjects);
  return order;
}

void parallel_for(std::size_t jobs, std::size_t threads, const std::function<void(std::size_t)>& body) {
  threads = std::max<std::size_t>(1, std::min(threads, jobs));
  if (threads == 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < jobs; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::vector<SweepPoint> run_count_sweep(const PairSet& train, const PairSet& test, const CountSweepConfig& config) {
  require(!config.grid.empty() && !config.seeds.empty(), ErrorKind::config, "sweep grid and seeds must be non-empty");
  require(!config.unseen.empty(), ErrorKind::config, "sweep needs at least one unseen subject");
  std::vector<SweepPoint> points;
  for (std::size_t n : config.grid)
    for (std::uint64_t seed : config.seeds) points.push_back({n, seed, {}});

  parallel_for(points.size(), config.threads, [&](std::size_t i) {
    auto& p = points[i];
    const auto subjects = point_subjects(config.seen_pool, p.n_subjects, p.seed, config.shuffle_pool);
    p.result = run_generalization_point(train, test, subjects, config.unseen, config.hidden,
                                        point_train_config(config.train, p.n_subjects, p.seed),
                                        point_init_seed(p.n_subjects, p.seed));
  });
  return points;
}

std::vector<double> mean_unseen_top1(const std::vector<SweepPoint>& points, const std::vector<std::size_t>& grid) {
  return grid_means(points, grid, &PointResult::unseen_top1);
}

std::vector<double> mean_seen_top1(const std::vector<SweepPoint>& points, const std::vector<std::size_t>& grid) {
  return grid_means(points, grid, &PointResult::seen_top1);
}

}  // namespace ndecode
