#include "ndecode/retrieval.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "ndecode/error.hpp"
#include "ndecode/losses.hpp"

namespace ndecode {

namespace {

Eigen::VectorXd similarities(const Eigen::Ref<const Eigen::RowVectorXd>& query, const Gallery& gallery) {
  require(query.size() == gallery.embeddings().cols(), ErrorKind::shape,
          "query length " + std::to_string(query.size()) + " does not match gallery dim " +
              std::to_string(gallery.embeddings().cols()));
  const double norm = query.norm();
  require(norm > 0.0, ErrorKind::degenerate, "query has zero norm");
  return gallery.embeddings() * (query.transpose() / norm);
}

// 1-based rank of gallery row `pos` under (similarity desc, id asc).
std::size_t rank_of(const Eigen::VectorXd& sims, const std::vector<StimulusId>& ids, std::size_t pos) {
  const double s = sims[static_cast<Eigen::Index>(pos)];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < ids.size(); ++j) {
    const double sj = sims[static_cast<Eigen::Index>(j)];
    if (sj > s || (sj == s && ids[j] < ids[pos])) ++rank;
  }
  return rank;
}

}  // namespace

Gallery::Gallery(std::vector<StimulusId> ids, const EmbeddingBatch& embeddings)
    : ids_(std::move(ids)), rows_(normalize_rows(embeddings)) {
  require(ids_.size() == static_cast<std::size_t>(rows_.rows()), ErrorKind::shape,
          "gallery has " + std::to_string(ids_.size()) + " ids for " + std::to_string(rows_.rows()) + " rows");
  const std::set<StimulusId> unique(ids_.begin(), ids_.end());
  require(unique.size() == ids_.size(), ErrorKind::data, "gallery ids must be unique");
}

std::size_t Gallery::find(StimulusId id) const {
  return static_cast<std::size_t>(std::find(ids_.begin(), ids_.end(), id) - ids_.begin());
}

Gallery Gallery::subset(const std::vector<std::size_t>& positions) const {
  Gallery g;
  g.rows_.resize(static_cast<Eigen::Index>(positions.size()), rows_.cols());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    g.ids_.push_back(ids_.at(positions[i]));
    g.rows_.row(static_cast<Eigen::Index>(i)) = rows_.row(static_cast<Eigen::Index>(positions[i]));
  }
  return g;
}

std::vector<StimulusId> retrieve_topk(const Vector& query, const Gallery& gallery, std::size_t k) {
  require(k <= gallery.size(), ErrorKind::config,
          "k = " + std::to_string(k) + " exceeds gallery size " + std::to_string(gallery.size()));
  const Eigen::VectorXd sims = similarities(query.transpose(), gallery);
  std::vector<std::size_t> order(gallery.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& ids = gallery.ids();
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = sims[static_cast<Eigen::Index>(a)];
                      const double sb = sims[static_cast<Eigen::Index>(b)];
                      return sa != sb ? sa > sb : ids[a] < ids[b];
                    });
  std::vector<StimulusId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(ids[order[i]]);
  return out;
}

double RetrievalReport::accuracy(std::size_t k) const {
  if (ranks.empty()) return 0.0;
  const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
  return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

RetrievalReport eval_topk(const EmbeddingBatch& queries, const std::vector<StimulusId>& true_ids,
                          const Gallery& gallery, const std::vector<std::size_t>& ks) {
  require(static_cast<std::size_t>(queries.rows()) == true_ids.size(), ErrorKind::shape,
          "eval_topk: " + std::to_string(queries.rows()) + " queries for " + std::to_string(true_ids.size()) + " ids");
  require(gallery.size() >= 1, ErrorKind::data, "eval_topk: empty gallery");
  RetrievalReport report;
  report.ranks.reserve(true_ids.size());
  for (std::size_t q = 0; q < true_ids.size(); ++q) {
    const std::size_t pos = gallery.find(true_ids[q]);
    require(pos < gallery.size(), ErrorKind::data,
            "true stimulus " + std::to_string(true_ids[q]) + " is not in the gallery");
    const Eigen::VectorXd sims = similarities(queries.row(static_cast<Eigen::Index>(q)), gallery);
    report.ranks.push_back(rank_of(sims, gallery.ids(), pos));
  }
  report.top1 = report.accuracy(1);
  report.top3 = report.accuracy(3);
  for (std::size_t k : ks) {
    require(k >= 1, ErrorKind::config, "top-k cut-offs must be at least 1");
    report.accuracy_at.emplace_back(k, report.accuracy(k));
  }
  return report;
}

SubsampleReport eval_subsample(const EmbeddingBatch& queries, const std::vector<StimulusId>& true_ids,
                               const Gallery& gallery, std::size_t subset, std::size_t trials, std::size_t k,
                               std::uint64_t seed) {
  const std::size_t n_total = true_ids.size();
  require(subset >= 1 && subset <= n_total, ErrorKind::config,
          "subset of " + std::to_string(subset) + " from " + std::to_string(n_total) + " pairs");
  require(trials >= 1, ErrorKind::config, "eval_subsample needs at least one trial");
  require(k >= 1, ErrorKind::config, "k must be at least 1");

  std::vector<std::size_t> gallery_pos(n_total);
  for (std::size_t i = 0; i < n_total; ++i) {
    gallery_pos[i] = gallery.find(true_ids[i]);
    require(gallery_pos[i] < gallery.size(), ErrorKind::data,
            "true stimulus " + std::to_string(true_ids[i]) + " is not in the gallery");
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n_total);
  SubsampleReport report;
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < subset; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n_total - 1);
      std::swap(order[i], order[pick(rng)]);
    }
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(subset));
    std::sort(chosen.begin(), chosen.end());

    std::vector<std::size_t> positions;
    std::set<std::size_t> seen;
    EmbeddingBatch q(static_cast<Eigen::Index>(subset), queries.cols());
    std::vector<StimulusId> ids;
    for (std::size_t i = 0; i < subset; ++i) {
      q.row(static_cast<Eigen::Index>(i)) = queries.row(static_cast<Eigen::Index>(chosen[i]));
      ids.push_back(true_ids[chosen[i]]);
      if (seen.insert(gallery_pos[chosen[i]]).second) positions.push_back(gallery_pos[chosen[i]]);
    }
    const RetrievalReport r = eval_topk(q, ids, gallery.subset(positions), {});
    report.trials.push_back(r.accuracy(k));
  }
  report.mean = std::accumulate(report.trials.begin(), report.trials.end(), 0.0) / static_cast<double>(trials);
  return report;
}

Gallery gallery_from_pairs(const PairSet& pairs) {
  std::map<StimulusId, const std::vector<double>*> distinct;
  for (const auto& r : pairs.records) distinct.emplace(r.stimulus_id, &r.embedding);
  std::vector<StimulusId> ids;
  EmbeddingBatch rows(static_cast<Eigen::Index>(distinct.size()), static_cast<Eigen::Index>(pairs.embed_dim));
  Eigen::Index i = 0;
  for (const auto& [id, e] : distinct) {
    ids.push_back(id);
    rows.row(i++) = Eigen::Map<const Eigen::RowVectorXd>(e->data(), static_cast<Eigen::Index>(e->size()));
  }
  return Gallery(std::move(ids), rows);
}

RetrievalReport evaluate_encoder(const EncoderParams& params, const PairSet& pairs,
                                 const std::vector<std::size_t>& ks) {
  require(!pairs.records.empty(), ErrorKind::data, "no records to evaluate");
  const EmbeddingBatch predicted = mlp_forward(params, pairs.voxel_matrix());
  std::vector<StimulusId> ids;
  ids.reserve(pairs.records.size());
  for (const auto& r : pairs.records) ids.push_back(r.stimulus_id);
  return eval_topk(predicted, ids, gallery_from_pairs(pairs), ks);
}

}  // namespace ndecode
