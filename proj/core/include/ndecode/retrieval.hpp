#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ndecode/encoder.hpp"
#include "ndecode/types.hpp"
#include "ndecode/volume_pipeline.hpp"

namespace ndecode {

/// Retrieval candidates; rows are unit-normalized at construction.
class Gallery {
 public:
  Gallery() = default;
  Gallery(std::vector<StimulusId> ids, const EmbeddingBatch& embeddings);

  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<StimulusId>& ids() const noexcept { return ids_; }
  const EmbeddingBatch& embeddings() const noexcept { return rows_; }

  /// Row position of `id`, or size() when absent.
  std::size_t find(StimulusId id) const;

  /// Gallery restricted to the given row positions, in that order.
  Gallery subset(const std::vector<std::size_t>& positions) const;

 private:
  std::vector<StimulusId> ids_;
  EmbeddingBatch rows_;
};

/// Top-k ids by descending cosine similarity; exact ties go to the smaller id.
std::vector<StimulusId> retrieve_topk(const Vector& query, const Gallery& gallery, std::size_t k);

struct RetrievalReport {
  double top1 = 0.0;
  double top3 = 0.0;
  std::vector<std::pair<std::size_t, double>> accuracy_at;  // (k, accuracy) for every requested k
  std::vector<std::size_t> ranks;                           // 1-based rank of each query's true id
  std::vector<double> trials;                               // filled by eval_subsample

  std::size_t n_queries() const noexcept { return ranks.size(); }
  double accuracy(std::size_t k) const;  // from ranks, any k
};

/// Top-k accuracy of `queries` (one row per query) against the gallery. top1 and top3 are always
/// filled (k clipped to the gallery size); `ks` adds further cut-offs.
RetrievalReport eval_topk(const EmbeddingBatch& queries, const std::vector<StimulusId>& true_ids,
                          const Gallery& gallery, const std::vector<std::size_t>& ks = {1, 3});

struct SubsampleReport {
  double mean = 0.0;
  std::vector<double> trials;
};

/// Repeats `trials` times: pick `subset` of the n query/gallery pairs without replacement, restrict the
/// gallery to their ids, and score top-k. Query i is paired with the gallery item of true_ids[i].
SubsampleReport eval_subsample(const EmbeddingBatch& queries, const std::vector<StimulusId>& true_ids,
                               const Gallery& gallery, std::size_t subset, std::size_t trials, std::size_t k,
                               std::uint64_t seed);

/// Gallery of the distinct stimuli in a pair set, ordered by stimulus id.
Gallery gallery_from_pairs(const PairSet& pairs);

/// Encodes every record's voxels and scores them against gallery_from_pairs(pairs).
RetrievalReport evaluate_encoder(const EncoderParams& params, const PairSet& pairs,
                                 const std::vector<std::size_t>& ks = {1, 3});

}  // namespace ndecode
