#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "ndecode/types.hpp"
#include "ndecode/volume_pipeline.hpp"

namespace ndecode {

struct SubjectResponses {
  SubjectId subject_id = 0;
  std::map<StimulusId, Vector> by_stimulus;
};

/// Groups a pair set's voxels per subject.
std::vector<SubjectResponses> responses_by_subject(const PairSet& pairs);

/// Cosine similarity of two subjects' responses to the same image.
double sim_score(const Vector& a, const Vector& b);

struct RankCreditTable {
  SubjectId target_id = 0;
  std::map<SubjectId, std::uint64_t> credits;  // every candidate, including zero-credit ones
  std::size_t n_images = 0;
  std::size_t top_k = 10;

  std::uint64_t total() const;
  /// (subject, credits) sorted by credits descending, ties by ascending subject id.
  std::vector<std::pair<SubjectId, std::uint64_t>> ranked() const;
};

/// For every shared image, ranks candidates by sim_score against the target (ties: smaller id first)
/// and gives one credit to each of the first top_k.
RankCreditTable rank_credit(const SubjectResponses& target, const std::vector<SubjectResponses>& candidates,
                            std::size_t top_k = 10);

/// Mean sim_score over the shared images; the non-default alternative to rank credits.
std::map<SubjectId, double> mean_similarity(const SubjectResponses& target,
                                            const std::vector<SubjectResponses>& candidates);

enum class SelectionMode { most_similar, least_similar };

std::vector<SubjectId> select_subjects(const RankCreditTable& table, std::size_t n, SelectionMode mode);

}  // namespace ndecode
