#include "ndecode/similarity.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <string>

#include "ndecode/error.hpp"
#include "ndecode/losses.hpp"

namespace ndecode {

namespace {

void check_shared_stimuli(const SubjectResponses& target, const std::vector<SubjectResponses>& candidates) {
  require(!target.by_stimulus.empty(), ErrorKind::data, "target subject has no responses");
  std::set<SubjectId> ids;
  for (const auto& c : candidates) {
    require(c.subject_id != target.subject_id, ErrorKind::data,
            "target subject " + std::to_string(target.subject_id) + " is listed as a candidate");
    require(ids.insert(c.subject_id).second, ErrorKind::data,
            "candidate " + std::to_string(c.subject_id) + " appears twice");
    require(c.by_stimulus.size() == target.by_stimulus.size(), ErrorKind::data,
            "candidate " + std::to_string(c.subject_id) + " does not share the target's stimulus set");
    for (const auto& [stim, v] : target.by_stimulus) {
      const auto it = c.by_stimulus.find(stim);
      require(it != c.by_stimulus.end(), ErrorKind::data,
              "candidate " + std::to_string(c.subject_id) + " has no response to stimulus " + std::to_string(stim));
      require(it->second.size() == v.size(), ErrorKind::shape,
              "candidate " + std::to_string(c.subject_id) + " response length differs from the target");
    }
  }
}

}  // namespace

std::vector<SubjectResponses> responses_by_subject(const PairSet& pairs) {
  std::map<SubjectId, SubjectResponses> grouped;
  for (const auto& r : pairs.records) {
    auto& s = grouped[r.subject_id];
    s.subject_id = r.subject_id;
    s.by_stimulus[r.stimulus_id] =
        Eigen::Map<const Vector>(r.voxels.data(), static_cast<Eigen::Index>(r.voxels.size()));
  }
  std::vector<SubjectResponses> out;
  for (auto& [id, s] : grouped) out.push_back(std::move(s));
  return out;
}

double sim_score(const Vector& a, const Vector& b) { return cosine_sim(a, b); }

std::uint64_t RankCreditTable::total() const {
  std::uint64_t t = 0;
  for (const auto& [id, c] : credits) t += c;
  return t;
}

std::vector<std::pair<SubjectId, std::uint64_t>> RankCreditTable::ranked() const {
  std::vector<std::pair<SubjectId, std::uint64_t>> out(credits.begin(), credits.end());
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return out;
}

RankCreditTable rank_credit(const SubjectResponses& target, const std::vector<SubjectResponses>& candidates,
                            std::size_t top_k) {
  require(top_k >= 1, ErrorKind::config, "top_k must be at least 1");
  check_shared_stimuli(target, candidates);

  RankCreditTable table;
  table.target_id = target.subject_id;
  table.n_images = target.by_stimulus.size();
  table.top_k = top_k;
  for (const auto& c : candidates) table.credits[c.subject_id] = 0;
  if (candidates.empty()) return table;

  const std::size_t awarded = std::min(top_k, candidates.size());
  std::vector<std::pair<double, SubjectId>> scores(candidates.size());
  for (const auto& [stim, v_target] : target.by_stimulus) {
    for (std::size_t c = 0; c < candidates.size(); ++c)
      scores[c] = {sim_score(v_target, candidates[c].by_stimulus.at(stim)), candidates[c].subject_id};
    std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(awarded), scores.end(),
                      [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
    for (std::size_t r = 0; r < awarded; ++r) ++table.credits[scores[r].second];
  }
  return table;
}

std::map<SubjectId, double> mean_similarity(const SubjectResponses& target,
                                            const std::vector<SubjectResponses>& candidates) {
  check_shared_stimuli(target, candidates);
  std::map<SubjectId, double> out;
  for (const auto& c : candidates) {
    double sum = 0.0;
    for (const auto& [stim, v] : target.by_stimulus) sum += sim_score(v, c.by_stimulus.at(stim));
    out[c.subject_id] = sum / static_cast<double>(target.by_stimulus.size());
  }
  return out;
}

std::vector<SubjectId> select_subjects(const RankCreditTable& table, std::size_t n, SelectionMode mode) {
  require(n <= table.credits.size(), ErrorKind::config,
          "cannot select " + std::to_string(n) + " of " + std::to_string(table.credits.size()) + " candidates");
  std::vector<std::pair<SubjectId, std::uint64_t>> order(table.credits.begin(), table.credits.end());
  if (mode == SelectionMode::most_similar) {
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  } else {
    std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  }
  std::vector<SubjectId> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(order[i].first);
  return out;
}

}  // namespace ndecode
