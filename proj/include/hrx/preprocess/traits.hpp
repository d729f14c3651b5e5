#pragma once
// Trait questionnaire scoring: reverse coding, per-participant mean
// imputation, and item-sum aggregation. Imputation never looks outside the
// participant's own responses.

#include <map>
#include <string>
#include <vector>

#include "hrx/core/types.hpp"

namespace hrx {

struct TraitScoringReport {
  long imputed_items = 0;
  std::vector<ScaleId> unresolved;  // scales with every item missing
};

// Order of operations: (1) reverse-code flagged items
// (value -> item_min + item_max - value), (2) impute each missing item with
// the mean of the participant's remaining reverse-coded items on the same
// scale, (3) aggregate each scale as the item sum.
inline TraitProfile impute_and_score_traits(
    const std::vector<TraitItemResponse>& items,
    const std::map<ScaleId, ScaleDecl>& scales, TraitScoringReport* report = nullptr) {
  TraitProfile profile;
  for (const auto& [sid, decl] : scales) {
    double sum_valid = 0;
    long n_valid = 0;
    long n_missing = 0;
    for (const auto& item : items) {
      if (item.scale != sid) continue;
      if (!item.value) {
        ++n_missing;
        continue;
      }
      double v = *item.value;
      if (item.reverse_scored) v = decl.item_min + decl.item_max - v;
      sum_valid += v;
      ++n_valid;
    }
    if (n_valid == 0) {
      if (report) report->unresolved.push_back(sid);
      continue;
    }
    const double mean = sum_valid / static_cast<double>(n_valid);
    if (report) report->imputed_items += n_missing;
    profile.scores[sid] = sum_valid + mean * static_cast<double>(n_missing);
  }
  return profile;
}

// Fills Participant::traits for the whole dataset; returns ids of
// participants with at least one unresolved scale.
inline std::vector<std::string> score_all_traits(Dataset& ds,
                                                 TraitScoringReport* report = nullptr) {
  std::vector<std::string> flagged;
  for (auto& p : ds.participants) {
    TraitScoringReport local;
    p.traits = impute_and_score_traits(p.trait_items, ds.scales, &local);
    if (!local.unresolved.empty()) flagged.push_back(p.id);
    if (report) {
      report->imputed_items += local.imputed_items;
      report->unresolved.insert(report->unresolved.end(), local.unresolved.begin(),
                                local.unresolved.end());
    }
  }
  return flagged;
}

}  // namespace hrx
