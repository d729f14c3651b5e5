#pragma once
// Leakage audit over the nested pipeline's outputs. Verifies that every
// record was produced for a held-out participant, that the prediction the
// meta stage consumed came from the TL fold that held that participant out,
// that fold plans are internally disjoint with single test coverage, and
// that trait selection/normalization provenance never includes a fold's test
// participants.

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hrx/eval/folds.hpp"
#include "hrx/eval/records.hpp"

namespace hrx {

struct AuditViolation {
  std::string what;
  std::string participant_id;
  double ema_t_s = 0;
  int fold_id = -1;
  std::string stage;
};

struct AuditReport {
  std::vector<AuditViolation> violations;
  long records_checked = 0;
  bool ok() const { return violations.empty(); }
};

// Per meta fold: which participants' rows fed trait selection and feature
// normalization.
struct NormalizationProvenance {
  int fold_id = -1;
  std::vector<std::string> used_participants;
};

namespace detail {

inline void check_plan(const FoldPlan& plan, const char* name,
                       AuditReport& report) {
  std::map<std::string, int> test_seen;
  for (const auto& fold : plan.folds) {
    std::set<std::string> seen;
    auto check_group = [&](const std::vector<std::string>& group, const char* g) {
      for (const auto& id : group) {
        if (!seen.insert(id).second)
          report.violations.push_back({std::string(name) + ": participant in two groups (" +
                                           g + ")",
                                       id, 0, fold.id, ""});
      }
    };
    check_group(fold.test, "test");
    check_group(fold.val, "val");
    check_group(fold.train, "train");
    for (const auto& id : fold.test) test_seen[id] += 1;
  }
  for (const auto& [id, count] : test_seen)
    if (count != 1)
      report.violations.push_back({std::string(name) + ": participant held out " +
                                       std::to_string(count) + " times",
                                   id, 0, -1, ""});
}

}  // namespace detail

inline AuditReport audit_leakage(
    const FoldPlan& tl_plan, const FoldPlan& meta_plan,
    const std::vector<PredictionRecord>& records,
    const std::vector<NormalizationProvenance>& norm_provenance = {}) {
  AuditReport report;
  detail::check_plan(tl_plan, "tl plan", report);
  detail::check_plan(meta_plan, "meta plan", report);

  std::map<std::string, int> tl_fold_of;  // participant -> TL test fold
  for (const auto& fold : tl_plan.folds)
    for (const auto& id : fold.test) tl_fold_of[id] = fold.id;
  std::map<std::string, int> meta_fold_of;
  for (const auto& fold : meta_plan.folds)
    for (const auto& id : fold.test) meta_fold_of[id] = fold.id;

  // TL probabilities by (participant, ema time), from the TL stage records.
  std::map<std::pair<std::string, double>, const PredictionRecord*> tl_by_key;
  for (const auto& rec : records)
    if (rec.stage == stage::kTl) tl_by_key[{rec.participant_id, rec.ema_t_s}] = &rec;

  for (const auto& rec : records) {
    ++report.records_checked;
    if (rec.stage == stage::kTl) {
      auto it = tl_fold_of.find(rec.participant_id);
      if (it == tl_fold_of.end() || it->second != rec.fold_id)
        report.violations.push_back({"tl record not from the participant's held-out fold",
                                     rec.participant_id, rec.ema_t_s, rec.fold_id,
                                     rec.stage});
    } else if (rec.stage == stage::kMeta) {
      auto it = meta_fold_of.find(rec.participant_id);
      if (it == meta_fold_of.end() || it->second != rec.fold_id)
        report.violations.push_back({"meta record not from the participant's held-out fold",
                                     rec.participant_id, rec.ema_t_s, rec.fold_id,
                                     rec.stage});
      auto tl_it = tl_by_key.find({rec.participant_id, rec.ema_t_s});
      if (tl_it == tl_by_key.end()) {
        report.violations.push_back({"meta record has no matching tl record",
                                     rec.participant_id, rec.ema_t_s, rec.fold_id,
                                     rec.stage});
      } else if (tl_it->second->tl_probability != rec.tl_probability) {
        report.violations.push_back(
            {"meta record's tl probability does not match the held-out tl output",
             rec.participant_id, rec.ema_t_s, rec.fold_id, rec.stage});
      }
    }
  }

  std::map<int, const Fold*> meta_folds;
  for (const auto& fold : meta_plan.folds) meta_folds[fold.id] = &fold;
  for (const auto& prov : norm_provenance) {
    auto it = meta_folds.find(prov.fold_id);
    if (it == meta_folds.end()) {
      report.violations.push_back({"normalization provenance for unknown fold", "",
                                   0, prov.fold_id, stage::kMeta});
      continue;
    }
    for (const auto& test_id : it->second->test)
      for (const auto& used : prov.used_participants)
        if (used == test_id)
          report.violations.push_back(
              {"trait selection/normalization used a held-out participant", used, 0,
               prov.fold_id, stage::kMeta});
  }
  return report;
}

}  // namespace hrx
