#pragma once
// Cross-validation plans. The intermediate stage holds out participants in
// groups of five with a two-participant validation set chosen so the pooled
// class ratio stays close to the training pool's; the final stage is
// leave-one-participant-out.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/util/rng.hpp"

namespace hrx {

struct ParticipantLabelCounts {
  std::string id;
  long n0 = 0, n1 = 0;
};

struct Fold {
  int id = 0;
  std::vector<std::string> test, val, train;
  bool ratio_fallback = false;  // no validation pair met the ratio constraint
  double ratio_gap = 0;         // achieved |r_val - r_train| / r_train
};

struct FoldPlan {
  std::vector<Fold> folds;
  std::uint64_t seed = 0;
};

namespace detail {

// Relative gap between class-1:class-0 ratios, with the degenerate
// zero-denominator cases ordered sensibly (equal degenerate ratios match,
// anything else never does).
inline double ratio_gap(long v1, long v0, long t1, long t0) {
  const double inf = std::numeric_limits<double>::infinity();
  const bool v_inf = v0 == 0, t_inf = t0 == 0;
  if (v_inf || t_inf) {
    if (v_inf && t_inf) return (v1 > 0) == (t1 > 0) ? 0.0 : inf;
    return inf;
  }
  const double rv = static_cast<double>(v1) / static_cast<double>(v0);
  const double rt = static_cast<double>(t1) / static_cast<double>(t0);
  if (rt == 0.0) return rv == 0.0 ? 0.0 : inf;
  return std::fabs(rv - rt) / rt;
}

}  // namespace detail

struct LfocvParams {
  int group_size = 5;
  int n_val = 2;
  double ratio_tolerance = 0.10;
  bool tolerance_relative = true;  // relative to the training pool's ratio
};

inline FoldPlan plan_lfocv(const std::vector<ParticipantLabelCounts>& participants,
                           std::uint64_t seed, const LfocvParams& p = {}) {
  if (participants.size() < 8)
    throw std::invalid_argument("plan_lfocv: need at least 8 participants");
  std::vector<std::size_t> order(participants.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x666f6c64ULL));
  rng.shuffle(order);

  FoldPlan plan;
  plan.seed = seed;
  const std::size_t n = order.size();
  int fold_id = 0;
  for (std::size_t pos = 0; pos < n; pos += static_cast<std::size_t>(p.group_size)) {
    const std::size_t hi = std::min(n, pos + static_cast<std::size_t>(p.group_size));
    Fold fold;
    fold.id = fold_id++;
    for (std::size_t i = pos; i < hi; ++i)
      fold.test.push_back(participants[order[i]].id);

    std::vector<std::size_t> rest;  // in seeded order
    for (std::size_t i = 0; i < n; ++i)
      if (i < pos || i >= hi) rest.push_back(order[i]);
    if (rest.size() < static_cast<std::size_t>(p.n_val + 1))
      throw std::invalid_argument("plan_lfocv: not enough participants for val+train");

    long rest1 = 0, rest0 = 0;
    for (std::size_t i : rest) {
      rest1 += participants[i].n1;
      rest0 += participants[i].n0;
    }

    // First qualifying pair in seeded order; otherwise the minimum-gap pair.
    std::size_t best_a = 0, best_b = 1;
    double best_gap = std::numeric_limits<double>::infinity();
    bool qualified = false;
    for (std::size_t a = 0; a + 1 < rest.size() && !qualified; ++a) {
      for (std::size_t b = a + 1; b < rest.size(); ++b) {
        const long v1 = participants[rest[a]].n1 + participants[rest[b]].n1;
        const long v0 = participants[rest[a]].n0 + participants[rest[b]].n0;
        const long t1 = rest1 - v1, t0 = rest0 - v0;
        double gap;
        if (p.tolerance_relative) {
          gap = detail::ratio_gap(v1, v0, t1, t0);
        } else {
          const double rv = v0 > 0 ? static_cast<double>(v1) / v0
                                   : std::numeric_limits<double>::infinity();
          const double rt = t0 > 0 ? static_cast<double>(t1) / t0
                                   : std::numeric_limits<double>::infinity();
          gap = (std::isinf(rv) && std::isinf(rt)) ? 0.0 : std::fabs(rv - rt);
        }
        if (gap < best_gap) {
          best_gap = gap;
          best_a = a;
          best_b = b;
        }
        if (gap <= p.ratio_tolerance) {
          best_a = a;
          best_b = b;
          best_gap = gap;
          qualified = true;
          break;
        }
      }
    }
    fold.ratio_fallback = !qualified;
    fold.ratio_gap = best_gap;
    fold.val.push_back(participants[rest[best_a]].id);
    fold.val.push_back(participants[rest[best_b]].id);
    for (std::size_t i = 0; i < rest.size(); ++i)
      if (i != best_a && i != best_b)
        fold.train.push_back(participants[rest[i]].id);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

inline FoldPlan plan_loocv(const std::vector<std::string>& participant_ids) {
  if (participant_ids.size() < 2)
    throw std::invalid_argument("plan_loocv: need at least 2 participants");
  FoldPlan plan;
  for (std::size_t i = 0; i < participant_ids.size(); ++i) {
    Fold fold;
    fold.id = static_cast<int>(i);
    fold.test.push_back(participant_ids[i]);
    for (std::size_t j = 0; j < participant_ids.size(); ++j)
      if (j != i) fold.train.push_back(participant_ids[j]);
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

}  // namespace hrx
