#pragma once
// EMA-anchored window extraction. For every self-report, gathers the
// plausibility-filtered heart-rate samples from the preceding window and
// emits a labeled beat-interval series when enough samples are present.
// Plausibility filtering runs before the sample count is taken; both the
// pre- and post-filter counts are kept in the diagnostics.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "hrx/core/types.hpp"
#include "hrx/preprocess/signal.hpp"

namespace hrx {

struct WindowSpec {
  double length_s = 5400.0;  // 1 h / 1.5 h / 2 h explored; any positive value
  int min_samples = 50;

  void check() const {
    if (length_s <= 0) throw std::invalid_argument("window length_s must be > 0");
    if (min_samples < 2)
      throw std::invalid_argument("window min_samples must be >= 2");
  }
};

struct LabeledWindow {
  std::string participant_id;
  double ema_t_s = 0;
  int label = 0;
  RriSeries rri_series;
};

struct WindowExtractionStats {
  long emas_total = 0;
  long emas_included = 0;
  long emas_excluded = 0;
  // Per excluded EMA: samples present before/after plausibility filtering.
  struct Exclusion {
    double ema_t_s;
    long raw_count;
    long filtered_count;
  };
  std::vector<Exclusion> exclusions;
};

// Windows are closed intervals [ema_t - length_s, ema_t]; a sample exactly at
// the EMA time counts. Samples from multiple probes are concatenated in time
// order into one interval series.
inline std::vector<LabeledWindow> extract_windows(const Participant& p,
                                                  const WindowSpec& spec,
                                                  WindowExtractionStats* stats = nullptr) {
  spec.check();
  // Flatten, filter, and sort once per participant.
  std::vector<HrSample> all;
  for (const auto& probe : p.probes)
    all.insert(all.end(), probe.samples.begin(), probe.samples.end());
  std::sort(all.begin(), all.end(),
            [](const HrSample& a, const HrSample& b) { return a.t_s < b.t_s; });
  const std::vector<HrSample> filtered = filter_plausible(all, p.age).kept;

  auto count_in = [](const std::vector<HrSample>& v, double lo, double hi) {
    auto first = std::lower_bound(v.begin(), v.end(), lo,
                                  [](const HrSample& s, double t) { return s.t_s < t; });
    auto last = std::upper_bound(v.begin(), v.end(), hi,
                                 [](double t, const HrSample& s) { return t < s.t_s; });
    return std::make_pair(first, last);
  };

  std::vector<LabeledWindow> out;
  for (const auto& ema : p.emas) {
    const double lo = ema.t_s - spec.length_s;
    const double hi = ema.t_s;
    auto [first, last] = count_in(filtered, lo, hi);
    const long n = static_cast<long>(last - first);
    if (stats) ++stats->emas_total;
    if (n >= spec.min_samples) {
      LabeledWindow w;
      w.participant_id = p.id;
      w.ema_t_s = ema.t_s;
      w.label = ema.label();
      w.rri_series = build_rri_series(std::vector<HrSample>(first, last));
      out.push_back(std::move(w));
      if (stats) ++stats->emas_included;
    } else if (stats) {
      auto [rf, rl] = count_in(all, lo, hi);
      ++stats->emas_excluded;
      stats->exclusions.push_back({ema.t_s, static_cast<long>(rl - rf), n});
    }
  }
  std::sort(out.begin(), out.end(), [](const LabeledWindow& a, const LabeledWindow& b) {
    return a.ema_t_s < b.ema_t_s;
  });
  return out;
}

// Deterministic dataset-wide extraction, sorted by participant then EMA time.
inline std::vector<LabeledWindow> extract_all_windows(
    const Dataset& ds, const WindowSpec& spec, WindowExtractionStats* stats = nullptr) {
  std::vector<const Participant*> ps;
  for (const auto& p : ds.participants) ps.push_back(&p);
  std::sort(ps.begin(), ps.end(),
            [](const Participant* a, const Participant* b) { return a->id < b->id; });
  std::vector<LabeledWindow> out;
  for (const Participant* p : ps) {
    auto w = extract_windows(*p, spec, stats);
    out.insert(out.end(), std::make_move_iterator(w.begin()),
               std::make_move_iterator(w.end()));
  }
  return out;
}

}  // namespace hrx
