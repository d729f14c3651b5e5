#pragma once
// Heart-rate preprocessing: physiological plausibility filtering, beat
// interval derivation (60/HR), and interval series with cumulative-sum
// timestamps. Wall-clock sample times anchor windows only; inside a series
// time is carried by the interval sums themselves.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hrx/core/types.hpp"

namespace hrx {

struct PlausibilityResult {
  std::vector<HrSample> kept;  // input order preserved
  long rejected_low = 0;       // below 40 bpm
  long rejected_high = 0;      // above 220 - age
};

// Keeps samples with 40 <= hr <= 220 - age.
inline PlausibilityResult filter_plausible(const std::vector<HrSample>& samples,
                                           int age) {
  if (age <= 0 || age >= 220)
    throw std::invalid_argument("filter_plausible: age must make 220 - age positive");
  const double ceiling = 220.0 - age;
  PlausibilityResult r;
  r.kept.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.hr_bpm < 40.0) {
      ++r.rejected_low;
    } else if (s.hr_bpm > ceiling) {
      ++r.rejected_high;
    } else {
      r.kept.push_back(s);
    }
  }
  return r;
}

inline double hr_to_rri(double hr_bpm) {
  if (hr_bpm <= 0) throw std::invalid_argument("hr_to_rri: hr must be > 0");
  return 60.0 / hr_bpm;
}

// Beat-interval series; t[k] is the cumulative sum of intervals up to k.
struct RriSeries {
  std::vector<double> rri;  // seconds
  std::vector<double> t;    // t[0] = rri[0], t[k] = t[k-1] + rri[k]
  std::size_t size() const { return rri.size(); }
};

inline RriSeries build_rri_series(const std::vector<HrSample>& samples) {
  if (samples.empty())
    throw std::invalid_argument("build_rri_series: empty input");
  RriSeries s;
  s.rri.reserve(samples.size());
  s.t.reserve(samples.size());
  double acc = 0.0;
  for (const auto& smp : samples) {
    const double rri = hr_to_rri(smp.hr_bpm);
    acc += rri;
    s.rri.push_back(rri);
    s.t.push_back(acc);
  }
  return s;
}

}  // namespace hrx
