#pragma once
// Descriptive statistics over a dataset: collection volume and class balance.

#include <cmath>
#include <set>
#include <stdexcept>

#include "hrx/core/types.hpp"

namespace hrx {

struct DatasetSummary {
  int n_participants = 0;
  long n_probes = 0;
  long n_hr_samples = 0;
  long participant_days = 0;  // distinct days with at least one probe
  long n_emas = 0;
  double mean_emas_per_participant = 0;
  double sd_emas_per_participant = 0;
  long n_class0 = 0;
  long n_class1 = 0;
  double class1_fraction = 0;
};

inline DatasetSummary dataset_summary(const Dataset& ds) {
  if (ds.participants.empty())
    throw std::invalid_argument("dataset_summary: empty dataset");
  DatasetSummary s;
  s.n_participants = static_cast<int>(ds.participants.size());
  std::vector<long> ema_counts;
  for (const auto& p : ds.participants) {
    std::set<long> days;
    for (const auto& probe : p.probes) {
      s.n_probes += 1;
      s.n_hr_samples += static_cast<long>(probe.samples.size());
      days.insert(static_cast<long>(std::floor(probe.start_s() / 86400.0)));
    }
    s.participant_days += static_cast<long>(days.size());
    ema_counts.push_back(static_cast<long>(p.emas.size()));
    for (const auto& e : p.emas) {
      s.n_emas += 1;
      (e.label() == 1 ? s.n_class1 : s.n_class0) += 1;
    }
  }
  double mean = 0;
  for (long c : ema_counts) mean += static_cast<double>(c);
  mean /= static_cast<double>(ema_counts.size());
  s.mean_emas_per_participant = mean;
  if (ema_counts.size() > 1) {
    double ss = 0;
    for (long c : ema_counts) {
      double d = static_cast<double>(c) - mean;
      ss += d * d;
    }
    s.sd_emas_per_participant =
        std::sqrt(ss / static_cast<double>(ema_counts.size() - 1));
  }
  s.class1_fraction =
      s.n_emas > 0 ? static_cast<double>(s.n_class1) / static_cast<double>(s.n_emas)
                   : 0.0;
  return s;
}

}  // namespace hrx
