#pragma once
// Metric suite over prediction records. Class 1 is the positive class;
// balanced accuracy is the mean of recall (class-1 sensitivity) and
// specificity; precision and F1 are weighted by true-class support.
// Participants whose records carry a single true class get the one-sided
// convention: their balanced accuracy is that class's recall.

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/eval/records.hpp"

namespace hrx {

struct ConfusionCounts {
  long tp = 0, fn = 0, tn = 0, fp = 0;
  long total() const { return tp + fn + tn + fp; }
  long positives() const { return tp + fn; }
  long negatives() const { return tn + fp; }
};

struct ParticipantBa {
  std::string id;
  double balanced_accuracy = 0;
  bool single_class = false;
};

struct MetricsReport {
  ConfusionCounts confusion;
  long n_records = 0;
  double recall = 0;
  double specificity = 0;
  double balanced_accuracy = 0;
  double weighted_precision = 0;
  double weighted_f1 = 0;
  std::vector<ParticipantBa> per_participant;
};

namespace detail {

inline double safe_div(double a, double b) { return b != 0.0 ? a / b : 0.0; }

}  // namespace detail

inline MetricsReport metrics_from_confusion(const ConfusionCounts& c) {
  MetricsReport r;
  r.confusion = c;
  r.n_records = c.total();
  r.recall = detail::safe_div(static_cast<double>(c.tp),
                              static_cast<double>(c.tp + c.fn));
  r.specificity = detail::safe_div(static_cast<double>(c.tn),
                                   static_cast<double>(c.tn + c.fp));
  if (c.positives() > 0 && c.negatives() > 0) {
    r.balanced_accuracy = 0.5 * (r.recall + r.specificity);
  } else if (c.positives() > 0) {
    r.balanced_accuracy = r.recall;  // one-sided convention
  } else {
    r.balanced_accuracy = r.specificity;
  }
  const double p1 = detail::safe_div(static_cast<double>(c.tp),
                                     static_cast<double>(c.tp + c.fp));
  const double p0 = detail::safe_div(static_cast<double>(c.tn),
                                     static_cast<double>(c.tn + c.fn));
  const double r1 = r.recall, r0 = r.specificity;
  const double f1_1 = detail::safe_div(2.0 * p1 * r1, p1 + r1);
  const double f1_0 = detail::safe_div(2.0 * p0 * r0, p0 + r0);
  const double n = static_cast<double>(c.total());
  if (n > 0) {
    r.weighted_precision =
        (static_cast<double>(c.positives()) * p1 + static_cast<double>(c.negatives()) * p0) / n;
    r.weighted_f1 =
        (static_cast<double>(c.positives()) * f1_1 + static_cast<double>(c.negatives()) * f1_0) / n;
  }
  return r;
}

inline MetricsReport compute_metrics(const std::vector<PredictionRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("compute_metrics: no records");
  ConfusionCounts c;
  std::map<std::string, ConfusionCounts> per;
  for (const auto& rec : records) {
    ConfusionCounts& pc = per[rec.participant_id];
    if (rec.label == 1) {
      if (rec.predicted_class == 1) {
        ++c.tp;
        ++pc.tp;
      } else {
        ++c.fn;
        ++pc.fn;
      }
    } else {
      if (rec.predicted_class == 0) {
        ++c.tn;
        ++pc.tn;
      } else {
        ++c.fp;
        ++pc.fp;
      }
    }
  }
  MetricsReport r = metrics_from_confusion(c);
  for (const auto& [id, pc] : per) {
    MetricsReport pr = metrics_from_confusion(pc);
    r.per_participant.push_back(
        {id, pr.balanced_accuracy, pc.positives() == 0 || pc.negatives() == 0});
  }
  return r;
}

}  // namespace hrx
