#pragma once
// Featurized training examples (recurrence plots with labels and provenance)
// and batch assembly. The single-channel plot is replicated across the
// model's input channels.

#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/nn/tensor.hpp"
#include "hrx/recurrence/raster.hpp"

namespace hrx {

struct PlotExample {
  std::string participant_id;
  double ema_t_s = 0;
  int label = 0;
  RecurrencePlot plot;
};

inline Tensor make_batch(const std::vector<PlotExample>& examples,
                         const std::vector<std::size_t>& idx, int channels) {
  if (idx.empty()) throw std::invalid_argument("make_batch: empty index list");
  const int side = examples[idx[0]].plot.side;
  Tensor x(static_cast<int>(idx.size()), channels, side, side);
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const auto& px = examples[idx[b]].plot.pixels;
    if (examples[idx[b]].plot.side != side)
      throw std::invalid_argument("make_batch: mixed plot sides");
    for (int c = 0; c < channels; ++c) {
      double* dst = x.row(static_cast<int>(b), c, 0);
      for (std::size_t i = 0; i < px.size(); ++i)
        dst[i] = static_cast<double>(px[i]);
    }
  }
  return x;
}

inline std::vector<int> gather_labels(const std::vector<PlotExample>& examples,
                                      const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(examples[i].label);
  return out;
}

inline std::set<std::string> participant_set(const std::vector<PlotExample>& examples,
                                             const std::vector<std::size_t>& idx) {
  std::set<std::string> out;
  for (std::size_t i : idx) out.insert(examples[i].participant_id);
  return out;
}

inline void assert_participant_disjoint(const std::vector<PlotExample>& examples,
                                        const std::vector<std::size_t>& a,
                                        const std::vector<std::size_t>& b,
                                        const char* what) {
  const auto sa = participant_set(examples, a);
  for (std::size_t i : b)
    if (sa.count(examples[i].participant_id))
      throw std::logic_error(std::string(what) + ": participant " +
                             examples[i].participant_id +
                             " appears on both sides of the split");
}

}  // namespace hrx
