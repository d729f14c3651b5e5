#pragma once
// Information-gain trait selection with equal-frequency binning. Gains are in
// bits; binning by rank makes the gain invariant under strictly monotone
// transforms of the feature.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hrx/core/types.hpp"

namespace hrx {

inline double entropy_bits(long n0, long n1) {
  const long n = n0 + n1;
  if (n == 0) return 0.0;
  double h = 0;
  for (long c : {n0, n1}) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(n);
    h -= p * std::log2(p);
  }
  return h;
}

struct InfoGainResult {
  double gain = 0;
  bool single_class = false;          // gain 0 by convention, flagged
  std::vector<double> bin_upper_edges;  // inclusive upper bounds, last = +inf
};

// Equal-frequency binning (ties merged): candidate edges at the b*N/bins
// order statistics, duplicates collapsed; value x falls in the first bin
// whose upper edge is >= x.
inline InfoGainResult information_gain(const std::vector<double>& x,
                                       const std::vector<int>& y, int bins = 10) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("information_gain: need >= 2 paired samples");
  if (bins < 2) throw std::invalid_argument("information_gain: need >= 2 bins");
  InfoGainResult res;
  long n1 = 0;
  for (int v : y) n1 += v;
  const long n = static_cast<long>(y.size());
  const long n0 = n - n1;
  if (n0 == 0 || n1 == 0) {
    res.single_class = true;
    return res;
  }

  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> edges;
  for (int b = 1; b < bins; ++b) {
    const std::size_t pos =
        static_cast<std::size_t>(static_cast<long long>(b) * n / bins);
    const double e = sorted[std::min<std::size_t>(pos, sorted.size() - 1)];
    if (edges.empty() || e > edges.back()) edges.push_back(e);
  }
  // Drop a top edge that would leave the last bin empty.
  while (!edges.empty() && edges.back() >= sorted.back()) edges.pop_back();
  res.bin_upper_edges = edges;
  res.bin_upper_edges.push_back(std::numeric_limits<double>::infinity());

  const std::size_t n_bins = edges.size() + 1;
  std::vector<long> c0(n_bins, 0), c1(n_bins, 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const std::size_t b = static_cast<std::size_t>(
        std::lower_bound(edges.begin(), edges.end(), x[i]) - edges.begin());
    (y[i] ? c1 : c0)[b] += 1;
  }
  double cond = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    const long nb = c0[b] + c1[b];
    if (nb == 0) continue;
    cond += (static_cast<double>(nb) / static_cast<double>(n)) *
            entropy_bits(c0[b], c1[b]);
  }
  res.gain = std::max(0.0, entropy_bits(n0, n1) - cond);
  return res;
}

struct SelectionReport {
  struct Entry {
    ScaleId scale;
    double gain = 0;
    std::vector<double> bin_upper_edges;
  };
  std::vector<Entry> ranked;        // all scales, by gain desc then name asc
  std::vector<ScaleId> selected;    // top-k
  bool single_class = false;
};

// Ranks trait scales by information gain computed over EMA-level rows (each
// row carries its participant's scale scores) and keeps the top k.
inline SelectionReport select_traits(
    const std::vector<const TraitProfile*>& row_profiles,
    const std::vector<int>& labels, int k, int bins = 10) {
  if (row_profiles.size() != labels.size() || row_profiles.empty())
    throw std::invalid_argument("select_traits: bad rows");
  SelectionReport rep;
  for (ScaleId sid : kAllScales) {
    std::vector<double> xs;
    xs.reserve(row_profiles.size());
    bool have = true;
    for (const TraitProfile* p : row_profiles) {
      auto it = p->scores.find(sid);
      if (it == p->scores.end()) {
        have = false;
        break;
      }
      xs.push_back(it->second);
    }
    if (!have) continue;  // scale unresolved for some participant
    InfoGainResult r = information_gain(xs, labels, bins);
    rep.single_class = rep.single_class || r.single_class;
    rep.ranked.push_back({sid, r.gain, std::move(r.bin_upper_edges)});
  }
  std::stable_sort(rep.ranked.begin(), rep.ranked.end(),
                   [](const SelectionReport::Entry& a, const SelectionReport::Entry& b) {
                     if (a.gain != b.gain) return a.gain > b.gain;
                     return std::string(to_string(a.scale)) < to_string(b.scale);
                   });
  const std::size_t take =
      std::min<std::size_t>(static_cast<std::size_t>(k), rep.ranked.size());
  for (std::size_t i = 0; i < take; ++i) rep.selected.push_back(rep.ranked[i].scale);
  return rep;
}

}  // namespace hrx
