#pragma once
// Recurrence analysis of beat-interval series: time-delay embedding,
// thresholded recurrence matrices (fixed threshold or target recurrence
// rate), and the standard line-structure measures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hrx/preprocess/signal.hpp"

namespace hrx {

enum class ThresholdMode { FixedEpsilon, TargetRate };

struct EmbeddingParams {
  int dimension = 3;   // m
  int delay = 1;       // tau, in samples
  ThresholdMode mode = ThresholdMode::TargetRate;
  double target_rate = 0.10;  // rho*, used in TargetRate mode
  double epsilon = 0.0;       // used in FixedEpsilon mode

  void check() const {
    if (dimension < 1) throw std::invalid_argument("embedding dimension must be >= 1");
    if (delay < 1) throw std::invalid_argument("embedding delay must be >= 1");
    if (mode == ThresholdMode::TargetRate &&
        (target_rate <= 0.0 || target_rate >= 1.0))
      throw std::invalid_argument("target recurrence rate must be in (0, 1)");
    if (mode == ThresholdMode::FixedEpsilon && epsilon < 0.0)
      throw std::invalid_argument("epsilon must be >= 0");
  }
};

// Row-major list of m-dimensional embedded points.
struct EmbeddedSeries {
  int dimension = 0;
  std::vector<double> coords;  // n * dimension
  std::size_t size() const {
    return dimension == 0 ? 0 : coords.size() / static_cast<std::size_t>(dimension);
  }
  const double* point(std::size_t i) const {
    return coords.data() + i * static_cast<std::size_t>(dimension);
  }
};

// x_i = (s[i], s[i+tau], ..., s[i+(m-1)tau]), i = 0 .. len - (m-1)tau - 1.
inline EmbeddedSeries embed(const std::vector<double>& series,
                            const EmbeddingParams& params) {
  params.check();
  const long m = params.dimension, tau = params.delay;
  const long len = static_cast<long>(series.size());
  const long n = len - (m - 1) * tau;
  if (n < 1)
    throw std::invalid_argument("series too short for embedding parameters");
  EmbeddedSeries out;
  out.dimension = params.dimension;
  out.coords.resize(static_cast<std::size_t>(n) * m);
  for (long i = 0; i < n; ++i)
    for (long k = 0; k < m; ++k)
      out.coords[static_cast<std::size_t>(i) * m + k] = series[i + k * tau];
  return out;
}

inline EmbeddedSeries embed(const RriSeries& series, const EmbeddingParams& params) {
  return embed(series.rri, params);
}

struct RecurrenceMatrix {
  std::size_t n = 0;
  std::vector<std::uint8_t> bits;  // n*n, symmetric, unit diagonal
  double epsilon = 0.0;            // threshold actually applied
  bool degenerate = false;         // all points identical in target mode
  long tie_count = 0;              // distances equal to epsilon beyond the quota

  std::uint8_t at(std::size_t i, std::size_t j) const { return bits[i * n + j]; }
  double recurrence_rate() const {
    if (n < 2) return 0.0;
    long sum = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j) sum += bits[i * n + j];
    return static_cast<double>(sum) / (static_cast<double>(n) * (n - 1));
  }
};

inline RecurrenceMatrix recurrence_matrix(const EmbeddedSeries& pts,
                                          const EmbeddingParams& params) {
  params.check();
  const std::size_t n = pts.size();
  if (n < 2) throw std::invalid_argument("recurrence_matrix: need >= 2 points");
  const int m = pts.dimension;

  auto dist = [&](std::size_t i, std::size_t j) {
    const double* a = pts.point(i);
    const double* b = pts.point(j);
    double s = 0;
    for (int k = 0; k < m; ++k) {
      const double d = a[k] - b[k];
      s += d * d;
    }
    return std::sqrt(s);
  };

  RecurrenceMatrix rm;
  rm.n = n;
  rm.bits.assign(n * n, 0);

  double eps = params.epsilon;
  if (params.mode == ThresholdMode::TargetRate) {
    std::vector<double> ds;
    ds.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) ds.push_back(dist(i, j));
    const std::size_t pairs = ds.size();
    // k-th smallest unordered distance; k chosen so the achieved rate is
    // within half a pair of the target.
    const long k = std::lround(params.target_rate * static_cast<double>(pairs));
    if (*std::max_element(ds.begin(), ds.end()) == 0.0) {
      rm.degenerate = true;
      eps = 0.0;
    } else if (k <= 0) {
      eps = -1.0;  // below any distance: only the diagonal recurs
    } else {
      std::nth_element(ds.begin(), ds.begin() + (k - 1), ds.end());
      eps = ds[k - 1];
      rm.tie_count = static_cast<long>(
          std::count(ds.begin() + k, ds.end(), eps));
    }
  }
  rm.epsilon = eps;

  for (std::size_t i = 0; i < n; ++i) {
    rm.bits[i * n + i] = 1;
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::uint8_t hit = dist(i, j) <= eps ? 1 : 0;
      rm.bits[i * n + j] = hit;
      rm.bits[j * n + i] = hit;
    }
  }
  return rm;
}

struct RqaMeasures {
  double recurrence_rate = 0;   // off-diagonal pairs / n(n-1)
  double determinism = 0;       // recurrent points on diagonal lines >= l_min
  double laminarity = 0;        // recurrent points on vertical lines >= v_min
  double avg_diagonal_length = 0;
  long max_diagonal_length = 0;
  long min_line_length = 2;
};

// Exhaustive line-structure scan. Diagonal statistics exclude the main
// diagonal; DET is normalized by off-diagonal recurrent points, LAM by all
// recurrent points (vertical runs may cross the diagonal).
inline RqaMeasures rqa_measures(const RecurrenceMatrix& rm, int l_min = 2,
                                int v_min = 2) {
  const std::size_t n = rm.n;
  if (n < 2) throw std::invalid_argument("rqa_measures: need n >= 2");
  RqaMeasures q;
  q.min_line_length = l_min;

  long offdiag_points = 0;
  long all_points = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (rm.at(i, j)) {
        ++all_points;
        if (i != j) ++offdiag_points;
      }
  q.recurrence_rate =
      static_cast<double>(offdiag_points) / (static_cast<double>(n) * (n - 1));

  // Diagonal lines on every off-main diagonal.
  long diag_points_on_lines = 0;
  long diag_line_count = 0;
  long diag_length_sum = 0;
  long max_len = 0;
  for (long off = -(static_cast<long>(n) - 1); off <= static_cast<long>(n) - 1; ++off) {
    if (off == 0) continue;
    long run = 0;
    auto flush = [&] {
      if (run >= l_min) {
        diag_points_on_lines += run;
        diag_line_count += 1;
        diag_length_sum += run;
        max_len = std::max(max_len, run);
      }
      run = 0;
    };
    const long i0 = off > 0 ? 0 : -off;
    const long j0 = off > 0 ? off : 0;
    for (long i = i0, j = j0; i < static_cast<long>(n) && j < static_cast<long>(n);
         ++i, ++j) {
      if (rm.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)))
        ++run;
      else
        flush();
    }
    flush();
  }
  q.determinism = offdiag_points > 0
                      ? static_cast<double>(diag_points_on_lines) / offdiag_points
                      : 0.0;
  q.avg_diagonal_length =
      diag_line_count > 0
          ? static_cast<double>(diag_length_sum) / diag_line_count
          : 0.0;
  q.max_diagonal_length = max_len;

  // Vertical lines.
  long vert_points_on_lines = 0;
  for (std::size_t j = 0; j < n; ++j) {
    long run = 0;
    auto flush = [&] {
      if (run >= v_min) vert_points_on_lines += run;
      run = 0;
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (rm.at(i, j))
        ++run;
      else
        flush();
    }
    flush();
  }
  q.laminarity = all_points > 0
                     ? static_cast<double>(vert_points_on_lines) / all_points
                     : 0.0;
  return q;
}

}  // namespace hrx
