#pragma once
// Dense double-precision tensor in NCHW layout. Feature matrices (N, F) are
// stored with H = W = 1.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrx {

struct Tensor {
  int n = 0, c = 0, h = 1, w = 1;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_)
      : n(n_), c(c_), h(h_), w(w_),
        v(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}
  static Tensor matrix(int n_, int f_) { return Tensor(n_, f_, 1, 1); }

  std::size_t numel() const { return v.size(); }
  bool same_shape(const Tensor& o) const {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
  std::string shape_str() const {
    return "(" + std::to_string(n) + "," + std::to_string(c) + "," +
           std::to_string(h) + "," + std::to_string(w) + ")";
  }

  double& at(int i, int j, int k, int l) {
    return v[((static_cast<std::size_t>(i) * c + j) * h + k) * w + l];
  }
  double at(int i, int j, int k, int l) const {
    return v[((static_cast<std::size_t>(i) * c + j) * h + k) * w + l];
  }
  // Row pointer for (sample, channel, row).
  double* row(int i, int j, int k) {
    return v.data() + ((static_cast<std::size_t>(i) * c + j) * h + k) * w;
  }
  const double* row(int i, int j, int k) const {
    return v.data() + ((static_cast<std::size_t>(i) * c + j) * h + k) * w;
  }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }
};

}  // namespace hrx
