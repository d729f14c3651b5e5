#pragma once
// Lightweight meta-learner classifiers over the TL probability plus selected
// trait scores: L2-regularized logistic regression, k-nearest neighbors, and
// a depth-limited information-gain decision tree. All fits are deterministic
// given the data order.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/stacking/infogain.hpp"
#include "hrx/util/rng.hpp"

namespace hrx {

enum class MetaKind { Logit, Knn, DecisionTree };

inline const char* to_string(MetaKind k) {
  switch (k) {
    case MetaKind::Logit: return "logit";
    case MetaKind::Knn: return "knn";
    case MetaKind::DecisionTree: return "tree";
  }
  return "?";
}

inline MetaKind parse_meta_kind(const std::string& s) {
  if (s == "logit") return MetaKind::Logit;
  if (s == "knn") return MetaKind::Knn;
  if (s == "tree") return MetaKind::DecisionTree;
  throw std::invalid_argument("unknown meta-learner kind: " + s);
}

// Per-feature z-normalization fitted on training rows only.
struct Standardizer {
  std::vector<double> mean, sd;

  static Standardizer fit(const std::vector<std::vector<double>>& x) {
    if (x.empty()) throw std::invalid_argument("standardizer: no rows");
    const std::size_t d = x[0].size();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.sd.assign(d, 0.0);
    for (const auto& row : x)
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += row[j];
    for (std::size_t j = 0; j < d; ++j) s.mean[j] /= static_cast<double>(x.size());
    for (const auto& row : x)
      for (std::size_t j = 0; j < d; ++j) {
        const double dmu = row[j] - s.mean[j];
        s.sd[j] += dmu * dmu;
      }
    for (std::size_t j = 0; j < d; ++j) {
      s.sd[j] = std::sqrt(s.sd[j] / static_cast<double>(x.size()));
      if (s.sd[j] <= 0) s.sd[j] = 1.0;  // constant feature passes through
    }
    return s;
  }

  std::vector<double> apply(const std::vector<double>& row) const {
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j)
      out[j] = (row[j] - mean[j]) / sd[j];
    return out;
  }
};

struct LogitParams {
  double l2 = 1e-4;
  int max_steps = 500;
  double tol = 1e-8;
  double w0 = 1.0, w1 = 1.0;  // class weights
};

struct LogitModel {
  std::vector<double> w;
  double b = 0;

  double prob(const std::vector<double>& x) const {
    if (x.size() != w.size())
      throw std::invalid_argument("logit: feature dimension mismatch");
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * x[j];
    return 1.0 / (1.0 + std::exp(-z));
  }
};

// Class-weighted maximum likelihood with L2 penalty, full-batch gradient
// descent with a Lipschitz-safe step size; stops on a small gradient norm.
inline LogitModel fit_logit(const std::vector<std::vector<double>>& x,
                            const std::vector<int>& y, const LogitParams& p = {}) {
  if (x.empty() || x.size() != y.size())
    throw std::invalid_argument("fit_logit: bad rows");
  const std::size_t n = x.size(), d = x[0].size();
  LogitModel m;
  m.w.assign(d, 0.0);

  double max_norm2 = 0;
  for (const auto& row : x) {
    double s = 1.0;  // bias column
    for (double v : row) s += v * v;
    max_norm2 = std::max(max_norm2, s);
  }
  const double wmax = std::max(p.w0, p.w1);
  const double lipschitz = 0.25 * wmax * max_norm2 + p.l2;
  const double lr = 1.0 / lipschitz;

  std::vector<double> gw(d);
  for (int step = 0; step < p.max_steps; ++step) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double pr = m.prob(x[i]);
      const double cw = y[i] ? p.w1 : p.w0;
      const double g = cw * (pr - static_cast<double>(y[i]));
      gb += g;
      for (std::size_t j = 0; j < d; ++j) gw[j] += g * x[i][j];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double gmax = std::fabs(gb * inv_n);
    gb = gb * inv_n;
    for (std::size_t j = 0; j < d; ++j) {
      gw[j] = gw[j] * inv_n + p.l2 * m.w[j];
      gmax = std::max(gmax, std::fabs(gw[j]));
    }
    if (gmax < p.tol) break;
    m.b -= lr * gb;
    for (std::size_t j = 0; j < d; ++j) m.w[j] -= lr * gw[j];
  }
  return m;
}

struct KnnModel {
  int k = 5;
  std::vector<std::vector<double>> x;
  std::vector<int> y;

  double prob(const std::vector<double>& q) const {
    std::vector<std::pair<double, std::size_t>> d;
    d.reserve(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double s = 0;
      for (std::size_t j = 0; j < q.size(); ++j) {
        const double diff = x[i][j] - q[j];
        s += diff * diff;
      }
      d.emplace_back(s, i);  // index breaks distance ties deterministically
    }
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
    std::partial_sort(d.begin(), d.begin() + kk, d.end());
    double ones = 0;
    for (std::size_t i = 0; i < kk; ++i) ones += y[d[i].second];
    return ones / static_cast<double>(kk);
  }
};

struct TreeNode {
  int feature = -1;        // -1 = leaf
  double threshold = 0;    // go left when x[feature] <= threshold
  double leaf_prob = 0.5;  // class-1 fraction at the leaf
  int left = -1, right = -1;
};

struct TreeModel {
  std::vector<TreeNode> nodes;

  double prob(const std::vector<double>& q) const {
    int cur = 0;
    while (nodes[cur].feature >= 0)
      cur = q[nodes[cur].feature] <= nodes[cur].threshold ? nodes[cur].left
                                                          : nodes[cur].right;
    return nodes[cur].leaf_prob;
  }
};

struct TreeParams {
  int max_depth = 3;
  int min_leaf = 5;
};

namespace detail {

inline int build_tree_node(TreeModel& t, const std::vector<std::vector<double>>& x,
                           const std::vector<int>& y, std::vector<std::size_t> rows,
                           int depth, const TreeParams& p) {
  TreeNode node;
  long n1 = 0;
  for (std::size_t i : rows) n1 += y[i];
  const long n = static_cast<long>(rows.size());
  node.leaf_prob = n > 0 ? static_cast<double>(n1) / static_cast<double>(n) : 0.5;

  const int id = static_cast<int>(t.nodes.size());
  t.nodes.push_back(node);
  if (depth >= p.max_depth || n1 == 0 || n1 == n ||
      n < 2 * static_cast<long>(p.min_leaf))
    return id;

  const double parent_h = entropy_bits(n - n1, n1);
  double best_gain = 0;
  int best_f = -1;
  double best_thr = 0;
  const std::size_t d = x[rows[0]].size();
  for (std::size_t f = 0; f < d; ++f) {
    std::vector<std::pair<double, int>> vals;
    vals.reserve(rows.size());
    for (std::size_t i : rows) vals.emplace_back(x[i][f], y[i]);
    std::sort(vals.begin(), vals.end());
    long l1 = 0;
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
      l1 += vals[i].second;
      if (vals[i].first == vals[i + 1].first) continue;
      const long nl = static_cast<long>(i) + 1;
      const long nr = n - nl;
      if (nl < p.min_leaf || nr < p.min_leaf) continue;
      const double h = (static_cast<double>(nl) / n) * entropy_bits(nl - l1, l1) +
                       (static_cast<double>(nr) / n) *
                           entropy_bits(nr - (n1 - l1), n1 - l1);
      const double gain = parent_h - h;
      if (gain > best_gain + 1e-15) {
        best_gain = gain;
        best_f = static_cast<int>(f);
        best_thr = 0.5 * (vals[i].first + vals[i + 1].first);
      }
    }
  }
  if (best_f < 0) return id;

  std::vector<std::size_t> left, right;
  for (std::size_t i : rows)
    (x[i][static_cast<std::size_t>(best_f)] <= best_thr ? left : right).push_back(i);
  t.nodes[id].feature = best_f;
  t.nodes[id].threshold = best_thr;
  t.nodes[id].left = build_tree_node(t, x, y, std::move(left), depth + 1, p);
  t.nodes[id].right = build_tree_node(t, x, y, std::move(right), depth + 1, p);
  return id;
}

}  // namespace detail

inline TreeModel fit_tree(const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, const TreeParams& p = {}) {
  if (x.empty() || x.size() != y.size())
    throw std::invalid_argument("fit_tree: bad rows");
  TreeModel t;
  std::vector<std::size_t> rows(x.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  detail::build_tree_node(t, x, y, std::move(rows), 0, p);
  return t;
}

struct MetaModel {
  MetaKind kind = MetaKind::Logit;
  LogitModel logit;
  KnnModel knn;
  TreeModel tree;

  double prob(const std::vector<double>& x) const {
    switch (kind) {
      case MetaKind::Logit: return logit.prob(x);
      case MetaKind::Knn: return knn.prob(x);
      case MetaKind::DecisionTree: return tree.prob(x);
    }
    return 0.5;
  }
  // Decision threshold 0.5 with >= tie-break (configurable upstream).
  int predict(const std::vector<double>& x, double threshold = 0.5) const {
    return prob(x) >= threshold ? 1 : 0;
  }
};

struct MetaFitParams {
  LogitParams logit;       // class weights filled by the caller
  int knn_k = 5;
  TreeParams tree;
};

inline MetaModel fit_meta(MetaKind kind, const std::vector<std::vector<double>>& x,
                          const std::vector<int>& y, const MetaFitParams& p = {}) {
  long n1 = 0;
  for (int v : y) n1 += v;
  if (n1 == 0 || n1 == static_cast<long>(y.size()))
    throw std::invalid_argument("fit_meta: training data must contain both classes");
  MetaModel m;
  m.kind = kind;
  switch (kind) {
    case MetaKind::Logit: m.logit = fit_logit(x, y, p.logit); break;
    case MetaKind::Knn:
      m.knn.k = p.knn_k;
      m.knn.x = x;
      m.knn.y = y;
      break;
    case MetaKind::DecisionTree: m.tree = fit_tree(x, y, p.tree); break;
  }
  return m;
}

// Uniform random class draws; the floor baseline.
inline std::vector<int> baseline_random(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> out(n);
  for (auto& v : out) v = rng.bernoulli(0.5) ? 1 : 0;
  return out;
}

}  // namespace hrx
