#pragma once
// Independent oracle suite. Every oracle here re-derives its expected value
// with a separate brute-force path (full sorts, quadratic scans, per-cell
// walks, finite differences) and never calls the implementation code it is
// checking to produce the expectation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hrx/core/synthetic.hpp"
#include "hrx/eval/audit.hpp"
#include "hrx/eval/folds.hpp"
#include "hrx/eval/metrics.hpp"
#include "hrx/nn/gradcheck.hpp"
#include "hrx/preprocess/signal.hpp"
#include "hrx/preprocess/traits.hpp"
#include "hrx/preprocess/windows.hpp"
#include "hrx/recurrence/raster.hpp"
#include "hrx/recurrence/recurrence.hpp"
#include "hrx/train/trainer.hpp"
#include "hrx/util/rng.hpp"

namespace hrx::oracle {

// ---- metrics ---------------------------------------------------------------

struct DirectMetrics {
  double recall, specificity, ba, weighted_precision, weighted_f1;
};

// Direct transcription of the metric definitions.
inline DirectMetrics metrics_direct(long tp, long fn, long tn, long fp) {
  auto div = [](double a, double b) { return b != 0 ? a / b : 0.0; };
  DirectMetrics m{};
  m.recall = div(static_cast<double>(tp), static_cast<double>(tp + fn));
  m.specificity = div(static_cast<double>(tn), static_cast<double>(tn + fp));
  const long npos = tp + fn, nneg = tn + fp;
  if (npos > 0 && nneg > 0) {
    m.ba = (m.recall + m.specificity) / 2.0;
  } else {
    m.ba = npos > 0 ? m.recall : m.specificity;
  }
  const double p1 = div(static_cast<double>(tp), static_cast<double>(tp + fp));
  const double p0 = div(static_cast<double>(tn), static_cast<double>(tn + fn));
  const double f1 = div(2 * p1 * m.recall, p1 + m.recall);
  const double f0 = div(2 * p0 * m.specificity, p0 + m.specificity);
  const double n = static_cast<double>(tp + fn + tn + fp);
  m.weighted_precision = (npos * p1 + nneg * p0) / n;
  m.weighted_f1 = (npos * f1 + nneg * f0) / n;
  return m;
}

// Records realizing a given confusion table, shuffled.
inline std::vector<PredictionRecord> records_from_confusion(long tp, long fn,
                                                            long tn, long fp,
                                                            Rng& rng) {
  std::vector<PredictionRecord> recs;
  auto add = [&](long n, int label, int pred) {
    for (long i = 0; i < n; ++i) {
      PredictionRecord r;
      r.participant_id = "P" + std::to_string(i % 7);
      r.ema_t_s = static_cast<double>(recs.size());
      r.label = label;
      r.predicted_class = pred;
      r.stage = stage::kMeta;
      recs.push_back(r);
    }
  };
  add(tp, 1, 1);
  add(fn, 1, 0);
  add(tn, 0, 0);
  add(fp, 0, 1);
  rng.shuffle(recs);
  return recs;
}

// ---- recurrence ------------------------------------------------------------

// Full-sort quantile threshold oracle: expected achieved recurrence rate.
inline double target_rate_oracle(const EmbeddedSeries& pts, double rho) {
  const std::size_t n = pts.size();
  std::vector<double> d;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0;
      for (int k = 0; k < pts.dimension; ++k) {
        const double diff = pts.point(i)[k] - pts.point(j)[k];
        s += diff * diff;
      }
      d.push_back(std::sqrt(s));
    }
  std::sort(d.begin(), d.end());
  const long k = std::lround(rho * static_cast<double>(d.size()));
  if (k <= 0) return 0.0;
  const double eps = d[static_cast<std::size_t>(k - 1)];
  long cnt = 0;
  for (double v : d)
    if (v <= eps) ++cnt;
  return 2.0 * static_cast<double>(cnt) /
         (static_cast<double>(n) * static_cast<double>(n - 1));
}

// Per-cell walk RQA oracle for small matrices.
struct RqaOracle {
  double rr, det, lam, avg_l;
  long lmax;
};

inline RqaOracle rqa_oracle(const std::vector<std::uint8_t>& bits, std::size_t n,
                            int lmin, int vmin) {
  auto at = [&](long i, long j) -> bool {
    if (i < 0 || j < 0 || i >= static_cast<long>(n) || j >= static_cast<long>(n))
      return false;
    return bits[static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)] != 0;
  };
  long offdiag = 0, all = 0;
  for (long i = 0; i < static_cast<long>(n); ++i)
    for (long j = 0; j < static_cast<long>(n); ++j)
      if (at(i, j)) {
        ++all;
        if (i != j) ++offdiag;
      }

  // Diagonal runs: start cells have no upper-left recurrent neighbor; walk.
  long det_points = 0, run_count = 0, run_total = 0, lmax = 0;
  for (long i = 0; i < static_cast<long>(n); ++i)
    for (long j = 0; j < static_cast<long>(n); ++j) {
      if (i == j || !at(i, j)) continue;
      if (at(i - 1, j - 1) && (i - 1) != (j - 1)) continue;  // not a run start
      long len = 0;
      long a = i, b = j;
      while (at(a, b) && a != b) {
        ++len;
        ++a;
        ++b;
      }
      if (len >= lmin) {
        det_points += len;
        run_count += 1;
        run_total += len;
        lmax = std::max(lmax, len);
      }
    }

  long lam_points = 0;
  for (long j = 0; j < static_cast<long>(n); ++j)
    for (long i = 0; i < static_cast<long>(n); ++i) {
      if (!at(i, j)) continue;
      if (at(i - 1, j)) continue;  // not a run start
      long len = 0;
      long a = i;
      while (at(a, j)) {
        ++len;
        ++a;
      }
      if (len >= vmin) lam_points += len;
    }

  RqaOracle o{};
  o.rr = static_cast<double>(offdiag) / (static_cast<double>(n) * (n - 1));
  o.det = offdiag > 0 ? static_cast<double>(det_points) / offdiag : 0.0;
  o.lam = all > 0 ? static_cast<double>(lam_points) / all : 0.0;
  o.avg_l = run_count > 0 ? static_cast<double>(run_total) / run_count : 0.0;
  o.lmax = lmax;
  return o;
}

// Diagonal runs touching the main diagonal are cut by it (the main diagonal
// is excluded from diagonal statistics): the walk stops at i == j and the
// run-start test treats a diagonal cell as a break.

// Nearest-neighbor rasterization oracle via explicit center mapping.
inline std::uint8_t raster_oracle_at(const RecurrenceMatrix& rm, int side, int r,
                                     int c) {
  auto src = [&](int q) {
    double pos = (static_cast<double>(q) + 0.5) * static_cast<double>(rm.n) /
                 static_cast<double>(side);
    auto idx = static_cast<std::size_t>(std::floor(pos));
    if (idx >= rm.n) idx = rm.n - 1;
    return idx;
  };
  return rm.at(src(r), src(c));
}

// ---- preprocessing ---------------------------------------------------------

inline std::vector<HrSample> filter_oracle(const std::vector<HrSample>& xs,
                                           int age) {
  std::vector<HrSample> out;
  for (const auto& s : xs)
    if (!(s.hr_bpm < 40.0) && !(s.hr_bpm > 220.0 - age)) out.push_back(s);
  return out;
}

// Quadratic scan over (EMA, sample) pairs; returns per-EMA sample counts of
// plausibility-filtered samples inside the closed window.
inline std::vector<long> window_counts_oracle(const Participant& p,
                                              double length_s) {
  std::vector<HrSample> kept;
  for (const auto& probe : p.probes)
    for (const auto& s : probe.samples)
      if (!(s.hr_bpm < 40.0) && !(s.hr_bpm > 220.0 - p.age)) kept.push_back(s);
  std::vector<long> counts;
  for (const auto& e : p.emas) {
    long c = 0;
    for (const auto& s : kept)
      if (s.t_s >= e.t_s - length_s && s.t_s <= e.t_s) ++c;
    counts.push_back(c);
  }
  return counts;
}

// Independent reverse-code + per-participant mean imputation + sum oracle.
inline std::map<ScaleId, double> traits_oracle(
    const std::vector<TraitItemResponse>& items,
    const std::map<ScaleId, ScaleDecl>& scales) {
  std::map<ScaleId, double> out;
  for (const auto& [sid, decl] : scales) {
    std::vector<double> coded;
    long missing = 0;
    for (const auto& it : items) {
      if (it.scale != sid) continue;
      if (!it.value) {
        ++missing;
        continue;
      }
      coded.push_back(it.reverse_scored ? decl.item_min + decl.item_max - *it.value
                                        : *it.value);
    }
    if (coded.empty()) continue;
    double mean = 0;
    for (double v : coded) mean += v;
    mean /= static_cast<double>(coded.size());
    double total = 0;
    for (double v : coded) total += v;
    total += mean * static_cast<double>(missing);
    out[sid] = total;
  }
  return out;
}

// ---- fold planning ---------------------------------------------------------

// Exhaustive check of one LFOCV fold's validation choice: returns true when
// the fold's pair qualifies, or no pair qualifies and the fold is flagged.
inline bool fold_pair_oracle(const std::vector<ParticipantLabelCounts>& all,
                             const Fold& fold, double tol) {
  std::map<std::string, const ParticipantLabelCounts*> by_id;
  for (const auto& p : all) by_id[p.id] = &p;
  std::vector<const ParticipantLabelCounts*> rest;
  for (const auto& p : all) {
    bool in_test = false;
    for (const auto& id : fold.test) in_test = in_test || id == p.id;
    if (!in_test) rest.push_back(&p);
  }
  auto gap_of = [&](const ParticipantLabelCounts* a, const ParticipantLabelCounts* b) {
    long v1 = a->n1 + b->n1, v0 = a->n0 + b->n0;
    long t1 = 0, t0 = 0;
    for (const auto* p : rest) {
      t1 += p->n1;
      t0 += p->n0;
    }
    t1 -= v1;
    t0 -= v0;
    if (v0 == 0 || t0 == 0) {
      if (v0 == 0 && t0 == 0) return (v1 > 0) == (t1 > 0) ? 0.0 : 1e300;
      return 1e300;
    }
    const double rv = static_cast<double>(v1) / v0;
    const double rt = static_cast<double>(t1) / t0;
    if (rt == 0) return rv == 0 ? 0.0 : 1e300;
    return std::fabs(rv - rt) / rt;
  };
  bool any_qualifies = false;
  for (std::size_t i = 0; i < rest.size(); ++i)
    for (std::size_t j = i + 1; j < rest.size(); ++j)
      if (gap_of(rest[i], rest[j]) <= tol) any_qualifies = true;
  const double chosen = gap_of(by_id.at(fold.val[0]), by_id.at(fold.val[1]));
  if (any_qualifies) return chosen <= tol && !fold.ratio_fallback;
  return fold.ratio_fallback;
}

// ---- callback rule ---------------------------------------------------------

// Independent restatement of the restore rule.
inline std::size_t restore_rule_oracle(const std::vector<double>& train,
                                       const std::vector<double>& val, double tol) {
  bool trig = false;
  for (std::size_t i = 0; i < train.size(); ++i) {
    const double gap_rel =
        train[i] > 0 ? (val[i] - train[i]) / train[i]
                     : (val[i] > train[i] ? 1e300 : 0.0);
    if (val[i] < train[i] || gap_rel > tol) trig = true;
  }
  if (!trig) return train.size() - 1;
  std::size_t arg = 0;
  for (std::size_t i = 1; i < train.size(); ++i)
    if (std::fabs(val[i] - train[i]) < std::fabs(val[arg] - train[arg])) arg = i;
  return arg;
}

// ---- suite runner ----------------------------------------------------------

struct OracleResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace detail

inline std::vector<OracleResult> run_suite(bool quick = false) {
  std::vector<OracleResult> results;
  auto add = [&](const std::string& name, bool pass, const std::string& detail) {
    results.push_back({name, pass, detail});
  };

  // Metric fixture shaped like the published 1.5 h confusion rates.
  {
    Rng rng(101);
    auto recs = records_from_confusion(581, 419, 627, 373, rng);
    MetricsReport m = compute_metrics(recs);
    const bool pass = std::fabs(m.balanced_accuracy - 0.604) <= 0.0005;
    add("metric_fixture", pass, "ba=" + detail::fmt(m.balanced_accuracy));
  }

  // Random confusion tables against the direct-definition metrics.
  {
    Rng rng(102);
    const int tables = quick ? 50 : 500;
    double worst = 0;
    for (int t = 0; t < tables; ++t) {
      const long tp = static_cast<long>(rng.below(200)),
                 fn = static_cast<long>(rng.below(200)),
                 tn = static_cast<long>(rng.below(200)),
                 fp = static_cast<long>(rng.below(200));
      if (tp + fn + tn + fp == 0) continue;
      auto recs = records_from_confusion(tp, fn, tn, fp, rng);
      MetricsReport m = compute_metrics(recs);
      DirectMetrics d = metrics_direct(tp, fn, tn, fp);
      worst = std::max({worst, std::fabs(m.recall - d.recall),
                        std::fabs(m.specificity - d.specificity),
                        std::fabs(m.balanced_accuracy - d.ba),
                        std::fabs(m.weighted_precision - d.weighted_precision),
                        std::fabs(m.weighted_f1 - d.weighted_f1)});
    }
    add("metric_random_tables", worst <= 1e-12, "max_abs_err=" + detail::fmt(worst));
  }

  // Focal loss reduces to cross-entropy at gamma=0, unit weights.
  {
    double worst = 0;
    const int n = quick ? 1000 : 10000;
    for (int i = 0; i < n; ++i) {
      const double p = 1e-6 + (1.0 - 2e-6) * (static_cast<double>(i) / (n - 1));
      const FocalLossParams lp{0.0, 1.0, 1.0};
      const double f1 = focal_loss_sample(p, 1, lp);
      const double f0 = focal_loss_sample(p, 0, lp);
      worst = std::max({worst, std::fabs(f1 + std::log(p)),
                        std::fabs(f0 + std::log1p(-p))});
    }
    add("focal_bce_reduction", worst <= 1e-12, "max_abs_err=" + detail::fmt(worst));
  }

  // Focal gradient vs finite differences on the logit.
  {
    Rng rng(103);
    double worst = 0;
    const FocalLossParams lp = FocalLossParams::inverse_frequency(6165, 3835, 2.0);
    for (int i = 0; i < (quick ? 100 : 1000); ++i) {
      const double z = rng.uniform(-4.0, 4.0);
      const int y = rng.bernoulli(0.5) ? 1 : 0;
      const double h = 1e-6;
      const double lp_ = focal_loss_sample(sigmoid(z + h), y, lp);
      const double lm_ = focal_loss_sample(sigmoid(z - h), y, lp);
      const double numeric = (lp_ - lm_) / (2 * h);
      const double analytic = focal_loss_dlogit(sigmoid(z), y, lp);
      const double rel = std::fabs(analytic - numeric) /
                         std::max({std::fabs(analytic), std::fabs(numeric), 1e-9});
      worst = std::max(worst, rel);
    }
    add("focal_grad_fd", worst <= 1e-6, "max_rel_err=" + detail::fmt(worst));
  }

  // Per-layer gradient checks through small compositions.
  {
    double worst = 0;
    std::string worst_where;
    auto check = [&](const std::string& where, Network& net, const Tensor& x,
                     const std::vector<int>& y) {
      const FocalLossParams lp = FocalLossParams::inverse_frequency(1, 1, 2.0);
      GradCheckResult rp = gradcheck_params(net, x, y, lp, 60, 17);
      GradCheckResult ri = gradcheck_input(net, x, y, lp, 40, 18);
      if (rp.coords_checked == 0 && ri.coords_checked == 0) {
        worst = std::max(worst, 1.0);
        worst_where = where + " (no smooth probes)";
        return;
      }
      const double e = std::max(rp.max_rel_err, ri.max_rel_err);
      if (e > worst) {
        worst = e;
        worst_where = where;
      }
    };
    Rng xr(104);
    auto rand_x = [&](int n, int c, int h, int w) {
      Tensor t(n, c, h, w);
      for (auto& v : t.v) v = xr.uniform(0.0, 1.0);
      return t;
    };
    auto add_layer = [](Network& net, std::unique_ptr<Layer> l, const char* tag) {
      l->tag = tag;
      net.layers.push_back(std::move(l));
    };
    {
      Rng r(1);
      Network net;
      add_layer(net, std::make_unique<Conv2d>(2, 3, 3, 1, 1, true, r), "conv");
      add_layer(net, std::make_unique<GlobalAvgPool>(), "gap");
      add_layer(net, std::make_unique<Dense>(3, 1, r), "out");
      Tensor x = rand_x(2, 2, 6, 6);
      check("conv2d", net, x, {0, 1});
    }
    {
      Rng r(2);
      Network net;
      add_layer(net, std::make_unique<Conv2d>(2, 4, 3, 2, 1, false, r), "conv");
      add_layer(net, std::make_unique<GlobalAvgPool>(), "gap");
      add_layer(net, std::make_unique<Dense>(4, 1, r), "out");
      Tensor x = rand_x(2, 2, 7, 7);
      check("conv2d_strided", net, x, {1, 0});
    }
    {
      Rng r(3);
      Network net;
      add_layer(net, std::make_unique<BatchNorm>(3), "bn");
      add_layer(net, std::make_unique<GlobalAvgPool>(), "gap");
      add_layer(net, std::make_unique<Dense>(3, 1, r), "out");
      Tensor x = rand_x(4, 3, 5, 5);
      check("batchnorm_train", net, x, {0, 1, 1, 0});
    }
    {
      Rng r(4);
      Network net;
      add_layer(net, std::make_unique<Dense>(6, 5, r), "fc1");
      add_layer(net, std::make_unique<ReLU>(), "relu");
      add_layer(net, std::make_unique<Dense>(5, 1, r), "out");
      Tensor x = rand_x(3, 6, 1, 1);
      check("dense_relu", net, x, {0, 1, 0});
    }
    {
      Rng r(5);
      Network net;
      add_layer(net, std::make_unique<ResidualBlock>(2, 4, 2, r), "res_proj");
      add_layer(net, std::make_unique<GlobalAvgPool>(), "gap");
      add_layer(net, std::make_unique<Dense>(4, 1, r), "out");
      Tensor x = rand_x(2, 2, 8, 8);
      check("residual_projection", net, x, {1, 0});
    }
    {
      Rng r(6);
      Network net;
      add_layer(net, std::make_unique<ResidualBlock>(3, 3, 1, r), "res_id");
      add_layer(net, std::make_unique<GlobalAvgPool>(), "gap");
      add_layer(net, std::make_unique<Dense>(3, 1, r), "out");
      Tensor x = rand_x(2, 3, 6, 6);
      check("residual_identity", net, x, {0, 1});
    }
    add("gradcheck_layers", worst <= 1e-4,
        "max_rel_err=" + detail::fmt(worst) +
            (worst_where.empty() ? "" : " at " + worst_where));
  }

  // Full desk-scale model, parameters sampled across every layer.
  {
    Network net = build_base_model(BackboneConfig::desk(), 23);
    Rng xr(105);
    Tensor x(2, 3, 64, 64);
    for (auto& v : x.v) v = xr.bernoulli(0.5) ? 1.0 : 0.0;
    const FocalLossParams lp = FocalLossParams::inverse_frequency(1, 1, 2.0);
    GradCheckResult r =
        gradcheck_params(net, x, {0, 1}, lp, quick ? 50 : 200, 19);
    add("gradcheck_backbone", r.ok(1e-4) && r.coords_checked >= (quick ? 40u : 150u),
        "max_rel_err=" + detail::fmt(r.max_rel_err) + " checked=" +
            std::to_string(r.coords_checked) + " skipped=" +
            std::to_string(r.coords_skipped));
  }

  // Recurrence matrices: symmetry, unit diagonal, achieved target rate.
  {
    Rng rng(106);
    bool sym_ok = true, rate_ok = true;
    const int n_windows = quick ? 100 : 1000;
    for (int t = 0; t < n_windows; ++t) {
      const int len = 20 + static_cast<int>(rng.below(40));
      std::vector<double> series(len);
      for (auto& v : series) v = rng.uniform(0.4, 1.4);
      EmbeddingParams ep;
      ep.target_rate = 0.05 + 0.2 * rng.u01();
      EmbeddedSeries pts = embed(series, ep);
      RecurrenceMatrix rm = recurrence_matrix(pts, ep);
      for (std::size_t i = 0; i < rm.n && sym_ok; ++i) {
        if (!rm.at(i, i)) sym_ok = false;
        for (std::size_t j = 0; j < rm.n; ++j)
          if (rm.at(i, j) != rm.at(j, i)) sym_ok = false;
      }
      const double n = static_cast<double>(rm.n);
      if (rm.tie_count == 0 &&
          std::fabs(rm.recurrence_rate() - ep.target_rate) > 1.0 / (n * (n - 1)))
        rate_ok = false;
      if (std::fabs(rm.recurrence_rate() - target_rate_oracle(pts, ep.target_rate)) >
          1e-12)
        rate_ok = false;
    }
    add("rqa_matrix_properties", sym_ok && rate_ok,
        sym_ok ? (rate_ok ? "ok" : "rate off") : "asymmetry");
  }

  // Line measures vs the per-cell walk oracle on random symmetric matrices.
  {
    Rng rng(107);
    bool ok = true;
    for (int t = 0; t < 100 && ok; ++t) {
      const std::size_t n = 20;
      RecurrenceMatrix rm;
      rm.n = n;
      rm.bits.assign(n * n, 0);
      for (std::size_t i = 0; i < n; ++i) {
        rm.bits[i * n + i] = 1;
        for (std::size_t j = i + 1; j < n; ++j) {
          const std::uint8_t b = rng.bernoulli(0.25) ? 1 : 0;
          rm.bits[i * n + j] = b;
          rm.bits[j * n + i] = b;
        }
      }
      RqaMeasures q = rqa_measures(rm);
      RqaOracle o = rqa_oracle(rm.bits, n, 2, 2);
      ok = std::fabs(q.recurrence_rate - o.rr) <= 1e-15 &&
           std::fabs(q.determinism - o.det) <= 1e-15 &&
           std::fabs(q.laminarity - o.lam) <= 1e-15 &&
           std::fabs(q.avg_diagonal_length - o.avg_l) <= 1e-15 &&
           q.max_diagonal_length == o.lmax;
    }
    add("rqa_line_oracle", ok, ok ? "exact" : "mismatch");
  }

  // Plausibility filter and interval series against brute force.
  {
    Rng rng(108);
    bool ok = true;
    for (int t = 0; t < 20 && ok; ++t) {
      const int age = 18 + static_cast<int>(rng.below(60));
      std::vector<HrSample> xs;
      for (int i = 0; i < 1000; ++i)
        xs.push_back({static_cast<double>(i), rng.uniform(30.0, 230.0)});
      auto got = filter_plausible(xs, age).kept;
      auto want = filter_oracle(xs, age);
      ok = got.size() == want.size();
      for (std::size_t i = 0; ok && i < got.size(); ++i)
        ok = got[i] == want[i];
    }
    double worst = 0;
    {
      std::vector<HrSample> xs;
      Rng r2(109);
      for (int i = 0; i < 50; ++i)
        xs.push_back({static_cast<double>(i), r2.uniform(45.0, 190.0)});
      RriSeries s = build_rri_series(xs);
      double sum = 0;
      for (std::size_t i = 0; i < s.rri.size(); ++i) {
        if (s.rri[i] != 60.0 / xs[i].hr_bpm) ok = false;
        sum += s.rri[i];
      }
      worst = std::fabs(s.t.back() - sum);
    }
    add("preprocess_filter_rri", ok && worst <= 1e-12,
        "cumsum_err=" + detail::fmt(worst));
  }

  // Window inclusion vs the quadratic scan.
  {
    Rng rng(110);
    Participant p;
    p.id = "P1";
    p.age = 20;
    for (int k = 0; k < 60; ++k) {
      Probe probe;
      probe.id = "p" + std::to_string(k);
      const double start = 300.0 * k + rng.uniform(0.0, 5.0);
      for (int j = 0; j < 30; ++j)
        probe.samples.push_back({start + j, rng.uniform(35.0, 215.0)});
      p.probes.push_back(probe);
    }
    for (int e = 0; e < 40; ++e) {
      EmaResponse ema;
      ema.t_s = rng.uniform(0.0, 300.0 * 62);
      ema.rating = 1 + static_cast<int>(rng.below(10));
      ema.scale_max = 10;
      p.emas.push_back(ema);
    }
    std::sort(p.emas.begin(), p.emas.end(),
              [](const EmaResponse& a, const EmaResponse& b) { return a.t_s < b.t_s; });
    WindowSpec spec{3600.0, 50};
    auto counts = window_counts_oracle(p, spec.length_s);
    std::set<double> expected;
    for (std::size_t i = 0; i < p.emas.size(); ++i)
      if (counts[i] >= spec.min_samples) expected.insert(p.emas[i].t_s);
    auto windows = extract_windows(p, spec);
    std::set<double> got;
    bool sizes_ok = true;
    for (const auto& w : windows) {
      got.insert(w.ema_t_s);
      long expected_count = 0;
      for (std::size_t i = 0; i < p.emas.size(); ++i)
        if (p.emas[i].t_s == w.ema_t_s) expected_count = counts[i];
      sizes_ok = sizes_ok &&
                 static_cast<long>(w.rri_series.size()) == expected_count;
    }
    add("window_inclusion_oracle", got == expected && sizes_ok,
        std::to_string(windows.size()) + " windows");
  }

  // Trait scoring vs the independent oracle, randomized missingness.
  {
    Rng rng(111);
    bool ok = true;
    const auto scales = hrx::detail::default_scales();
    for (int t = 0; t < 50 && ok; ++t) {
      std::vector<TraitItemResponse> items;
      for (const auto& [sid, decl] : scales) {
        for (int j = 1; j <= decl.item_count; ++j) {
          TraitItemResponse it;
          it.scale = sid;
          it.item_index = j;
          it.reverse_scored = rng.bernoulli(0.2);
          if (rng.bernoulli(0.0059) && j > 1) {
            it.value = std::nullopt;
          } else {
            it.value = static_cast<double>(decl.item_min +
                                           static_cast<int>(rng.below(
                                               static_cast<std::uint64_t>(
                                                   decl.item_max - decl.item_min + 1))));
          }
          items.push_back(it);
        }
      }
      TraitProfile got = impute_and_score_traits(items, scales);
      auto want = traits_oracle(items, scales);
      ok = got.scores.size() == want.size();
      for (const auto& [sid, v] : want)
        ok = ok && std::fabs(got.scores.at(sid) - v) <= 1e-9;
    }
    add("imputation_oracle", ok, ok ? "exact" : "mismatch");
  }

  // Fold integrity across seeds, with the exhaustive pair-search oracle.
  {
    bool ok = true;
    const int seeds = quick ? 20 : 100;
    Rng rng(112);
    for (int s = 1; s <= seeds && ok; ++s) {
      std::vector<ParticipantLabelCounts> parts;
      const int n = 9 + static_cast<int>(rng.below(20));
      for (int i = 0; i < n; ++i) {
        ParticipantLabelCounts c;
        c.id = "P" + std::to_string(i);
        c.n0 = 1 + static_cast<long>(rng.below(40));
        c.n1 = 1 + static_cast<long>(rng.below(40));
        parts.push_back(c);
      }
      FoldPlan plan = plan_lfocv(parts, static_cast<std::uint64_t>(s));
      std::map<std::string, int> held;
      for (const auto& fold : plan.folds) {
        std::set<std::string> seen;
        for (const auto& grp : {fold.test, fold.val, fold.train})
          for (const auto& id : grp)
            if (!seen.insert(id).second) ok = false;
        if (seen.size() != parts.size()) ok = false;
        for (const auto& id : fold.test) held[id] += 1;
        if (!fold_pair_oracle(parts, fold, 0.10)) ok = false;
      }
      if (held.size() != parts.size()) ok = false;
      for (const auto& [id, c] : held)
        if (c != 1) ok = false;
    }
    add("fold_integrity", ok, ok ? "partitions + ratio rule hold" : "violation");
  }

  // Leakage audit flags a planted violation.
  {
    std::vector<ParticipantLabelCounts> parts;
    for (int i = 0; i < 10; ++i) parts.push_back({"P" + std::to_string(i), 5, 5});
    FoldPlan tl = plan_lfocv(parts, 3);
    std::vector<std::string> ids;
    for (const auto& p : parts) ids.push_back(p.id);
    FoldPlan meta = plan_loocv(ids);
    std::vector<PredictionRecord> recs;
    for (const auto& fold : tl.folds)
      for (const auto& id : fold.test) {
        PredictionRecord r;
        r.participant_id = id;
        r.ema_t_s = 1;
        r.label = 1;
        r.tl_probability = 0.7;
        r.predicted_class = 1;
        r.fold_id = fold.id;
        r.stage = stage::kTl;
        recs.push_back(r);
      }
    const bool clean_ok = audit_leakage(tl, meta, recs).ok();
    auto corrupted = recs;
    corrupted.front().fold_id = (corrupted.front().fold_id + 1) % 2;
    const bool planted_found = !audit_leakage(tl, meta, corrupted).ok();
    add("leakage_planted", clean_ok && planted_found,
        clean_ok ? (planted_found ? "detected" : "missed planted violation")
                 : "clean run flagged");
  }

  // Restore callback vs the independent rule restatement.
  {
    Rng rng(113);
    bool ok = true;
    for (int t = 0; t < 1000 && ok; ++t) {
      const int n = 1 + static_cast<int>(rng.below(12));
      std::vector<EpochTraceRow> rows;
      std::vector<double> tr, va;
      for (int e = 0; e < n; ++e) {
        EpochTraceRow r;
        r.epoch = e + 1;
        r.train_loss = rng.uniform(0.1, 1.0);
        r.val_loss = r.train_loss * rng.uniform(0.9, 1.15);
        rows.push_back(r);
        tr.push_back(r.train_loss);
        va.push_back(r.val_loss);
      }
      ok = custom_restore(rows, 0.03, true) == restore_rule_oracle(tr, va, 0.03);
    }
    add("callback_rule_oracle", ok, ok ? "1000 traces exact" : "mismatch");
  }

  return results;
}

}  // namespace hrx::oracle

