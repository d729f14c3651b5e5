#pragma once
// Training protocols:
//  * train_base  — phase 1 trains the appended layers (backbone frozen) with
//    SGD, restoring the minimum-validation-loss epoch; phase 2 fine-tunes the
//    whole model at a reduced rate with patience-based early stopping.
//  * tune_head   — freezes the base model through global average pooling,
//    trains the bottleneck head with Nadam, and restores weights via the
//    train/validation-gap tolerance callback.
//  * custom_restore — the callback rule itself, a pure function of the trace.
//
// Frozen regions never receive updates and their batch-norm layers run on
// running statistics even in train mode, so their per-example outputs are
// constant and are cached once per phase.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/eval/records.hpp"
#include "hrx/nn/checkpoint.hpp"
#include "hrx/nn/loss.hpp"
#include "hrx/nn/network.hpp"
#include "hrx/nn/optim.hpp"
#include "hrx/train/examples.hpp"
#include "hrx/util/rng.hpp"

namespace hrx {

struct BaseTrainSchedule {
  double phase1_lr = 1e-4;
  int phase1_max_epochs = 20;
  double phase2_lr = 1e-8;
  int phase2_max_epochs = 50;
  int phase2_patience = 3;
  int batch_size = 32;
  double focal_gamma = 2.0;
  std::uint64_t seed = 1;
};

struct HeadTuneSchedule {
  int hidden = 32;
  double lr = 1e-5;
  int max_epochs = 50;
  double tolerance = 0.03;        // callback delta
  bool tolerance_relative = true; // delta against train loss vs absolute gap
  int batch_size = 32;
  double focal_gamma = 2.0;
  std::uint64_t seed = 1;
};

struct EpochTraceRow {
  int epoch = 0;  // 1-based within the phase
  int phase = 1;
  double train_loss = 0;
  double val_loss = 0;
  int snapshot_id = -1;
  bool selected = false;
};

struct TrainTrace {
  std::vector<EpochTraceRow> rows;
  std::vector<std::vector<double>> snapshots;
};

class TrainingError : public std::runtime_error {
 public:
  explicit TrainingError(const std::string& m) : std::runtime_error(m) {}
};

// Returns the index of the trace row whose snapshot the callback restores.
// With d_e = val_e - train_e: if any epoch has val < train, or a gap beyond
// the tolerance (d_e / train_e > tol when relative, d_e > tol otherwise),
// pick the epoch minimizing |d_e| (earliest on ties); else the last epoch.
inline std::size_t custom_restore(const std::vector<EpochTraceRow>& rows,
                                  double tolerance, bool relative = true) {
  if (rows.empty()) throw std::invalid_argument("custom_restore: empty trace");
  bool triggered = false;
  for (const auto& r : rows) {
    const double d = r.val_loss - r.train_loss;
    if (r.val_loss < r.train_loss) {
      triggered = true;
      break;
    }
    const double gap =
        relative ? (r.train_loss > 0 ? d / r.train_loss
                                     : (d > 0 ? std::numeric_limits<double>::infinity()
                                              : 0.0))
                 : d;
    if (gap > tolerance) {
      triggered = true;
      break;
    }
  }
  if (!triggered) return rows.size() - 1;
  std::size_t best = 0;
  double best_abs = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double a = std::fabs(rows[i].val_loss - rows[i].train_loss);
    if (a < best_abs) {
      best_abs = a;
      best = i;
    }
  }
  return best;
}

namespace detail {

inline void check_finite_loss(double loss, Network& net, const Tensor& x,
                              const char* where) {
  if (std::isfinite(loss)) return;
  // Diagnostic pass: find the first layer producing a non-finite value.
  Tensor cur = x;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    cur = net.layers[i]->forward(cur, Mode::Train);
    if (!cur.all_finite())
      throw TrainingError(std::string(where) + ": non-finite loss; first at layer " +
                          std::to_string(i) + " (" + net.layers[i]->kind() + ", tag " +
                          net.layers[i]->tag + ")");
  }
  throw TrainingError(std::string(where) + ": non-finite loss");
}

// Cached per-example activations at a layer boundary of the frozen region.
inline std::vector<Tensor> cache_boundary(Network& net, std::size_t boundary,
                                          const std::vector<PlotExample>& examples,
                                          const std::vector<std::size_t>& idx,
                                          int channels, int batch_size) {
  std::vector<Tensor> out(idx.size());
  for (std::size_t pos = 0; pos < idx.size(); pos += static_cast<std::size_t>(batch_size)) {
    const std::size_t hi = std::min(idx.size(), pos + static_cast<std::size_t>(batch_size));
    std::vector<std::size_t> chunk(idx.begin() + pos, idx.begin() + hi);
    Tensor x = make_batch(examples, chunk, channels);
    Tensor f = net.forward_range(x, 0, boundary, Mode::Eval);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      Tensor one(1, f.c, f.h, f.w);
      const std::size_t stride = one.numel();
      std::copy(f.v.begin() + b * stride, f.v.begin() + (b + 1) * stride,
                one.v.begin());
      out[pos + b] = std::move(one);
    }
  }
  return out;
}

inline Tensor gather_cached(const std::vector<Tensor>& cache,
                            const std::vector<std::size_t>& order,
                            std::size_t lo, std::size_t hi) {
  const Tensor& first = cache[order[lo]];
  Tensor x(static_cast<int>(hi - lo), first.c, first.h, first.w);
  const std::size_t stride = first.numel();
  for (std::size_t b = lo; b < hi; ++b)
    std::copy(cache[order[b]].v.begin(), cache[order[b]].v.end(),
              x.v.begin() + (b - lo) * stride);
  return x;
}

struct PhaseData {
  // Either cached boundary activations or raw plot batches.
  const std::vector<Tensor>* cache = nullptr;  // indexed by position in idx
  const std::vector<PlotExample>* examples = nullptr;
  const std::vector<std::size_t>* idx = nullptr;
  int channels = 3;
};

inline Tensor phase_batch(const PhaseData& d, const std::vector<std::size_t>& order,
                          std::size_t lo, std::size_t hi) {
  if (d.cache) return gather_cached(*d.cache, order, lo, hi);
  std::vector<std::size_t> chunk;
  chunk.reserve(hi - lo);
  for (std::size_t b = lo; b < hi; ++b) chunk.push_back((*d.idx)[order[b]]);
  return make_batch(*d.examples, chunk, d.channels);
}

// One training phase over a sub-range [lo_layer, L) of the network.
// Returns per-epoch train/val losses and snapshots of the full model state.
struct PhaseResult {
  std::vector<EpochTraceRow> rows;
  std::vector<std::vector<double>> snapshots;
};

struct PhaseSpec {
  OptimizerConfig optimizer;
  int max_epochs = 0;
  int batch_size = 32;
  int phase_tag = 1;
  std::uint64_t shuffle_seed = 1;
};

inline PhaseResult run_phase(Network& net, std::size_t lo_layer,
                             const PhaseData& train_data,
                             const std::vector<int>& train_labels,
                             const PhaseData& val_data,
                             const std::vector<int>& val_labels,
                             const FocalLossParams& lp, const PhaseSpec& spec) {
  PhaseResult res;
  const std::size_t n_train = train_labels.size();
  const std::size_t n_val = val_labels.size();
  const std::size_t L = net.layers.size();
  Optimizer opt(spec.optimizer);
  std::vector<ParamRef> trainable = net.trainable_params();

  auto eval_loss = [&](const PhaseData& d, const std::vector<int>& labels) {
    double sum = 0;
    std::vector<std::size_t> order(labels.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t pos = 0; pos < labels.size();
         pos += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t hi =
          std::min(labels.size(), pos + static_cast<std::size_t>(spec.batch_size));
      Tensor x = phase_batch(d, order, pos, hi);
      Tensor logits = net.forward_range(x, lo_layer, L, Mode::Eval);
      std::vector<int> yl(labels.begin() + pos, labels.begin() + hi);
      sum += focal_loss_from_logits(logits, yl, lp).loss *
             static_cast<double>(hi - pos);
    }
    return sum / static_cast<double>(labels.size());
  };

  for (int epoch = 1; epoch <= spec.max_epochs; ++epoch) {
    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
    Rng erng(derive_seed(spec.shuffle_seed, static_cast<std::uint64_t>(
                                                spec.phase_tag * 1000 + epoch)));
    erng.shuffle(order);

    double loss_sum = 0;
    for (std::size_t pos = 0; pos < n_train;
         pos += static_cast<std::size_t>(spec.batch_size)) {
      const std::size_t hi =
          std::min(n_train, pos + static_cast<std::size_t>(spec.batch_size));
      Tensor x = phase_batch(train_data, order, pos, hi);
      std::vector<int> yl;
      yl.reserve(hi - pos);
      for (std::size_t b = pos; b < hi; ++b) yl.push_back(train_labels[order[b]]);
      net.zero_grad();
      Tensor logits = net.forward_range(x, lo_layer, L, Mode::Train);
      LossResult lr = focal_loss_from_logits(logits, yl, lp);
      check_finite_loss(lr.loss, net, x, "train step");
      net.backward_range(lr.dlogit, lo_layer, L);
      opt.step(trainable);
      loss_sum += lr.loss * static_cast<double>(hi - pos);
    }

    EpochTraceRow row;
    row.epoch = epoch;
    row.phase = spec.phase_tag;
    row.train_loss = loss_sum / static_cast<double>(n_train);
    row.val_loss = n_val > 0 ? eval_loss(val_data, val_labels) : row.train_loss;
    row.snapshot_id = static_cast<int>(res.snapshots.size());
    res.snapshots.push_back(net.state());
    res.rows.push_back(row);
  }
  return res;
}

inline std::size_t min_val_row(const std::vector<EpochTraceRow>& rows) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].val_loss < rows[best].val_loss) best = i;
  return best;
}

inline std::size_t layer_index_of_tag(const Network& net, const std::string& tag) {
  for (std::size_t i = 0; i < net.layers.size(); ++i)
    if (net.layers[i]->tag == tag) return i;
  throw std::invalid_argument("network has no layer tagged " + tag);
}

constexpr std::size_t kCacheBudgetBytes = 1ULL << 30;

}  // namespace detail

// Two-phase base-model training. The model is modified in place; the trace
// covers both phases and marks the restored epochs.
inline TrainTrace train_base(Network& net, const std::vector<PlotExample>& examples,
                             const std::vector<std::size_t>& train_idx,
                             const std::vector<std::size_t>& val_idx,
                             const BaseTrainSchedule& sched, int input_channels) {
  assert_participant_disjoint(examples, train_idx, val_idx, "train_base");
  if (train_idx.empty()) throw std::invalid_argument("train_base: no training data");

  const std::vector<int> train_labels = gather_labels(examples, train_idx);
  const std::vector<int> val_labels = gather_labels(examples, val_idx);
  long n1 = 0;
  for (int y : train_labels) n1 += y;
  const long n0 = static_cast<long>(train_labels.size()) - n1;
  FocalLossParams lp;
  if (n0 > 0 && n1 > 0) {
    lp = FocalLossParams::inverse_frequency(n0, n1, sched.focal_gamma);
  } else {
    lp.gamma = sched.focal_gamma;  // single-class training pool; flagged upstream
  }

  TrainTrace trace;
  const std::size_t extra_at = detail::layer_index_of_tag(net, "extra");

  // Running batch-norm buffers start at their init values; freezing a
  // freshly initialized backbone would normalize with statistics unrelated
  // to the actual activations. Two forward-only passes in train mode settle
  // the running buffers before anything is frozen (momentum 0.1 converges to
  // ~1% residual over ~50 batches).
  net.unfreeze_all();
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t pos = 0; pos < train_idx.size();
         pos += static_cast<std::size_t>(sched.batch_size)) {
      const std::size_t hi =
          std::min(train_idx.size(), pos + static_cast<std::size_t>(sched.batch_size));
      std::vector<std::size_t> chunk(train_idx.begin() + pos, train_idx.begin() + hi);
      net.forward(make_batch(examples, chunk, input_channels), Mode::Train);
    }
  }

  // Phase 1: appended layers only.
  net.freeze_where([](const std::string& tag) {
    return tag == "stem" || tag.rfind("stage", 0) == 0;
  });
  if (sched.phase1_max_epochs > 0) {
    detail::PhaseData train_d, val_d;
    train_d.examples = &examples;
    train_d.idx = &train_idx;
    train_d.channels = input_channels;
    val_d.examples = &examples;
    val_d.idx = &val_idx;
    val_d.channels = input_channels;

    // The frozen prefix is deterministic per example; cache its outputs when
    // they fit in memory.
    std::vector<Tensor> train_cache, val_cache;
    {
      Tensor probe = make_batch(examples, {train_idx[0]}, input_channels);
      Tensor f = net.forward_range(probe, 0, extra_at, Mode::Eval);
      const std::size_t bytes_each = f.numel() * sizeof(double);
      if (bytes_each * (train_idx.size() + val_idx.size()) <
          detail::kCacheBudgetBytes) {
        train_cache = detail::cache_boundary(net, extra_at, examples, train_idx,
                                             input_channels, sched.batch_size);
        val_cache = detail::cache_boundary(net, extra_at, examples, val_idx,
                                           input_channels, sched.batch_size);
        train_d.cache = &train_cache;
        val_d.cache = &val_cache;
      }
    }
    const std::size_t lo_layer = train_d.cache ? extra_at : 0;

    detail::PhaseSpec spec;
    spec.optimizer = OptimizerConfig::sgd(sched.phase1_lr);
    spec.max_epochs = sched.phase1_max_epochs;
    spec.batch_size = sched.batch_size;
    spec.phase_tag = 1;
    spec.shuffle_seed = sched.seed;
    detail::PhaseResult r = detail::run_phase(net, lo_layer, train_d, train_labels,
                                              val_d, val_labels, lp, spec);
    const std::size_t best = detail::min_val_row(r.rows);
    net.set_state(r.snapshots[r.rows[best].snapshot_id]);
    r.rows[best].selected = true;
    for (auto& row : r.rows) {
      row.snapshot_id += static_cast<int>(trace.snapshots.size());
      trace.rows.push_back(row);
    }
    for (auto& s : r.snapshots) trace.snapshots.push_back(std::move(s));
  }

  // Phase 2: all layers, reduced rate, early stop on stalled validation loss.
  net.unfreeze_all();
  if (sched.phase2_max_epochs > 0) {
    detail::PhaseData train_d, val_d;
    train_d.examples = &examples;
    train_d.idx = &train_idx;
    train_d.channels = input_channels;
    val_d.examples = &examples;
    val_d.idx = &val_idx;
    val_d.channels = input_channels;

    detail::PhaseSpec spec;
    spec.optimizer = OptimizerConfig::sgd(sched.phase2_lr);
    spec.max_epochs = 1;  // driven one epoch at a time for early stopping
    spec.batch_size = sched.batch_size;
    spec.phase_tag = 2;
    spec.shuffle_seed = sched.seed;

    std::vector<EpochTraceRow> rows;
    std::vector<std::vector<double>> snapshots;
    double best_val = std::numeric_limits<double>::infinity();
    int since_best = 0;
    Optimizer opt(spec.optimizer);
    std::vector<ParamRef> trainable = net.trainable_params();
    const std::size_t L = net.layers.size();
    for (int epoch = 1; epoch <= sched.phase2_max_epochs; ++epoch) {
      std::vector<std::size_t> order(train_idx.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      Rng erng(derive_seed(sched.seed, static_cast<std::uint64_t>(2000 + epoch)));
      erng.shuffle(order);
      double loss_sum = 0;
      for (std::size_t pos = 0; pos < order.size();
           pos += static_cast<std::size_t>(sched.batch_size)) {
        const std::size_t hi =
            std::min(order.size(), pos + static_cast<std::size_t>(sched.batch_size));
        Tensor x = detail::phase_batch(train_d, order, pos, hi);
        std::vector<int> yl;
        for (std::size_t b = pos; b < hi; ++b)
          yl.push_back(train_labels[order[b]]);
        net.zero_grad();
        Tensor logits = net.forward_range(x, 0, L, Mode::Train);
        LossResult lr = focal_loss_from_logits(logits, yl, lp);
        detail::check_finite_loss(lr.loss, net, x, "fine-tune step");
        net.backward_range(lr.dlogit, 0, L);
        opt.step(trainable);
        loss_sum += lr.loss * static_cast<double>(hi - pos);
      }
      EpochTraceRow row;
      row.epoch = epoch;
      row.phase = 2;
      row.train_loss = loss_sum / static_cast<double>(train_idx.size());
      {
        double sum = 0;
        std::vector<std::size_t> vorder(val_idx.size());
        for (std::size_t i = 0; i < vorder.size(); ++i) vorder[i] = i;
        for (std::size_t pos = 0; pos < val_idx.size();
             pos += static_cast<std::size_t>(sched.batch_size)) {
          const std::size_t hi = std::min(val_idx.size(),
                                          pos + static_cast<std::size_t>(sched.batch_size));
          Tensor x = detail::phase_batch(val_d, vorder, pos, hi);
          Tensor logits = net.forward_range(x, 0, L, Mode::Eval);
          std::vector<int> yl(val_labels.begin() + pos, val_labels.begin() + hi);
          sum += focal_loss_from_logits(logits, yl, lp).loss *
                 static_cast<double>(hi - pos);
        }
        row.val_loss = val_idx.empty() ? row.train_loss
                                       : sum / static_cast<double>(val_idx.size());
      }
      row.snapshot_id = static_cast<int>(snapshots.size());
      snapshots.push_back(net.state());
      rows.push_back(row);
      if (row.val_loss < best_val) {
        best_val = row.val_loss;
        since_best = 0;
      } else if (++since_best >= sched.phase2_patience) {
        break;
      }
    }
    if (!rows.empty()) {
      const std::size_t best = detail::min_val_row(rows);
      net.set_state(snapshots[rows[best].snapshot_id]);
      rows[best].selected = true;
      for (auto& row : rows) {
        row.snapshot_id += static_cast<int>(trace.snapshots.size());
        trace.rows.push_back(row);
      }
      for (auto& s : snapshots) trace.snapshots.push_back(std::move(s));
    }
  }
  return trace;
}

struct HeadTuneResult {
  Network adapted;  // base through pooling + trained head
  TrainTrace trace;
  std::size_t restored_row = 0;
};

// Freezes the base model, trains a fresh bottleneck head on the pooled
// features, and restores weights per the tolerance callback.
inline HeadTuneResult tune_head(const Network& base,
                                const std::vector<PlotExample>& examples,
                                const std::vector<std::size_t>& train_idx,
                                const std::vector<std::size_t>& val_idx,
                                const HeadTuneSchedule& sched, int input_channels) {
  assert_participant_disjoint(examples, train_idx, val_idx, "tune_head");
  if (train_idx.empty()) throw std::invalid_argument("tune_head: no training data");

  Network frozen_base = base;
  frozen_base.freeze_where([](const std::string&) { return true; });
  const std::size_t boundary = gap_boundary(frozen_base);
  const int feat_dim = [&] {
    Tensor probe = make_batch(examples, {train_idx[0]}, input_channels);
    Tensor f = frozen_base.forward_range(probe, 0, boundary, Mode::Eval);
    return f.c;
  }();

  std::vector<Tensor> train_feat = detail::cache_boundary(
      frozen_base, boundary, examples, train_idx, input_channels, sched.batch_size);
  std::vector<Tensor> val_feat = detail::cache_boundary(
      frozen_base, boundary, examples, val_idx, input_channels, sched.batch_size);

  Network head = build_head(feat_dim, sched.hidden, sched.seed);

  const std::vector<int> train_labels = gather_labels(examples, train_idx);
  const std::vector<int> val_labels = gather_labels(examples, val_idx);
  long n1 = 0;
  for (int y : train_labels) n1 += y;
  const long n0 = static_cast<long>(train_labels.size()) - n1;
  FocalLossParams lp;
  if (n0 > 0 && n1 > 0)
    lp = FocalLossParams::inverse_frequency(n0, n1, sched.focal_gamma);
  else
    lp.gamma = sched.focal_gamma;

  detail::PhaseData train_d, val_d;
  train_d.cache = &train_feat;
  val_d.cache = &val_feat;

  detail::PhaseSpec spec;
  spec.optimizer = OptimizerConfig::nadam(sched.lr);
  spec.max_epochs = sched.max_epochs;
  spec.batch_size = sched.batch_size;
  spec.phase_tag = 1;
  spec.shuffle_seed = sched.seed;
  detail::PhaseResult r = detail::run_phase(head, 0, train_d, train_labels, val_d,
                                            val_labels, lp, spec);

  HeadTuneResult out;
  if (!r.rows.empty()) {
    const std::size_t chosen = custom_restore(r.rows, sched.tolerance,
                                              sched.tolerance_relative);
    head.set_state(r.snapshots[r.rows[chosen].snapshot_id]);
    r.rows[chosen].selected = true;
    out.restored_row = chosen;
  }
  out.trace.rows = std::move(r.rows);
  out.trace.snapshots = std::move(r.snapshots);
  out.adapted = compose_adapted(base, head);
  return out;
}

// Eval-mode probabilities with provenance. Batched and one-at-a-time
// inference agree exactly: samples are independent inside a batch.
inline std::vector<PredictionRecord> predict_probabilities(
    Network& model, const std::vector<PlotExample>& examples,
    const std::vector<std::size_t>& idx, int fold_id, const std::string& stage_tag,
    int input_channels, int batch_size = 64) {
  std::vector<PredictionRecord> out;
  out.reserve(idx.size());
  char hash_hex[32];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(model.state_hash()));
  for (std::size_t pos = 0; pos < idx.size();
       pos += static_cast<std::size_t>(batch_size)) {
    const std::size_t hi = std::min(idx.size(), pos + static_cast<std::size_t>(batch_size));
    std::vector<std::size_t> chunk(idx.begin() + pos, idx.begin() + hi);
    Tensor x = make_batch(examples, chunk, input_channels);
    Tensor logits = model.forward(x, Mode::Eval);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      const PlotExample& ex = examples[chunk[b]];
      PredictionRecord rec;
      rec.participant_id = ex.participant_id;
      rec.ema_t_s = ex.ema_t_s;
      rec.label = ex.label;
      rec.tl_probability = clamp_prob(sigmoid(logits.v[b]));
      rec.predicted_class = rec.tl_probability >= 0.5 ? 1 : 0;
      rec.fold_id = fold_id;
      rec.stage = stage_tag;
      rec.model_hash = hash_hex;
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace hrx
