#pragma once
// Central finite-difference verification of the analytic gradients. The
// numeric side only ever calls forward() and the loss, so it is independent
// of the reverse-mode implementation it checks.
//
// Central differences are only meaningful where the loss is smooth over the
// probe interval. The checker therefore compares the activation decision
// masks of the two probe forwards and resamples any coordinate whose
// interval crosses a ReLU kink (their fraction is reported).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hrx/nn/loss.hpp"
#include "hrx/nn/network.hpp"
#include "hrx/util/rng.hpp"

namespace hrx {

struct GradCheckResult {
  double max_rel_err = 0;
  std::size_t coords_checked = 0;
  std::size_t coords_skipped = 0;  // probe interval crossed an activation kink
  std::string worst_param;
  double worst_analytic = 0, worst_numeric = 0;

  bool ok(double tol = 1e-4) const {
    return coords_checked > 0 && max_rel_err <= tol;
  }
};

namespace detail {

inline double rel_err(double a, double n) {
  const double denom = std::max({std::fabs(a), std::fabs(n), 1e-6});
  return std::fabs(a - n) / denom;
}

inline std::vector<std::uint8_t> decision_masks(const Network& net) {
  std::vector<const std::vector<std::uint8_t>*> ms;
  for (const auto& l : net.layers) l->collect_masks(ms);
  std::vector<std::uint8_t> flat;
  for (const auto* m : ms) flat.insert(flat.end(), m->begin(), m->end());
  return flat;
}

}  // namespace detail

// Verifies d(loss)/d(theta) on up to n_coords parameter coordinates sampled
// across all trainable parameters. h is relative: h_i = h_rel * (|w_i| + 1).
inline GradCheckResult gradcheck_params(Network& net, const Tensor& x,
                                        const std::vector<int>& labels,
                                        const FocalLossParams& lp, int n_coords,
                                        std::uint64_t seed, double h_rel = 1e-4) {
  auto loss_at = [&]() {
    Tensor logits = net.forward(x, Mode::Train);
    return focal_loss_from_logits(logits, labels, lp).loss;
  };

  net.zero_grad();
  Tensor logits = net.forward(x, Mode::Train);
  LossResult lr = focal_loss_from_logits(logits, labels, lp);
  net.backward(lr.dlogit);

  std::vector<ParamRef> params = net.trainable_params();
  std::vector<double> analytic_copy;  // grads survive the probe forwards
  std::vector<std::size_t> offsets;
  std::size_t total = 0;
  for (const auto& p : params) {
    offsets.push_back(total);
    analytic_copy.insert(analytic_copy.end(), p.g->begin(), p.g->end());
    total += p.w->size();
  }

  GradCheckResult res;
  if (total == 0) return res;
  Rng rng(seed);
  const std::size_t want = static_cast<std::size_t>(n_coords);
  const std::size_t max_attempts = want * 4 + 16;
  for (std::size_t attempt = 0;
       attempt < max_attempts && res.coords_checked < want; ++attempt) {
    std::size_t flat = static_cast<std::size_t>(rng.below(total));
    std::size_t pi = 0;
    while (flat >= offsets[pi] + params[pi].w->size()) ++pi;
    const std::size_t local = flat - offsets[pi];
    double& w = (*params[pi].w)[local];
    const double analytic = analytic_copy[flat];
    const double orig = w;
    const double h = h_rel * (std::fabs(orig) + 1.0);
    w = orig + h;
    const double lp_ = loss_at();
    std::vector<std::uint8_t> masks_p = detail::decision_masks(net);
    w = orig - h;
    const double lm_ = loss_at();
    std::vector<std::uint8_t> masks_m = detail::decision_masks(net);
    w = orig;
    if (masks_p != masks_m) {
      ++res.coords_skipped;
      continue;
    }
    const double numeric = (lp_ - lm_) / (2.0 * h);
    const double e = detail::rel_err(analytic, numeric);
    ++res.coords_checked;
    if (e > res.max_rel_err) {
      res.max_rel_err = e;
      res.worst_param = params[pi].name + "[" + std::to_string(local) + "]";
      res.worst_analytic = analytic;
      res.worst_numeric = numeric;
    }
  }
  return res;
}

// Verifies d(loss)/d(x) returned by backward() against finite differences on
// the input tensor.
inline GradCheckResult gradcheck_input(Network& net, const Tensor& x,
                                       const std::vector<int>& labels,
                                       const FocalLossParams& lp, int n_coords,
                                       std::uint64_t seed, double h_rel = 1e-4) {
  auto loss_for = [&](const Tensor& in) {
    Tensor logits = net.forward(in, Mode::Train);
    return focal_loss_from_logits(logits, labels, lp).loss;
  };

  net.zero_grad();
  Tensor logits = net.forward(x, Mode::Train);
  LossResult lr = focal_loss_from_logits(logits, labels, lp);
  Tensor dx = net.backward(lr.dlogit);

  GradCheckResult res;
  Rng rng(seed);
  Tensor probe = x;
  const std::size_t want = static_cast<std::size_t>(n_coords);
  const std::size_t max_attempts = want * 4 + 16;
  for (std::size_t attempt = 0;
       attempt < max_attempts && res.coords_checked < want; ++attempt) {
    const std::size_t i = static_cast<std::size_t>(rng.below(x.numel()));
    const double orig = probe.v[i];
    const double h = h_rel * (std::fabs(orig) + 1.0);
    probe.v[i] = orig + h;
    const double lp_ = loss_for(probe);
    std::vector<std::uint8_t> masks_p = detail::decision_masks(net);
    probe.v[i] = orig - h;
    const double lm_ = loss_for(probe);
    std::vector<std::uint8_t> masks_m = detail::decision_masks(net);
    probe.v[i] = orig;
    if (masks_p != masks_m) {
      ++res.coords_skipped;
      continue;
    }
    const double numeric = (lp_ - lm_) / (2.0 * h);
    const double e = detail::rel_err(dx.v[i], numeric);
    ++res.coords_checked;
    if (e > res.max_rel_err) {
      res.max_rel_err = e;
      res.worst_param = "input[" + std::to_string(i) + "]";
      res.worst_analytic = dx.v[i];
      res.worst_numeric = numeric;
    }
  }
  return res;
}

// Smallest |pre-activation| across all ReLU decisions in the net for this
// batch.
inline double kink_margin(Network& net, const Tensor& x) {
  net.forward(x, Mode::Train);
  double margin = 1e300;
  for (const auto& l : net.layers) margin = std::min(margin, l->kink_margin());
  return margin;
}

}  // namespace hrx
