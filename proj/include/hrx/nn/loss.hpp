#pragma once
// Weighted binary focal loss on a single-logit output. Probabilities are
// clamped away from {0, 1} so the log terms are total; gamma = 0 with unit
// weights reduces exactly to binary cross-entropy.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hrx/nn/tensor.hpp"

namespace hrx {

inline constexpr double kProbClamp = 1e-7;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double clamp_prob(double p) {
  if (p < kProbClamp) return kProbClamp;
  if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return p;
}

struct FocalLossParams {
  double gamma = 2.0;
  double w0 = 1.0;
  double w1 = 1.0;

  // w_c = N / (2 N_c), the inverse-frequency weighting.
  static FocalLossParams inverse_frequency(long n0, long n1, double gamma = 2.0) {
    if (n0 <= 0 || n1 <= 0)
      throw std::invalid_argument("focal loss: both classes must be present");
    const double n = static_cast<double>(n0 + n1);
    return {gamma, n / (2.0 * static_cast<double>(n0)),
            n / (2.0 * static_cast<double>(n1))};
  }
};

// Per-sample loss at probability p with label y:
//   y = 1:  -w1 (1-p)^g log p
//   y = 0:  -w0 p^g log(1-p)
inline double focal_loss_sample(double p, int y, const FocalLossParams& lp) {
  p = clamp_prob(p);
  if (y == 1) return -lp.w1 * std::pow(1.0 - p, lp.gamma) * std::log(p);
  return -lp.w0 * std::pow(p, lp.gamma) * std::log(1.0 - p);
}

// d(loss)/d(logit) for p = sigmoid(logit); exact for the clamped interior.
inline double focal_loss_dlogit(double p, int y, const FocalLossParams& lp) {
  p = clamp_prob(p);
  const double g = lp.gamma;
  if (y == 1)
    return lp.w1 * std::pow(1.0 - p, g) * (g * p * std::log(p) - (1.0 - p));
  return lp.w0 * std::pow(p, g) * (p - g * (1.0 - p) * std::log(1.0 - p));
}

struct LossResult {
  double loss = 0;                // mean over the batch
  std::vector<double> prob;       // clamped probabilities
  Tensor dlogit;                  // (N, 1); includes the 1/N mean factor
};

inline LossResult focal_loss_from_logits(const Tensor& logits,
                                         const std::vector<int>& labels,
                                         const FocalLossParams& lp) {
  if (logits.c != 1 || logits.h != 1 || logits.w != 1)
    throw std::invalid_argument("focal loss expects (N,1) logits");
  if (static_cast<std::size_t>(logits.n) != labels.size())
    throw std::invalid_argument("focal loss: label count mismatch");
  LossResult r;
  r.dlogit = Tensor::matrix(logits.n, 1);
  r.prob.resize(labels.size());
  const double inv_n = 1.0 / static_cast<double>(logits.n);
  for (int i = 0; i < logits.n; ++i) {
    const double p = clamp_prob(sigmoid(logits.v[static_cast<std::size_t>(i)]));
    r.prob[static_cast<std::size_t>(i)] = p;
    r.loss += focal_loss_sample(p, labels[static_cast<std::size_t>(i)], lp) * inv_n;
    r.dlogit.v[static_cast<std::size_t>(i)] =
        focal_loss_dlogit(p, labels[static_cast<std::size_t>(i)], lp) * inv_n;
  }
  return r;
}

}  // namespace hrx
