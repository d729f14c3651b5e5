#pragma once
// Plain SGD and Nadam (Adam moments with Nesterov lookahead, bias-corrected).

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/nn/layers.hpp"

namespace hrx {

struct OptimizerConfig {
  enum Kind { SGD, Nadam };
  Kind kind = SGD;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerConfig sgd(double lr) { return {SGD, lr}; }
  static OptimizerConfig nadam(double lr) { return {Nadam, lr}; }
};

// Holds moment buffers positionally for a fixed parameter list; construct one
// instance per training phase.
class Optimizer {
 public:
  explicit Optimizer(const OptimizerConfig& cfg) : cfg_(cfg) {
    if (cfg.lr < 0) throw std::invalid_argument("optimizer: lr must be >= 0");
  }

  const OptimizerConfig& config() const { return cfg_; }
  long steps_taken() const { return t_; }

  void step(const std::vector<ParamRef>& params) {
    if (cfg_.kind == OptimizerConfig::SGD) {
      for (const auto& p : params)
        for (std::size_t i = 0; i < p.w->size(); ++i)
          (*p.w)[i] -= cfg_.lr * (*p.g)[i];
      ++t_;
      return;
    }
    if (m_.empty()) {
      for (const auto& p : params) {
        m_.emplace_back(p.w->size(), 0.0);
        v_.emplace_back(p.w->size(), 0.0);
      }
    }
    if (m_.size() != params.size())
      throw std::invalid_argument("optimizer: parameter list changed");
    ++t_;
    const double b1 = cfg_.beta1, b2 = cfg_.beta2;
    const double bc1_next = 1.0 - std::pow(b1, static_cast<double>(t_ + 1));
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto& w = *params[k].w;
      auto& g = *params[k].g;
      auto& m = m_[k];
      auto& v = v_[k];
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double m_hat = m[i] / bc1_next;
        const double v_hat = v[i] / bc2;
        const double lookahead = b1 * m_hat + (1.0 - b1) * g[i] / bc1;
        w[i] -= cfg_.lr * lookahead / (std::sqrt(v_hat) + cfg_.eps);
      }
    }
  }

  // Moment buffers, exposed for checkpointing.
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  void restore(long t, std::vector<std::vector<double>> m,
               std::vector<std::vector<double>> v) {
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

 private:
  OptimizerConfig cfg_;
  long t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace hrx
