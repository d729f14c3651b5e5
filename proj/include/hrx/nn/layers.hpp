#pragma once
// Network layers with exact reverse-mode gradients: 2-D convolution, batch
// normalization (train/eval statistics), ReLU, dense, global average pooling,
// and the residual block. Layers cache what backward needs during forward.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/nn/tensor.hpp"
#include "hrx/util/rng.hpp"

namespace hrx {

enum class Mode { Train, Eval };

struct ParamRef {
  std::vector<double>* w = nullptr;
  std::vector<double>* g = nullptr;
  std::string name;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, Mode mode) = 0;
  virtual Tensor backward(const Tensor& dy) = 0;
  virtual std::unique_ptr<Layer> clone() const = 0;
  virtual const char* kind() const = 0;

  // Trainable parameters (weights); `state` additionally covers persistent
  // non-trainable buffers (batch-norm running statistics).
  virtual void collect_params(std::vector<ParamRef>& out, const std::string& prefix) {}
  virtual void collect_state(std::vector<std::vector<double>*>& out) {}
  virtual void set_frozen(bool f) { frozen = f; }

  void zero_grad() {
    std::vector<ParamRef> ps;
    collect_params(ps, "");
    for (auto& p : ps) std::fill(p.g->begin(), p.g->end(), 0.0);
  }

  // Smallest |pre-activation| that hit a non-differentiable decision during
  // the last forward; finite-difference checks require a margin larger than
  // the probe step.
  virtual double kink_margin() const { return 1e300; }

  // Activation decision masks from the last forward, for detecting probe
  // intervals that cross a kink.
  virtual void collect_masks(std::vector<const std::vector<std::uint8_t>*>& out) const {}

  std::string tag;     // architecture region ("stem", "stage1", "extra", ...)
  bool frozen = false;
};

namespace detail {

inline int floor_div(int a, int b) {  // b > 0
  return a >= 0 ? a / b : -((-a + b - 1) / b);
}
inline int ceil_div(int a, int b) { return floor_div(a + b - 1, b); }

inline void he_uniform(std::vector<double>& w, int fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (double& x : w) x = rng.uniform(-limit, limit);
}

}  // namespace detail

class Conv2d : public Layer {
 public:
  Conv2d(int in_c, int out_c, int kernel, int stride, int pad, bool bias, Rng& rng)
      : in_c_(in_c), out_c_(out_c), k_(kernel), stride_(stride), pad_(pad),
        has_bias_(bias),
        w_(static_cast<std::size_t>(out_c) * in_c * kernel * kernel),
        gw_(w_.size()), b_(bias ? out_c : 0, 0.0), gb_(b_.size(), 0.0) {
    detail::he_uniform(w_, in_c * kernel * kernel, rng);
  }

  const char* kind() const override { return "conv2d"; }
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<Conv2d>(*this);
  }

  Tensor forward(const Tensor& x, Mode) override {
    if (x.c != in_c_)
      throw std::invalid_argument("conv2d: input channels " + std::to_string(x.c) +
                                  " != " + std::to_string(in_c_));
    x_ = x;
    const int oh = (x.h + 2 * pad_ - k_) / stride_ + 1;
    const int ow = (x.w + 2 * pad_ - k_) / stride_ + 1;
    Tensor y(x.n, out_c_, oh, ow);
    for (int n = 0; n < x.n; ++n) {
      for (int oc = 0; oc < out_c_; ++oc) {
        if (has_bias_) {
          double* base = y.row(n, oc, 0);
          const double bias = b_[static_cast<std::size_t>(oc)];
          for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i)
            base[i] = bias;
        }
        for (int ic = 0; ic < in_c_; ++ic) {
          for (int kh = 0; kh < k_; ++kh) {
            const int r_lo = std::max(0, detail::ceil_div(pad_ - kh, stride_));
            const int r_hi =
                std::min(oh - 1, detail::floor_div(x.h - 1 + pad_ - kh, stride_));
            for (int kw = 0; kw < k_; ++kw) {
              const double wv = weight(oc, ic, kh, kw);
              if (wv == 0.0) continue;
              const int c_lo = std::max(0, detail::ceil_div(pad_ - kw, stride_));
              const int c_hi =
                  std::min(ow - 1, detail::floor_div(x.w - 1 + pad_ - kw, stride_));
              for (int r = r_lo; r <= r_hi; ++r) {
                const double* xrow = x.row(n, ic, r * stride_ - pad_ + kh);
                double* yrow = y.row(n, oc, r);
                const int off = -pad_ + kw;
                for (int cc = c_lo; cc <= c_hi; ++cc)
                  yrow[cc] += wv * xrow[cc * stride_ + off];
              }
            }
          }
        }
      }
    }
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    const Tensor& x = x_;
    Tensor dx(x.n, x.c, x.h, x.w);
    const int oh = dy.h, ow = dy.w;
    for (int n = 0; n < x.n; ++n) {
      for (int oc = 0; oc < out_c_; ++oc) {
        if (has_bias_) {
          const double* drow = dy.row(n, oc, 0);
          double s = 0;
          for (std::size_t i = 0; i < static_cast<std::size_t>(oh) * ow; ++i)
            s += drow[i];
          gb_[static_cast<std::size_t>(oc)] += s;
        }
        for (int ic = 0; ic < in_c_; ++ic) {
          for (int kh = 0; kh < k_; ++kh) {
            const int r_lo = std::max(0, detail::ceil_div(pad_ - kh, stride_));
            const int r_hi =
                std::min(oh - 1, detail::floor_div(x.h - 1 + pad_ - kh, stride_));
            for (int kw = 0; kw < k_; ++kw) {
              const int c_lo = std::max(0, detail::ceil_div(pad_ - kw, stride_));
              const int c_hi =
                  std::min(ow - 1, detail::floor_div(x.w - 1 + pad_ - kw, stride_));
              const double wv = weight(oc, ic, kh, kw);
              double acc = 0;
              const int off = -pad_ + kw;
              for (int r = r_lo; r <= r_hi; ++r) {
                const double* xrow = x.row(n, ic, r * stride_ - pad_ + kh);
                double* dxrow = dx.row(n, ic, r * stride_ - pad_ + kh);
                const double* dyrow = dy.row(n, oc, r);
                for (int cc = c_lo; cc <= c_hi; ++cc) {
                  const double d = dyrow[cc];
                  acc += d * xrow[cc * stride_ + off];
                  dxrow[cc * stride_ + off] += wv * d;
                }
              }
              grad_weight(oc, ic, kh, kw) += acc;
            }
          }
        }
      }
    }
    return dx;
  }

  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override {
    out.push_back({&w_, &gw_, prefix + "conv.w"});
    if (has_bias_) out.push_back({&b_, &gb_, prefix + "conv.b"});
  }
  void collect_state(std::vector<std::vector<double>*>& out) override {
    out.push_back(&w_);
    if (has_bias_) out.push_back(&b_);
  }

  std::vector<double>& weights() { return w_; }
  std::vector<double>& bias() { return b_; }

 private:
  double& weight(int oc, int ic, int kh, int kw) {
    return w_[((static_cast<std::size_t>(oc) * in_c_ + ic) * k_ + kh) * k_ + kw];
  }
  double& grad_weight(int oc, int ic, int kh, int kw) {
    return gw_[((static_cast<std::size_t>(oc) * in_c_ + ic) * k_ + kh) * k_ + kw];
  }

  int in_c_, out_c_, k_, stride_, pad_;
  bool has_bias_;
  std::vector<double> w_, gw_, b_, gb_;
  Tensor x_;
};

// Normalizes per channel over (N, H, W); covers both 2-D feature maps and
// (N, F) feature matrices. Train mode uses batch statistics (biased variance)
// and updates running buffers; eval mode and frozen layers use the running
// statistics and backpropagate through the affine transform only.
class BatchNorm : public Layer {
 public:
  explicit BatchNorm(int channels, double momentum = 0.1, double eps = 1e-5)
      : c_(channels), momentum_(momentum), eps_(eps),
        gamma_(channels, 1.0), beta_(channels, 0.0),
        ggamma_(channels, 0.0), gbeta_(channels, 0.0),
        run_mean_(channels, 0.0), run_var_(channels, 1.0) {}

  const char* kind() const override { return "batchnorm"; }
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<BatchNorm>(*this);
  }

  Tensor forward(const Tensor& x, Mode mode) override {
    if (x.c != c_) throw std::invalid_argument("batchnorm: channel mismatch");
    const bool use_batch = mode == Mode::Train && !frozen;
    used_batch_stats_ = use_batch;
    const std::size_t spatial = static_cast<std::size_t>(x.h) * x.w;
    const std::size_t m = static_cast<std::size_t>(x.n) * spatial;
    Tensor y(x.n, x.c, x.h, x.w);
    xhat_ = Tensor(x.n, x.c, x.h, x.w);
    inv_std_.assign(c_, 0.0);

    for (int ch = 0; ch < c_; ++ch) {
      double mean, var;
      if (use_batch) {
        double s = 0;
        for (int n = 0; n < x.n; ++n) {
          const double* r = x.row(n, ch, 0);
          for (std::size_t i = 0; i < spatial; ++i) s += r[i];
        }
        mean = s / static_cast<double>(m);
        double ss = 0;
        for (int n = 0; n < x.n; ++n) {
          const double* r = x.row(n, ch, 0);
          for (std::size_t i = 0; i < spatial; ++i) {
            const double d = r[i] - mean;
            ss += d * d;
          }
        }
        var = ss / static_cast<double>(m);
        run_mean_[ch] = (1.0 - momentum_) * run_mean_[ch] + momentum_ * mean;
        run_var_[ch] = (1.0 - momentum_) * run_var_[ch] + momentum_ * var;
      } else {
        mean = run_mean_[ch];
        var = run_var_[ch];
      }
      const double inv = 1.0 / std::sqrt(var + eps_);
      inv_std_[ch] = inv;
      const double g = gamma_[ch], b = beta_[ch];
      for (int n = 0; n < x.n; ++n) {
        const double* r = x.row(n, ch, 0);
        double* xh = xhat_.row(n, ch, 0);
        double* yr = y.row(n, ch, 0);
        for (std::size_t i = 0; i < spatial; ++i) {
          xh[i] = (r[i] - mean) * inv;
          yr[i] = g * xh[i] + b;
        }
      }
    }
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    const std::size_t spatial = static_cast<std::size_t>(dy.h) * dy.w;
    const double m = static_cast<double>(static_cast<std::size_t>(dy.n) * spatial);
    Tensor dx(dy.n, dy.c, dy.h, dy.w);
    for (int ch = 0; ch < c_; ++ch) {
      double dbeta = 0, dgamma = 0;
      for (int n = 0; n < dy.n; ++n) {
        const double* d = dy.row(n, ch, 0);
        const double* xh = xhat_.row(n, ch, 0);
        for (std::size_t i = 0; i < spatial; ++i) {
          dbeta += d[i];
          dgamma += d[i] * xh[i];
        }
      }
      gbeta_[ch] += dbeta;
      ggamma_[ch] += dgamma;
      const double g = gamma_[ch], inv = inv_std_[ch];
      if (used_batch_stats_) {
        const double k = g * inv / m;
        for (int n = 0; n < dy.n; ++n) {
          const double* d = dy.row(n, ch, 0);
          const double* xh = xhat_.row(n, ch, 0);
          double* dxr = dx.row(n, ch, 0);
          for (std::size_t i = 0; i < spatial; ++i)
            dxr[i] = k * (m * d[i] - dbeta - xh[i] * dgamma);
        }
      } else {
        const double k = g * inv;
        for (int n = 0; n < dy.n; ++n) {
          const double* d = dy.row(n, ch, 0);
          double* dxr = dx.row(n, ch, 0);
          for (std::size_t i = 0; i < spatial; ++i) dxr[i] = k * d[i];
        }
      }
    }
    return dx;
  }

  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override {
    out.push_back({&gamma_, &ggamma_, prefix + "bn.gamma"});
    out.push_back({&beta_, &gbeta_, prefix + "bn.beta"});
  }
  void collect_state(std::vector<std::vector<double>*>& out) override {
    out.push_back(&gamma_);
    out.push_back(&beta_);
    out.push_back(&run_mean_);
    out.push_back(&run_var_);
  }

  std::vector<double>& gamma() { return gamma_; }
  std::vector<double>& beta() { return beta_; }
  const std::vector<double>& running_mean() const { return run_mean_; }
  const std::vector<double>& running_var() const { return run_var_; }

 private:
  int c_;
  double momentum_, eps_;
  std::vector<double> gamma_, beta_, ggamma_, gbeta_;
  std::vector<double> run_mean_, run_var_;
  Tensor xhat_;
  std::vector<double> inv_std_;
  bool used_batch_stats_ = false;
};

class ReLU : public Layer {
 public:
  const char* kind() const override { return "relu"; }
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<ReLU>(*this);
  }
  Tensor forward(const Tensor& x, Mode) override {
    mask_.assign(x.numel(), 0);
    margin_ = 1e300;
    Tensor y = x;
    for (std::size_t i = 0; i < y.v.size(); ++i) {
      margin_ = std::min(margin_, std::fabs(y.v[i]));
      if (y.v[i] > 0) {
        mask_[i] = 1;
      } else {
        y.v[i] = 0;
      }
    }
    return y;
  }
  Tensor backward(const Tensor& dy) override {
    Tensor dx = dy;
    for (std::size_t i = 0; i < dx.v.size(); ++i)
      if (!mask_[i]) dx.v[i] = 0;
    return dx;
  }
  double kink_margin() const override { return margin_; }
  void collect_masks(std::vector<const std::vector<std::uint8_t>*>& out) const override {
    out.push_back(&mask_);
  }

 private:
  std::vector<std::uint8_t> mask_;
  double margin_ = 1e300;
};

class Dense : public Layer {
 public:
  Dense(int in_f, int out_f, Rng& rng)
      : in_(in_f), out_(out_f),
        w_(static_cast<std::size_t>(out_f) * in_f), gw_(w_.size()),
        b_(out_f, 0.0), gb_(out_f, 0.0) {
    detail::he_uniform(w_, in_f, rng);
  }

  const char* kind() const override { return "dense"; }
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<Dense>(*this);
  }

  Tensor forward(const Tensor& x, Mode) override {
    if (x.c * x.h * x.w != in_)
      throw std::invalid_argument("dense: expected " + std::to_string(in_) +
                                  " features, got " + x.shape_str());
    x_ = x;
    Tensor y = Tensor::matrix(x.n, out_);
    for (int n = 0; n < x.n; ++n) {
      const double* xr = x.v.data() + static_cast<std::size_t>(n) * in_;
      double* yr = y.v.data() + static_cast<std::size_t>(n) * out_;
      for (int o = 0; o < out_; ++o) {
        const double* wr = w_.data() + static_cast<std::size_t>(o) * in_;
        double s = b_[static_cast<std::size_t>(o)];
        for (int i = 0; i < in_; ++i) s += wr[i] * xr[i];
        yr[o] = s;
      }
    }
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    Tensor dx(x_.n, x_.c, x_.h, x_.w);
    for (int n = 0; n < x_.n; ++n) {
      const double* xr = x_.v.data() + static_cast<std::size_t>(n) * in_;
      const double* dr = dy.v.data() + static_cast<std::size_t>(n) * out_;
      double* dxr = dx.v.data() + static_cast<std::size_t>(n) * in_;
      for (int o = 0; o < out_; ++o) {
        const double d = dr[o];
        gb_[static_cast<std::size_t>(o)] += d;
        double* gwr = gw_.data() + static_cast<std::size_t>(o) * in_;
        const double* wr = w_.data() + static_cast<std::size_t>(o) * in_;
        for (int i = 0; i < in_; ++i) {
          gwr[i] += d * xr[i];
          dxr[i] += d * wr[i];
        }
      }
    }
    return dx;
  }

  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override {
    out.push_back({&w_, &gw_, prefix + "dense.w"});
    out.push_back({&b_, &gb_, prefix + "dense.b"});
  }
  void collect_state(std::vector<std::vector<double>*>& out) override {
    out.push_back(&w_);
    out.push_back(&b_);
  }

  std::vector<double>& weights() { return w_; }
  std::vector<double>& bias() { return b_; }

 private:
  int in_, out_;
  std::vector<double> w_, gw_, b_, gb_;
  Tensor x_;
};

class GlobalAvgPool : public Layer {
 public:
  const char* kind() const override { return "gap"; }
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<GlobalAvgPool>(*this);
  }
  Tensor forward(const Tensor& x, Mode) override {
    h_ = x.h;
    w_ = x.w;
    Tensor y = Tensor::matrix(x.n, x.c);
    const std::size_t spatial = static_cast<std::size_t>(x.h) * x.w;
    for (int n = 0; n < x.n; ++n)
      for (int ch = 0; ch < x.c; ++ch) {
        const double* r = x.row(n, ch, 0);
        double s = 0;
        for (std::size_t i = 0; i < spatial; ++i) s += r[i];
        y.at(n, ch, 0, 0) = s / static_cast<double>(spatial);
      }
    return y;
  }
  Tensor backward(const Tensor& dy) override {
    Tensor dx(dy.n, dy.c, h_, w_);
    const std::size_t spatial = static_cast<std::size_t>(h_) * w_;
    const double inv = 1.0 / static_cast<double>(spatial);
    for (int n = 0; n < dy.n; ++n)
      for (int ch = 0; ch < dy.c; ++ch) {
        const double d = dy.at(n, ch, 0, 0) * inv;
        double* r = dx.row(n, ch, 0);
        for (std::size_t i = 0; i < spatial; ++i) r[i] = d;
      }
    return dx;
  }

 private:
  int h_ = 1, w_ = 1;
};

// conv-bn-relu-conv-bn with an identity (or 1x1 projection) shortcut and a
// final ReLU over the sum.
class ResidualBlock : public Layer {
 public:
  ResidualBlock(int in_c, int out_c, int stride, Rng& rng)
      : conv1_(in_c, out_c, 3, stride, 1, false, rng), bn1_(out_c),
        conv2_(out_c, out_c, 3, 1, 1, false, rng), bn2_(out_c) {
    if (stride != 1 || in_c != out_c) {
      proj_conv_ = std::make_unique<Conv2d>(in_c, out_c, 1, stride, 0, false, rng);
      proj_bn_ = std::make_unique<BatchNorm>(out_c);
    }
  }

  ResidualBlock(const ResidualBlock& o)
      : conv1_(o.conv1_), bn1_(o.bn1_), conv2_(o.conv2_), bn2_(o.bn2_) {
    tag = o.tag;
    frozen = o.frozen;
    mask_ = o.mask_;
    if (o.proj_conv_) {
      proj_conv_ = std::make_unique<Conv2d>(*o.proj_conv_);
      proj_bn_ = std::make_unique<BatchNorm>(*o.proj_bn_);
    }
  }

  const char* kind() const override { return "residual"; }
  std::unique_ptr<Layer> clone() const override {
    return std::make_unique<ResidualBlock>(*this);
  }

  Tensor forward(const Tensor& x, Mode mode) override {
    Tensor m = conv1_.forward(x, mode);
    m = bn1_.forward(m, mode);
    m = relu1_.forward(m, mode);
    m = conv2_.forward(m, mode);
    m = bn2_.forward(m, mode);
    Tensor s = proj_conv_ ? proj_bn_->forward(proj_conv_->forward(x, mode), mode) : x;
    if (!m.same_shape(s))
      throw std::invalid_argument("residual: branch shapes differ");
    Tensor y = m;
    mask_.assign(y.numel(), 0);
    margin_ = 1e300;
    for (std::size_t i = 0; i < y.v.size(); ++i) {
      const double sum = y.v[i] + s.v[i];
      margin_ = std::min(margin_, std::fabs(sum));
      if (sum > 0) {
        y.v[i] = sum;
        mask_[i] = 1;
      } else {
        y.v[i] = 0;
      }
    }
    return y;
  }

  Tensor backward(const Tensor& dy) override {
    Tensor dsum = dy;
    for (std::size_t i = 0; i < dsum.v.size(); ++i)
      if (!mask_[i]) dsum.v[i] = 0;
    Tensor dm = bn2_.backward(dsum);
    dm = conv2_.backward(dm);
    dm = relu1_.backward(dm);
    dm = bn1_.backward(dm);
    Tensor dx = conv1_.backward(dm);
    if (proj_conv_) {
      Tensor dp = proj_bn_->backward(dsum);
      dp = proj_conv_->backward(dp);
      for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] += dp.v[i];
    } else {
      for (std::size_t i = 0; i < dx.v.size(); ++i) dx.v[i] += dsum.v[i];
    }
    return dx;
  }

  void collect_params(std::vector<ParamRef>& out, const std::string& prefix) override {
    conv1_.collect_params(out, prefix + "b1.");
    bn1_.collect_params(out, prefix + "b1.");
    conv2_.collect_params(out, prefix + "b2.");
    bn2_.collect_params(out, prefix + "b2.");
    if (proj_conv_) {
      proj_conv_->collect_params(out, prefix + "proj.");
      proj_bn_->collect_params(out, prefix + "proj.");
    }
  }
  void collect_state(std::vector<std::vector<double>*>& out) override {
    conv1_.collect_state(out);
    bn1_.collect_state(out);
    conv2_.collect_state(out);
    bn2_.collect_state(out);
    if (proj_conv_) {
      proj_conv_->collect_state(out);
      proj_bn_->collect_state(out);
    }
  }
  void set_frozen(bool f) override {
    frozen = f;
    conv1_.set_frozen(f);
    bn1_.set_frozen(f);
    conv2_.set_frozen(f);
    bn2_.set_frozen(f);
    if (proj_conv_) {
      proj_conv_->set_frozen(f);
      proj_bn_->set_frozen(f);
    }
  }

  BatchNorm& last_bn() { return bn2_; }

  double kink_margin() const override {
    return std::min(margin_, relu1_.kink_margin());
  }
  void collect_masks(std::vector<const std::vector<std::uint8_t>*>& out) const override {
    relu1_.collect_masks(out);
    out.push_back(&mask_);
  }

 private:
  Conv2d conv1_;
  BatchNorm bn1_;
  ReLU relu1_;
  Conv2d conv2_;
  BatchNorm bn2_;
  std::unique_ptr<Conv2d> proj_conv_;
  std::unique_ptr<BatchNorm> proj_bn_;
  std::vector<std::uint8_t> mask_;
  double margin_ = 1e300;
};

}  // namespace hrx
