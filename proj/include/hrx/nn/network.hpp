#pragma once
// A sequential network with tagged regions, plus the model builders used by
// the pipeline: a configurable-depth residual backbone ending in global
// average pooling and a single-logit output, and the bottleneck head that is
// attached on top of the pooled features during adaptation.

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hrx/nn/layers.hpp"

namespace hrx {

class Network {
 public:
  Network() = default;
  Network(const Network& o) { *this = o; }
  Network& operator=(const Network& o) {
    layers.clear();
    for (const auto& l : o.layers) layers.push_back(l->clone());
    return *this;
  }
  Network(Network&&) = default;
  Network& operator=(Network&&) = default;

  std::vector<std::unique_ptr<Layer>> layers;

  Tensor forward(const Tensor& x, Mode mode) {
    return forward_range(x, 0, layers.size(), mode);
  }
  Tensor forward_range(const Tensor& x, std::size_t lo, std::size_t hi, Mode mode) {
    Tensor cur = x;
    for (std::size_t i = lo; i < hi; ++i) cur = layers[i]->forward(cur, mode);
    return cur;
  }
  // Full reverse pass; parameter gradients accumulate into the layers.
  Tensor backward(const Tensor& dout) {
    return backward_range(dout, 0, layers.size());
  }
  Tensor backward_range(const Tensor& dout, std::size_t lo, std::size_t hi) {
    Tensor cur = dout;
    for (std::size_t i = hi; i-- > lo;) cur = layers[i]->backward(cur);
    return cur;
  }

  void zero_grad() {
    for (auto& l : layers) l->zero_grad();
  }

  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers.size(); ++i)
      layers[i]->collect_params(out, layers[i]->tag + "[" + std::to_string(i) + "].");
    return out;
  }
  std::vector<ParamRef> trainable_params() {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
      if (layers[i]->frozen) continue;
      layers[i]->collect_params(out, layers[i]->tag + "[" + std::to_string(i) + "].");
    }
    return out;
  }

  // Freeze every layer whose tag matches the predicate. Frozen batch-norm
  // runs on its running statistics even in train mode.
  void freeze_where(const std::function<bool(const std::string&)>& pred) {
    for (auto& l : layers) l->set_frozen(pred(l->tag));
  }
  void unfreeze_all() {
    for (auto& l : layers) l->set_frozen(false);
  }

  // Persistent state (parameters and running statistics) in declared order.
  std::vector<double> state() const {
    std::vector<std::vector<double>*> vs;
    for (auto& l : const_cast<Network*>(this)->layers) l->collect_state(vs);
    std::vector<double> out;
    for (auto* v : vs) out.insert(out.end(), v->begin(), v->end());
    return out;
  }
  void set_state(const std::vector<double>& flat) {
    std::vector<std::vector<double>*> vs;
    for (auto& l : layers) l->collect_state(vs);
    std::size_t pos = 0;
    for (auto* v : vs) {
      if (pos + v->size() > flat.size())
        throw std::invalid_argument("network state size mismatch");
      std::copy(flat.begin() + pos, flat.begin() + pos + v->size(), v->begin());
      pos += v->size();
    }
    if (pos != flat.size())
      throw std::invalid_argument("network state size mismatch");
  }

  std::uint64_t state_hash() const {
    std::vector<double> s = state();
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (double d : s) {
      std::uint64_t bits;
      static_assert(sizeof(bits) == sizeof(d));
      __builtin_memcpy(&bits, &d, sizeof(bits));
      for (int i = 0; i < 8; ++i) {
        h ^= (bits >> (8 * i)) & 0xff;
        h *= 1099511628211ULL;
      }
    }
    return h;
  }
};

struct BackboneConfig {
  int input_side = 64;
  int input_channels = 3;
  int stem_width = 8;
  int stem_kernel = 3;
  int stem_stride = 1;
  std::vector<int> stage_widths = {8, 16, 32};
  std::vector<int> stage_blocks = {1, 1, 1};

  static BackboneConfig desk() { return {}; }
  // Shape of the 18-layer residual classifier (stages 64/128/256/512, two
  // blocks each, 7x7/2 stem); weights are freshly initialized.
  static BackboneConfig resnet18_shape() {
    BackboneConfig c;
    c.input_side = 224;
    c.stem_width = 64;
    c.stem_kernel = 7;
    c.stem_stride = 2;
    c.stage_widths = {64, 128, 256, 512};
    c.stage_blocks = {2, 2, 2, 2};
    return c;
  }

  int final_width() const { return stage_widths.back(); }
  int downsample_factor() const {
    int f = stem_stride;
    for (std::size_t i = 1; i < stage_widths.size(); ++i) f *= 2;
    return f;
  }
  void check() const {
    if (stage_widths.empty() || stage_widths.size() != stage_blocks.size())
      throw std::invalid_argument("backbone: stage widths/blocks mismatch");
    for (int w : stage_widths)
      if (w <= 0) throw std::invalid_argument("backbone: widths must be positive");
    if (stem_width <= 0 || input_channels <= 0 || input_side <= 0)
      throw std::invalid_argument("backbone: invalid dimensions");
    if (input_side % downsample_factor() != 0)
      throw std::invalid_argument("backbone: downsampling factor must divide input side");
  }
};

// Backbone -> appended residual block -> global average pooling -> one-logit
// output. Tags: stem, stage<i>, extra, gap, fc_out.
inline Network build_base_model(const BackboneConfig& cfg, std::uint64_t seed) {
  cfg.check();
  Rng rng(derive_seed(seed, 0x6d6f64656cULL));
  Network net;
  auto add = [&net](std::unique_ptr<Layer> l, const std::string& tag) {
    l->tag = tag;
    net.layers.push_back(std::move(l));
  };
  add(std::make_unique<Conv2d>(cfg.input_channels, cfg.stem_width, cfg.stem_kernel,
                               cfg.stem_stride, cfg.stem_kernel / 2, false, rng),
      "stem");
  add(std::make_unique<BatchNorm>(cfg.stem_width), "stem");
  add(std::make_unique<ReLU>(), "stem");
  int in_c = cfg.stem_width;
  for (std::size_t s = 0; s < cfg.stage_widths.size(); ++s) {
    const std::string tag = "stage" + std::to_string(s + 1);
    for (int b = 0; b < cfg.stage_blocks[s]; ++b) {
      const int stride = (s > 0 && b == 0) ? 2 : 1;
      add(std::make_unique<ResidualBlock>(in_c, cfg.stage_widths[s], stride, rng), tag);
      in_c = cfg.stage_widths[s];
    }
  }
  add(std::make_unique<ResidualBlock>(in_c, in_c, 1, rng), "extra");
  add(std::make_unique<GlobalAvgPool>(), "gap");
  add(std::make_unique<Dense>(in_c, 1, rng), "fc_out");
  return net;
}

// Bottleneck head consumed by the adaptation stage:
// dense(features -> hidden) -> batch norm -> ReLU -> dense(hidden -> 1).
inline Network build_head(int feature_dim, int hidden, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x68656164ULL));
  Network net;
  auto add = [&net](std::unique_ptr<Layer> l, const std::string& tag) {
    l->tag = tag;
    net.layers.push_back(std::move(l));
  };
  add(std::make_unique<Dense>(feature_dim, hidden, rng), "head_fc1");
  add(std::make_unique<BatchNorm>(hidden), "head_bn");
  add(std::make_unique<ReLU>(), "head_relu");
  add(std::make_unique<Dense>(hidden, 1, rng), "head_fc2");
  return net;
}

// Index of the pooled-features boundary (first layer after "gap").
inline std::size_t gap_boundary(const Network& net) {
  for (std::size_t i = 0; i < net.layers.size(); ++i)
    if (net.layers[i]->tag == "gap") return i + 1;
  throw std::invalid_argument("network has no gap layer");
}

// Base model with its output layer replaced by the adaptation head.
inline Network compose_adapted(const Network& base, const Network& head) {
  Network out;
  const std::size_t cut = gap_boundary(base);
  for (std::size_t i = 0; i < cut; ++i) out.layers.push_back(base.layers[i]->clone());
  for (const auto& l : head.layers) out.layers.push_back(l->clone());
  return out;
}

}  // namespace hrx
