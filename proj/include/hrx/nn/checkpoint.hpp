#pragma once
// Versioned JSON model container: architecture, flattened parameter and
// running-statistic arrays in declared order, and optimizer state. Doubles
// are serialized with shortest round-trip formatting, so save/load is
// bit-exact.

#include <string>

#include <json.hpp>

#include "hrx/nn/network.hpp"
#include "hrx/nn/optim.hpp"
#include "hrx/util/text.hpp"

namespace hrx {

struct ModelSpec {
  BackboneConfig backbone;
  bool with_head = false;  // adaptation head replacing the output layer
  int head_hidden = 32;
  std::uint64_t init_seed = 1;
};

inline void to_json(nlohmann::json& j, const BackboneConfig& c) {
  j = {{"input_side", c.input_side},     {"input_channels", c.input_channels},
       {"stem_width", c.stem_width},     {"stem_kernel", c.stem_kernel},
       {"stem_stride", c.stem_stride},   {"stage_widths", c.stage_widths},
       {"stage_blocks", c.stage_blocks}};
}
inline void from_json(const nlohmann::json& j, BackboneConfig& c) {
  j.at("input_side").get_to(c.input_side);
  j.at("input_channels").get_to(c.input_channels);
  j.at("stem_width").get_to(c.stem_width);
  j.at("stem_kernel").get_to(c.stem_kernel);
  j.at("stem_stride").get_to(c.stem_stride);
  j.at("stage_widths").get_to(c.stage_widths);
  j.at("stage_blocks").get_to(c.stage_blocks);
}

inline Network build_model(const ModelSpec& spec) {
  Network base = build_base_model(spec.backbone, spec.init_seed);
  if (!spec.with_head) return base;
  Network head =
      build_head(spec.backbone.final_width(), spec.head_hidden, spec.init_seed);
  return compose_adapted(base, head);
}

inline void save_checkpoint(const Network& net, const ModelSpec& spec,
                            const std::string& path, Optimizer* opt = nullptr) {
  nlohmann::json j;
  j["version"] = 1;
  j["arch"] = {{"backbone", spec.backbone},
               {"with_head", spec.with_head},
               {"head_hidden", spec.head_hidden},
               {"init_seed", spec.init_seed}};
  j["state"] = net.state();
  if (opt) {
    j["optimizer"] = {{"kind", opt->config().kind == OptimizerConfig::SGD
                                   ? "sgd"
                                   : "nadam"},
                      {"lr", opt->config().lr},
                      {"t", opt->steps_taken()},
                      {"m", opt->first_moments()},
                      {"v", opt->second_moments()}};
  }
  write_file(path, j.dump() + "\n");
}

struct LoadedCheckpoint {
  Network net;
  ModelSpec spec;
  bool has_optimizer = false;
  OptimizerConfig optimizer_config;
  long optimizer_t = 0;
  std::vector<std::vector<double>> optimizer_m, optimizer_v;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  if (j.at("version").get<int>() != 1)
    throw std::runtime_error("unsupported checkpoint version");
  LoadedCheckpoint out;
  j.at("arch").at("backbone").get_to(out.spec.backbone);
  out.spec.with_head = j.at("arch").at("with_head").get<bool>();
  out.spec.head_hidden = j.at("arch").at("head_hidden").get<int>();
  out.spec.init_seed = j.at("arch").at("init_seed").get<std::uint64_t>();
  out.net = build_model(out.spec);
  out.net.set_state(j.at("state").get<std::vector<double>>());
  if (j.contains("optimizer")) {
    out.has_optimizer = true;
    const auto& o = j.at("optimizer");
    out.optimizer_config.kind =
        o.at("kind") == "sgd" ? OptimizerConfig::SGD : OptimizerConfig::Nadam;
    out.optimizer_config.lr = o.at("lr").get<double>();
    out.optimizer_t = o.at("t").get<long>();
    o.at("m").get_to(out.optimizer_m);
    o.at("v").get_to(out.optimizer_v);
  }
  return out;
}

}  // namespace hrx
