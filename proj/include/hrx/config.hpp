#pragma once
// Plain-text key-value configuration with [sections]. Every key is declared;
// unknown sections or keys are rejected. CLI flags override file values.

#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/core/synthetic.hpp"
#include "hrx/pipeline/experiment.hpp"
#include "hrx/util/text.hpp"

namespace hrx {

struct RunConfig {
  bool synthetic = true;
  SynthConfig synth;
  std::string hr_path, ema_path, traits_path, scales_path, manifest_path;
  ExperimentConfig experiment;
  std::string out_dir = "out";
  bool export_plots = true;
  bool export_png = false;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

namespace detail {

struct IniData {
  // section -> key -> (value, line)
  std::map<std::string, std::map<std::string, std::pair<std::string, long>>> kv;
};

inline std::string trim(std::string s) {
  const char* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline IniData parse_ini(const std::string& text, const std::string& origin) {
  IniData ini;
  std::istringstream in(text);
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      ini.kv[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
    if (!ini.kv[section].emplace(key, std::make_pair(value, line_no)).second)
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key " + key);
  }
  return ini;
}

// Tracks which keys were consumed so leftovers can be rejected.
class SectionReader {
 public:
  SectionReader(IniData& ini, const std::string& section, const std::string& origin)
      : ini_(ini), section_(section), origin_(origin) {}

  bool has(const std::string& key) const {
    auto s = ini_.kv.find(section_);
    return s != ini_.kv.end() && s->second.count(key);
  }
  std::string raw(const std::string& key) {
    consumed_.insert(key);
    return ini_.kv.at(section_).at(key).first;
  }
  template <typename T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    const std::string v = raw(key);
    std::istringstream ss(v);
    if constexpr (std::is_same_v<T, bool>) {
      if (v == "1" || v == "true") {
        out = true;
      } else if (v == "0" || v == "false") {
        out = false;
      } else {
        fail(key, "expected boolean 0/1");
      }
    } else if constexpr (std::is_same_v<T, std::string>) {
      out = v;
    } else {
      T tmp{};
      ss >> tmp;
      if (ss.fail() || !ss.eof()) fail(key, "cannot parse '" + v + "'");
      out = tmp;
    }
  }
  void get_list(const std::string& key, std::vector<int>& out) {
    if (!has(key)) return;
    out = parse_ints(raw(key), key);
  }
  void get_list(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    out.clear();
    for (const auto& tok : split_list(raw(key))) {
      double d = 0;
      if (!parse_double(tok, d)) fail(key, "cannot parse '" + tok + "'");
      out.push_back(d);
    }
  }
  void finish() {
    auto s = ini_.kv.find(section_);
    if (s == ini_.kv.end()) return;
    for (const auto& [key, value] : s->second)
      if (!consumed_.count(key))
        throw ConfigError(origin_ + ":" + std::to_string(value.second) +
                          ": unknown key '" + key + "' in [" + section_ + "]");
    ini_.kv.erase(s);
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& why) {
    throw ConfigError(origin_ + ": [" + section_ + "] " + key + ": " + why);
  }
  static std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(trim(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    return out;
  }
  std::vector<int> parse_ints(const std::string& s, const std::string& key) {
    std::vector<int> out;
    for (const auto& tok : split_list(s)) {
      long long v = 0;
      if (!parse_int(tok, v)) fail(key, "cannot parse '" + tok + "'");
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  IniData& ini_;
  std::string section_;
  std::string origin_;
  std::set<std::string> consumed_;
};

}  // namespace detail

inline RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  detail::IniData ini = detail::parse_ini(text, origin);
  RunConfig rc;

  {
    detail::SectionReader s(ini, "dataset", origin);
    std::string source = "synthetic";
    s.get("source", source);
    if (source == "synthetic") {
      rc.synthetic = true;
    } else if (source == "csv") {
      rc.synthetic = false;
    } else {
      throw ConfigError(origin + ": dataset source must be synthetic or csv");
    }
    s.get("seed", rc.synth.seed);
    s.get("participants", rc.synth.n_participants);
    s.get("days", rc.synth.n_days);
    s.get("duty_cycle_period_s", rc.synth.duty_cycle_period_s);
    s.get("capture_s", rc.synth.capture_s);
    s.get("hr_sampling_hz", rc.synth.hr_sampling_hz);
    s.get("emas_per_day", rc.synth.emas_per_day);
    s.get("ema_scale_max", rc.synth.ema_scale_max);
    s.get("coupling", rc.synth.coupling_strength);
    s.get("base_hr_bpm", rc.synth.base_hr_bpm);
    s.get("anxiety_hr_shift_bpm", rc.synth.anxiety_hr_shift_bpm);
    s.get("probe_missing_rate", rc.synth.probe_missing_rate);
    s.get("ema_missing_rate", rc.synth.ema_missing_rate);
    s.get("trait_item_missing_rate", rc.synth.trait_item_missing_rate);
    s.get("ema_label_noise", rc.synth.ema_label_noise);
    s.get("probe_jitter_s", rc.synth.probe_jitter_s);
    s.get("age", rc.synth.participant_age);
    s.get("trait_coupling", rc.synth.trait_coupling);
    s.get("target_class1_fraction", rc.synth.target_class1_fraction);
    s.get("propensity_lo", rc.synth.propensity_lo);
    s.get("propensity_hi", rc.synth.propensity_hi);
    s.get("hr", rc.hr_path);
    s.get("ema", rc.ema_path);
    s.get("traits", rc.traits_path);
    s.get("scales", rc.scales_path);
    s.get("manifest", rc.manifest_path);
    s.finish();
    if (!rc.synthetic &&
        (rc.hr_path.empty() || rc.ema_path.empty() || rc.traits_path.empty() ||
         rc.scales_path.empty()))
      throw ConfigError(origin + ": csv source needs hr/ema/traits/scales paths");
  }
  {
    detail::SectionReader s(ini, "windows", origin);
    std::vector<double> lengths;
    s.get_list("lengths_s", lengths);
    int min_samples = 50;
    s.get("min_samples", min_samples);
    s.finish();
    if (!lengths.empty()) {
      rc.experiment.windows.clear();
      for (double l : lengths) rc.experiment.windows.push_back({l, min_samples});
    } else {
      for (auto& w : rc.experiment.windows) w.min_samples = min_samples;
    }
  }
  {
    detail::SectionReader s(ini, "embedding", origin);
    s.get("dimension", rc.experiment.embedding.dimension);
    s.get("delay", rc.experiment.embedding.delay);
    std::string mode = "target";
    s.get("threshold_mode", mode);
    if (mode == "target") {
      rc.experiment.embedding.mode = ThresholdMode::TargetRate;
    } else if (mode == "fixed") {
      rc.experiment.embedding.mode = ThresholdMode::FixedEpsilon;
    } else {
      throw ConfigError(origin + ": threshold_mode must be target or fixed");
    }
    s.get("target_rate", rc.experiment.embedding.target_rate);
    s.get("epsilon", rc.experiment.embedding.epsilon);
    s.get("plot_side", rc.experiment.plot_side);
    s.finish();
  }
  {
    detail::SectionReader s(ini, "backbone", origin);
    std::string preset = "desk";
    s.get("preset", preset);
    if (preset == "desk") {
      rc.experiment.backbone = BackboneConfig::desk();
    } else if (preset == "resnet18-shape") {
      rc.experiment.backbone = BackboneConfig::resnet18_shape();
    } else {
      throw ConfigError(origin + ": backbone preset must be desk or resnet18-shape");
    }
    s.get("input_channels", rc.experiment.backbone.input_channels);
    s.get("stem_width", rc.experiment.backbone.stem_width);
    s.get("stem_kernel", rc.experiment.backbone.stem_kernel);
    s.get("stem_stride", rc.experiment.backbone.stem_stride);
    s.get_list("stage_widths", rc.experiment.backbone.stage_widths);
    s.get_list("stage_blocks", rc.experiment.backbone.stage_blocks);
    s.finish();
  }
  {
    detail::SectionReader s(ini, "train", origin);
    auto& b = rc.experiment.base_schedule;
    auto& h = rc.experiment.head_schedule;
    s.get("batch_size", b.batch_size);
    h.batch_size = b.batch_size;
    s.get("phase1_lr", b.phase1_lr);
    s.get("phase1_max_epochs", b.phase1_max_epochs);
    s.get("phase2_lr", b.phase2_lr);
    s.get("phase2_max_epochs", b.phase2_max_epochs);
    s.get("phase2_patience", b.phase2_patience);
    s.get("focal_gamma", b.focal_gamma);
    h.focal_gamma = b.focal_gamma;
    s.get("head_lr", h.lr);
    s.get("head_max_epochs", h.max_epochs);
    s.get("head_hidden", h.hidden);
    s.get("tolerance", h.tolerance);
    s.get("tolerance_relative", h.tolerance_relative);
    s.finish();
  }
  {
    detail::SectionReader s(ini, "meta", origin);
    std::string kind = "logit";
    s.get("kind", kind);
    rc.experiment.meta_kind = parse_meta_kind(kind);
    s.get("k", rc.experiment.meta_traits_k);
    s.get("trait_baseline_k", rc.experiment.trait_baseline_k);
    s.get("bins", rc.experiment.infogain_bins);
    s.get("l2", rc.experiment.meta_fit.logit.l2);
    s.get("knn_k", rc.experiment.meta_fit.knn_k);
    s.get("tree_depth", rc.experiment.meta_fit.tree.max_depth);
    s.get("tree_min_leaf", rc.experiment.meta_fit.tree.min_leaf);
    s.get("decision_threshold", rc.experiment.decision_threshold);
    s.finish();
  }
  {
    detail::SectionReader s(ini, "cv", origin);
    s.get("group_size", rc.experiment.lfocv.group_size);
    s.get("n_val", rc.experiment.lfocv.n_val);
    s.get("ratio_tolerance", rc.experiment.lfocv.ratio_tolerance);
    s.get("ratio_relative", rc.experiment.lfocv.tolerance_relative);
    s.finish();
  }
  {
    detail::SectionReader s(ini, "run", origin);
    s.get("seed", rc.experiment.seed);
    s.get("jobs", rc.experiment.jobs);
    s.get("out", rc.out_dir);
    s.get("export_plots", rc.export_plots);
    s.get("export_png", rc.export_png);
    s.finish();
  }
  if (!ini.kv.empty()) {
    for (const auto& [section, keys] : ini.kv)
      if (!keys.empty())
        throw ConfigError(origin + ": unknown section [" + section + "]");
  }
  return rc;
}

inline RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_file(path), path);
}

// Full resolved configuration, embedded into every report.
inline nlohmann::json config_echo(const RunConfig& rc) {
  nlohmann::json j;
  j["dataset"] = {{"source", rc.synthetic ? "synthetic" : "csv"}};
  if (rc.synthetic) {
    const SynthConfig& c = rc.synth;
    j["dataset"]["synth"] = {
        {"seed", c.seed},
        {"participants", c.n_participants},
        {"days", c.n_days},
        {"duty_cycle_period_s", c.duty_cycle_period_s},
        {"capture_s", c.capture_s},
        {"hr_sampling_hz", c.hr_sampling_hz},
        {"emas_per_day", c.emas_per_day},
        {"ema_scale_max", c.ema_scale_max},
        {"coupling", c.coupling_strength},
        {"base_hr_bpm", c.base_hr_bpm},
        {"anxiety_hr_shift_bpm", c.anxiety_hr_shift_bpm},
        {"probe_missing_rate", c.probe_missing_rate},
        {"ema_missing_rate", c.ema_missing_rate},
        {"trait_item_missing_rate", c.trait_item_missing_rate},
        {"ema_label_noise", c.ema_label_noise},
        {"probe_jitter_s", c.probe_jitter_s},
        {"age", c.participant_age},
        {"trait_coupling", c.trait_coupling},
        {"target_class1_fraction", c.target_class1_fraction},
        {"propensity_lo", c.propensity_lo},
        {"propensity_hi", c.propensity_hi}};
  } else {
    j["dataset"]["paths"] = {{"hr", rc.hr_path},
                             {"ema", rc.ema_path},
                             {"traits", rc.traits_path},
                             {"scales", rc.scales_path},
                             {"manifest", rc.manifest_path}};
  }
  const ExperimentConfig& e = rc.experiment;
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : e.windows)
    windows.push_back({{"length_s", w.length_s}, {"min_samples", w.min_samples}});
  j["windows"] = windows;
  j["embedding"] = {{"dimension", e.embedding.dimension},
                    {"delay", e.embedding.delay},
                    {"threshold_mode", e.embedding.mode == ThresholdMode::TargetRate
                                           ? "target"
                                           : "fixed"},
                    {"target_rate", e.embedding.target_rate},
                    {"epsilon", e.embedding.epsilon},
                    {"plot_side", e.plot_side}};
  j["backbone"] = e.backbone;
  j["train"] = {{"batch_size", e.base_schedule.batch_size},
                {"phase1_lr", e.base_schedule.phase1_lr},
                {"phase1_max_epochs", e.base_schedule.phase1_max_epochs},
                {"phase2_lr", e.base_schedule.phase2_lr},
                {"phase2_max_epochs", e.base_schedule.phase2_max_epochs},
                {"phase2_patience", e.base_schedule.phase2_patience},
                {"focal_gamma", e.base_schedule.focal_gamma},
                {"head_lr", e.head_schedule.lr},
                {"head_max_epochs", e.head_schedule.max_epochs},
                {"head_hidden", e.head_schedule.hidden},
                {"tolerance", e.head_schedule.tolerance},
                {"tolerance_relative", e.head_schedule.tolerance_relative}};
  j["meta"] = {{"kind", to_string(e.meta_kind)},
               {"k", e.meta_traits_k},
               {"trait_baseline_k", e.trait_baseline_k},
               {"bins", e.infogain_bins},
               {"l2", e.meta_fit.logit.l2},
               {"knn_k", e.meta_fit.knn_k},
               {"tree_depth", e.meta_fit.tree.max_depth},
               {"tree_min_leaf", e.meta_fit.tree.min_leaf},
               {"decision_threshold", e.decision_threshold}};
  j["cv"] = {{"group_size", e.lfocv.group_size},
             {"n_val", e.lfocv.n_val},
             {"ratio_tolerance", e.lfocv.ratio_tolerance},
             {"ratio_relative", e.lfocv.tolerance_relative}};
  j["run"] = {{"seed", e.seed},
              {"jobs", e.jobs},
              {"out", rc.out_dir},
              {"export_plots", rc.export_plots},
              {"export_png", rc.export_png}};
  return j;
}

}  // namespace hrx
