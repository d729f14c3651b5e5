#pragma once
// Run artifacts: windows.jsonl, predictions.jsonl, report.json, report.md,
// per-fold trace CSVs and trait-selection exports. All output is
// deterministic for a fixed configuration (shortest round-trip doubles, no
// wall-clock content).

#include <string>
#include <vector>

#include <json.hpp>

#include "hrx/eval/metrics.hpp"
#include "hrx/pipeline/experiment.hpp"
#include "hrx/util/text.hpp"

namespace hrx {

inline nlohmann::json to_json(const RqaMeasures& q) {
  return {{"recurrence_rate", q.recurrence_rate},
          {"determinism", q.determinism},
          {"laminarity", q.laminarity},
          {"avg_diagonal_length", q.avg_diagonal_length},
          {"max_diagonal_length", q.max_diagonal_length}};
}

inline std::string windows_jsonl(const std::vector<FeaturizedWindow>& fws) {
  std::string out;
  for (const auto& fw : fws) {
    nlohmann::json j = {{"participant_id", fw.window.participant_id},
                        {"ema_ts", fw.window.ema_t_s},
                        {"label", fw.window.label},
                        {"rri", fw.window.rri_series.rri},
                        {"t", fw.window.rri_series.t},
                        {"rqa", to_json(fw.rqa)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::string predictions_jsonl(const std::vector<PredictionRecord>& records,
                                     double window_s) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json j = {{"participant_id", r.participant_id},
                        {"ema_ts", r.ema_t_s},
                        {"label", r.label},
                        {"stage", r.stage},
                        {"fold_id", r.fold_id},
                        {"predicted_class", r.predicted_class},
                        {"window_s", window_s}};
    if (r.tl_probability >= 0) j["tl_probability"] = r.tl_probability;
    if (r.meta_probability >= 0) j["meta_probability"] = r.meta_probability;
    if (!r.model_hash.empty()) j["model_hash"] = r.model_hash;
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline nlohmann::json to_json(const MetricsReport& m) {
  nlohmann::json per = nlohmann::json::array();
  for (const auto& p : m.per_participant)
    per.push_back({{"participant_id", p.id},
                   {"balanced_accuracy", p.balanced_accuracy},
                   {"single_class", p.single_class}});
  return {{"n_records", m.n_records},
          {"confusion",
           {{"tp", m.confusion.tp},
            {"fn", m.confusion.fn},
            {"tn", m.confusion.tn},
            {"fp", m.confusion.fp}}},
          {"recall", m.recall},
          {"specificity", m.specificity},
          {"balanced_accuracy", m.balanced_accuracy},
          {"weighted_precision", m.weighted_precision},
          {"weighted_f1", m.weighted_f1},
          {"per_participant", per}};
}

inline nlohmann::json to_json(const SelectionReport& s) {
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& e : s.ranked) {
    nlohmann::json edges = nlohmann::json::array();
    for (double v : e.bin_upper_edges) {
      if (std::isinf(v)) {
        edges.push_back("inf");
      } else {
        edges.push_back(v);
      }
    }
    ranked.push_back(
        {{"scale", to_string(e.scale)}, {"gain_bits", e.gain}, {"bin_upper_edges", edges}});
  }
  nlohmann::json selected = nlohmann::json::array();
  for (ScaleId sid : s.selected) selected.push_back(to_string(sid));
  return {{"ranked", ranked}, {"selected", selected}};
}

inline nlohmann::json to_json(const AuditReport& a) {
  nlohmann::json v = nlohmann::json::array();
  for (const auto& x : a.violations)
    v.push_back({{"what", x.what},
                 {"participant_id", x.participant_id},
                 {"ema_ts", x.ema_t_s},
                 {"fold_id", x.fold_id},
                 {"stage", x.stage}});
  return {{"ok", a.ok()}, {"records_checked", a.records_checked}, {"violations", v}};
}

inline nlohmann::json fold_plan_json(const FoldPlan& p) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : p.folds)
    folds.push_back({{"id", f.id},
                     {"test", f.test},
                     {"val", f.val},
                     {"train", f.train},
                     {"ratio_fallback", f.ratio_fallback}});
  return {{"seed", p.seed}, {"folds", folds}};
}

inline nlohmann::json report_json(const ExperimentResult& res,
                                  const nlohmann::json& config) {
  nlohmann::json j;
  j["config"] = config;
  j["data_summary"] = {
      {"participants", res.data_summary.n_participants},
      {"probes", res.data_summary.n_probes},
      {"hr_samples", res.data_summary.n_hr_samples},
      {"participant_days", res.data_summary.participant_days},
      {"emas", res.data_summary.n_emas},
      {"mean_emas_per_participant", res.data_summary.mean_emas_per_participant},
      {"sd_emas_per_participant", res.data_summary.sd_emas_per_participant},
      {"class1_fraction", res.data_summary.class1_fraction}};
  j["trait_flagged_participants"] = res.trait_flagged;
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& w : res.windows) {
    nlohmann::json meta_folds = nlohmann::json::array();
    for (const auto& mf : w.meta_folds) {
      nlohmann::json entry = {{"fold_id", mf.fold_id},
                              {"degenerate_training", mf.degenerate_training},
                              {"selection", to_json(mf.selection)}};
      entry["logit"] = {{"weights", mf.logit.w}, {"bias", mf.logit.b}};
      meta_folds.push_back(entry);
    }
    nlohmann::json base_folds = nlohmann::json::array();
    for (const auto& bf : w.base_folds)
      base_folds.push_back({{"fold_id", bf.fold_id}, {"test_ba", bf.test_ba}});
    windows.push_back(
        {{"length_s", w.window.length_s},
         {"min_samples", w.window.min_samples},
         {"usable_windows", w.n_usable_windows},
         {"participants", w.participants},
         {"tl_plan", fold_plan_json(w.tl_plan)},
         {"meta_plan", fold_plan_json(w.meta_plan)},
         {"base_folds", base_folds},
         {"selected_base_fold", w.selected_base_fold},
         {"meta_folds", meta_folds},
         {"audit", to_json(w.audit)},
         {"metrics",
          {{"meta", to_json(w.metrics_meta)},
           {"tl_only", to_json(w.metrics_tl)},
           {"trait_only", to_json(w.metrics_trait)},
           {"random", to_json(w.metrics_random)}}}});
  }
  j["windows"] = windows;
  if (res.has_all_ema_baselines) {
    j["all_ema_baselines"] = {{"trait_only", to_json(res.trait_all)},
                              {"random", to_json(res.random_all)}};
  }
  return j;
}

namespace detail {

inline std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * v);
  return buf;
}

inline void md_row(std::string& out, const std::string& name,
                   const nlohmann::json& m, const std::string& traits) {
  if (m.value("n_records", 0L) <= 0) return;
  out += "| " + name + " | " + std::to_string(m.value("n_records", 0L)) + " | " +
         traits + " | " + pct(m.value("weighted_precision", 0.0)) + " | " +
         pct(m.value("recall", 0.0)) + " | " + pct(m.value("specificity", 0.0)) +
         " | " + pct(m.value("balanced_accuracy", 0.0)) + " | " +
         pct(m.value("weighted_f1", 0.0)) + " |\n";
}

}  // namespace detail

// Human-readable table rendered from the JSON report (single source for the
// run and report subcommands).
inline std::string report_markdown(const nlohmann::json& report) {
  std::string out = "# State-anxiety prediction report\n\n";
  out += "| Model | EMAs | Traits | Prec. | Rec. | Spec. | BA | F1 |\n";
  out += "|---|---|---|---|---|---|---|---|\n";
  const std::string meta_k =
      std::to_string(report.at("config").at("meta").value("k", 0));
  const std::string baseline_k =
      std::to_string(report.at("config").at("meta").value("trait_baseline_k", 0));
  auto hours = [](double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", s / 3600.0);
    return std::string(buf);
  };
  for (const auto& w : report.at("windows")) {
    const std::string h = hours(w.value("length_s", 0.0));
    detail::md_row(out, "Meta (" + h + "h)", w.at("metrics").at("meta"), meta_k);
  }
  for (const auto& w : report.at("windows")) {
    const std::string h = hours(w.value("length_s", 0.0));
    detail::md_row(out, "TL-only (" + h + "h)", w.at("metrics").at("tl_only"), "--");
    detail::md_row(out, "Trait-only (" + h + "h set)",
                   w.at("metrics").at("trait_only"), baseline_k);
    detail::md_row(out, "Random (" + h + "h set)", w.at("metrics").at("random"),
                   "--");
  }
  if (report.contains("all_ema_baselines")) {
    detail::md_row(out, "Trait-only (all EMAs)",
                   report.at("all_ema_baselines").at("trait_only"), baseline_k);
    detail::md_row(out, "Random (all EMAs)",
                   report.at("all_ema_baselines").at("random"), "--");
  }
  out += "\nAudit: ";
  bool all_ok = true;
  for (const auto& w : report.at("windows"))
    all_ok = all_ok && w.at("audit").value("ok", false);
  out += all_ok ? "no leakage violations.\n" : "VIOLATIONS FOUND (see report.json).\n";
  return out;
}

inline std::string traces_csv(const std::vector<FoldModelSummary>& folds) {
  std::string out = "fold_id,phase,epoch,train_loss,val_loss,selected\n";
  for (const auto& f : folds)
    for (const auto& r : f.trace)
      out += std::to_string(f.fold_id) + ',' + std::to_string(r.phase) + ',' +
             std::to_string(r.epoch) + ',' + format_double(r.train_loss) + ',' +
             format_double(r.val_loss) + ',' + (r.selected ? "1" : "0") + '\n';
  return out;
}

}  // namespace hrx
