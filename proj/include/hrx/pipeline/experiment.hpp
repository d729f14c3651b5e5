#pragma once
// End-to-end nested experiment:
//   stage A  — base models trained under leave-five-out CV; the fold model
//              with the highest held-out balanced accuracy becomes the base.
//   stage B  — per fold, the frozen base gets a fresh bottleneck head tuned
//              on the fold's training/validation participants; held-out
//              probabilities become the TL record set.
//   stage C  — leave-one-out meta-learning over TL probability + selected,
//              z-normalized trait scores, with selection and normalization
//              recomputed inside every training fold.
// Baselines: trait-only classifier (constant per participant by construction)
// and uniform random draws, on the per-window EMA set and on all EMAs.
// Every run must pass the leakage audit before reporting.

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/core/summary.hpp"
#include "hrx/core/types.hpp"
#include "hrx/eval/audit.hpp"
#include "hrx/eval/folds.hpp"
#include "hrx/eval/metrics.hpp"
#include "hrx/eval/records.hpp"
#include "hrx/pipeline/featurize.hpp"
#include "hrx/preprocess/traits.hpp"
#include "hrx/stacking/infogain.hpp"
#include "hrx/stacking/meta.hpp"
#include "hrx/train/trainer.hpp"

namespace hrx {

struct ExperimentConfig {
  std::vector<WindowSpec> windows = {{5400.0, 50}};
  EmbeddingParams embedding;
  int plot_side = 64;
  BackboneConfig backbone;
  BaseTrainSchedule base_schedule;
  HeadTuneSchedule head_schedule;
  MetaKind meta_kind = MetaKind::Logit;
  int meta_traits_k = 4;
  int trait_baseline_k = 5;
  int infogain_bins = 10;
  LfocvParams lfocv;
  MetaFitParams meta_fit;
  double decision_threshold = 0.5;
  std::uint64_t seed = 1;
  int jobs = 1;

  void validate() {
    if (windows.empty()) throw std::invalid_argument("config: no window specs");
    for (auto& w : windows) w.check();
    embedding.check();
    backbone.input_side = plot_side;
    backbone.check();
    if (meta_traits_k < 1 || trait_baseline_k < 1)
      throw std::invalid_argument("config: trait selection k must be >= 1");
    if (decision_threshold <= 0 || decision_threshold >= 1)
      throw std::invalid_argument("config: decision threshold must be in (0,1)");
    if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
  }
};

struct FoldModelSummary {
  int fold_id = 0;
  double test_ba = 0;
  std::vector<EpochTraceRow> trace;
};

struct MetaFoldSummary {
  int fold_id = 0;
  SelectionReport selection;
  bool degenerate_training = false;  // single-class training rows; fold skipped
  LogitModel logit;                  // fitted coefficients when kind == Logit
};

struct WindowResult {
  WindowSpec window;
  long n_usable_windows = 0;
  std::vector<std::string> participants;  // with at least one usable window
  FoldPlan tl_plan, meta_plan;
  std::vector<FoldModelSummary> base_folds;
  int selected_base_fold = -1;
  std::vector<FoldModelSummary> head_folds;
  std::vector<MetaFoldSummary> meta_folds;
  std::vector<PredictionRecord> records;  // tl + meta + baselines, this window
  std::vector<NormalizationProvenance> norm_provenance;
  AuditReport audit;
  MetricsReport metrics_meta, metrics_tl, metrics_trait, metrics_random;
  std::vector<FeaturizedWindow> featurized;  // kept for export
};

struct ExperimentResult {
  std::vector<WindowResult> windows;
  MetricsReport trait_all, random_all;  // baselines over every EMA
  bool has_all_ema_baselines = false;
  std::vector<std::string> trait_flagged;  // unresolved trait scales
  DatasetSummary data_summary;
};

namespace detail {

struct TraitRow {
  const TraitProfile* profile;
  std::string participant_id;
  int label;
};

// Trait-only classifier under leave-one-out CV. Selection, normalization and
// the fit never see the held-out participant. Rows carry per-participant
// constant features, so predictions are constant within participant.
inline std::vector<PredictionRecord> trait_only_baseline(
    const std::vector<TraitRow>& rows, const std::vector<double>& row_times,
    int top_k, int bins, const MetaFitParams& fit_params, double threshold,
    const FoldPlan& plan, std::vector<MetaFoldSummary>* fold_summaries = nullptr) {
  std::vector<PredictionRecord> out;
  for (const auto& fold : plan.folds) {
    const std::string& held_out = fold.test.front();
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < rows.size(); ++i)
      (rows[i].participant_id == held_out ? test_rows : train_rows).push_back(i);
    if (test_rows.empty()) continue;

    std::vector<const TraitProfile*> train_profiles;
    std::vector<int> train_labels;
    for (std::size_t i : train_rows) {
      train_profiles.push_back(rows[i].profile);
      train_labels.push_back(rows[i].label);
    }
    MetaFoldSummary summary;
    summary.fold_id = fold.id;
    summary.selection = select_traits(train_profiles, train_labels, top_k, bins);

    auto features = [&](std::size_t i) {
      std::vector<double> f;
      for (ScaleId sid : summary.selection.selected)
        f.push_back(rows[i].profile->scores.at(sid));
      return f;
    };
    std::vector<std::vector<double>> x;
    for (std::size_t i : train_rows) x.push_back(features(i));
    long n1 = 0;
    for (int y : train_labels) n1 += y;
    if (n1 == 0 || n1 == static_cast<long>(train_labels.size())) {
      summary.degenerate_training = true;
      if (fold_summaries) fold_summaries->push_back(std::move(summary));
      continue;
    }
    Standardizer std_ = Standardizer::fit(x);
    for (auto& row : x) row = std_.apply(row);
    MetaFitParams fp = fit_params;
    fp.logit.w0 = static_cast<double>(train_labels.size()) /
                  (2.0 * static_cast<double>(train_labels.size() - n1));
    fp.logit.w1 = static_cast<double>(train_labels.size()) / (2.0 * static_cast<double>(n1));
    MetaModel model = fit_meta(MetaKind::Logit, x, train_labels, fp);
    summary.logit = model.logit;

    for (std::size_t i : test_rows) {
      PredictionRecord rec;
      rec.participant_id = rows[i].participant_id;
      rec.ema_t_s = row_times[i];
      rec.label = rows[i].label;
      rec.meta_probability = model.prob(std_.apply(features(i)));
      rec.predicted_class = rec.meta_probability >= threshold ? 1 : 0;
      rec.fold_id = fold.id;
      rec.stage = stage::kBaselineTrait;
      out.push_back(std::move(rec));
    }
    if (fold_summaries) fold_summaries->push_back(std::move(summary));
  }
  return out;
}

inline std::vector<PredictionRecord> random_baseline_records(
    const std::vector<PredictionRecord>& base_rows, std::uint64_t seed) {
  std::vector<int> draws = baseline_random(base_rows.size(), seed);
  std::vector<PredictionRecord> out;
  out.reserve(base_rows.size());
  for (std::size_t i = 0; i < base_rows.size(); ++i) {
    PredictionRecord rec;
    rec.participant_id = base_rows[i].participant_id;
    rec.ema_t_s = base_rows[i].ema_t_s;
    rec.label = base_rows[i].label;
    rec.predicted_class = draws[i];
    rec.stage = stage::kBaselineRandom;
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace detail

inline WindowResult run_window_experiment(const Dataset& ds,
                                          const std::map<std::string, const TraitProfile*>& traits,
                                          const WindowSpec& wspec,
                                          const ExperimentConfig& cfg) {
  WindowResult wr;
  wr.window = wspec;

  FeaturizeConfig fcfg;
  fcfg.window = wspec;
  fcfg.embedding = cfg.embedding;
  fcfg.plot_side = cfg.plot_side;
  fcfg.jobs = cfg.jobs;
  wr.featurized = featurize_dataset(ds, fcfg);
  std::vector<PlotExample> examples = to_examples(wr.featurized);
  wr.n_usable_windows = static_cast<long>(examples.size());
  if (examples.empty())
    throw std::runtime_error("window experiment: no usable windows");

  // Participants present in the windowed set, with per-participant indices.
  std::map<std::string, std::vector<std::size_t>> by_participant;
  for (std::size_t i = 0; i < examples.size(); ++i)
    by_participant[examples[i].participant_id].push_back(i);
  std::vector<ParticipantLabelCounts> counts;
  for (const auto& [id, idxs] : by_participant) {
    ParticipantLabelCounts c;
    c.id = id;
    for (std::size_t i : idxs) (examples[i].label ? c.n1 : c.n0) += 1;
    counts.push_back(std::move(c));
    wr.participants.push_back(id);
  }

  wr.tl_plan = plan_lfocv(counts, derive_seed(cfg.seed, 0xf01dULL), cfg.lfocv);

  auto indices_for = [&](const std::vector<std::string>& ids) {
    std::vector<std::size_t> out;
    for (const auto& id : ids) {
      auto it = by_participant.find(id);
      if (it == by_participant.end()) continue;
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
  };

  const int channels = cfg.backbone.input_channels;
  const std::size_t n_folds = wr.tl_plan.folds.size();

  // Stage A: base model per fold, scored on its held-out participants.
  std::vector<Network> fold_models(n_folds);
  wr.base_folds.resize(n_folds);
  detail::parallel_over(n_folds, cfg.jobs, [&](std::size_t f) {
    const Fold& fold = wr.tl_plan.folds[f];
    Network model = build_base_model(cfg.backbone,
                                     derive_seed(cfg.seed, 0xba5e0000ULL + f));
    BaseTrainSchedule sched = cfg.base_schedule;
    sched.seed = derive_seed(cfg.seed, 0xba5e1000ULL + f);
    TrainTrace trace = train_base(model, examples, indices_for(fold.train),
                                  indices_for(fold.val), sched, channels);
    std::vector<PredictionRecord> test_recs = predict_probabilities(
        model, examples, indices_for(fold.test), fold.id, stage::kTl, channels);
    FoldModelSummary& fs = wr.base_folds[f];
    fs.fold_id = fold.id;
    fs.test_ba = compute_metrics(test_recs).balanced_accuracy;
    fs.trace = trace.rows;
    fold_models[f] = std::move(model);
  });

  std::size_t best_f = 0;
  for (std::size_t f = 1; f < n_folds; ++f)
    if (wr.base_folds[f].test_ba > wr.base_folds[best_f].test_ba) best_f = f;
  wr.selected_base_fold = wr.base_folds[best_f].fold_id;
  const Network selected_base = std::move(fold_models[best_f]);

  // Stage B: per-fold head adaptation on the frozen selected base.
  std::vector<std::vector<PredictionRecord>> tl_per_fold(n_folds);
  wr.head_folds.resize(n_folds);
  detail::parallel_over(n_folds, cfg.jobs, [&](std::size_t f) {
    const Fold& fold = wr.tl_plan.folds[f];
    HeadTuneSchedule sched = cfg.head_schedule;
    sched.seed = derive_seed(cfg.seed, 0x4ead0000ULL + f);
    HeadTuneResult hr = tune_head(selected_base, examples, indices_for(fold.train),
                                  indices_for(fold.val), sched, channels);
    wr.head_folds[f].fold_id = fold.id;
    wr.head_folds[f].trace = hr.trace.rows;
    tl_per_fold[f] = predict_probabilities(hr.adapted, examples,
                                           indices_for(fold.test), fold.id,
                                           stage::kTl, channels);
  });
  std::vector<PredictionRecord> tl_records;
  for (auto& v : tl_per_fold)
    tl_records.insert(tl_records.end(), v.begin(), v.end());

  // Stage C: leave-one-out meta-learning on TL probability + selected traits.
  std::vector<std::string> meta_participants;
  for (const auto& id : wr.participants)
    if (traits.count(id)) meta_participants.push_back(id);
  wr.meta_plan = plan_loocv(meta_participants);

  std::map<std::string, std::vector<std::size_t>> tl_by_participant;
  for (std::size_t i = 0; i < tl_records.size(); ++i)
    tl_by_participant[tl_records[i].participant_id].push_back(i);

  std::vector<PredictionRecord> meta_records;
  for (const auto& fold : wr.meta_plan.folds) {
    const std::string& held_out = fold.test.front();
    std::vector<std::size_t> train_rows, test_rows;
    for (const auto& id : fold.train) {
      auto it = tl_by_participant.find(id);
      if (it != tl_by_participant.end())
        train_rows.insert(train_rows.end(), it->second.begin(), it->second.end());
    }
    if (auto it = tl_by_participant.find(held_out); it != tl_by_participant.end())
      test_rows = it->second;
    if (test_rows.empty()) continue;

    NormalizationProvenance prov;
    prov.fold_id = fold.id;
    {
      std::set<std::string> used;
      for (std::size_t i : train_rows) used.insert(tl_records[i].participant_id);
      prov.used_participants.assign(used.begin(), used.end());
    }
    wr.norm_provenance.push_back(prov);

    MetaFoldSummary summary;
    summary.fold_id = fold.id;
    std::vector<const TraitProfile*> train_profiles;
    std::vector<int> train_labels;
    for (std::size_t i : train_rows) {
      train_profiles.push_back(traits.at(tl_records[i].participant_id));
      train_labels.push_back(tl_records[i].label);
    }
    long n1 = 0;
    for (int y : train_labels) n1 += y;
    if (train_rows.empty() || n1 == 0 || n1 == static_cast<long>(train_labels.size())) {
      summary.degenerate_training = true;
      wr.meta_folds.push_back(std::move(summary));
      continue;
    }
    summary.selection = select_traits(train_profiles, train_labels,
                                      cfg.meta_traits_k, cfg.infogain_bins);

    auto trait_features = [&](const std::string& pid) {
      std::vector<double> f;
      for (ScaleId sid : summary.selection.selected)
        f.push_back(traits.at(pid)->scores.at(sid));
      return f;
    };
    // z-normalize the trait block on training rows; the TL probability is
    // already on [0,1] and enters raw.
    std::vector<std::vector<double>> trait_block;
    for (std::size_t i : train_rows)
      trait_block.push_back(trait_features(tl_records[i].participant_id));
    Standardizer std_ = Standardizer::fit(trait_block);

    auto full_features = [&](std::size_t i) {
      std::vector<double> f = {tl_records[i].tl_probability};
      std::vector<double> t = std_.apply(trait_features(tl_records[i].participant_id));
      f.insert(f.end(), t.begin(), t.end());
      return f;
    };
    std::vector<std::vector<double>> x;
    for (std::size_t i : train_rows) x.push_back(full_features(i));
    MetaFitParams fp = cfg.meta_fit;
    fp.logit.w0 = static_cast<double>(train_labels.size()) /
                  (2.0 * static_cast<double>(train_labels.size() - n1));
    fp.logit.w1 =
        static_cast<double>(train_labels.size()) / (2.0 * static_cast<double>(n1));
    MetaModel model = fit_meta(cfg.meta_kind, x, train_labels, fp);
    if (cfg.meta_kind == MetaKind::Logit) summary.logit = model.logit;

    for (std::size_t i : test_rows) {
      PredictionRecord rec = tl_records[i];
      rec.stage = stage::kMeta;
      rec.fold_id = fold.id;
      rec.meta_probability = model.prob(full_features(i));
      rec.predicted_class =
          rec.meta_probability >= cfg.decision_threshold ? 1 : 0;
      rec.model_hash.clear();
      meta_records.push_back(std::move(rec));
    }
    wr.meta_folds.push_back(std::move(summary));
  }

  // Baselines on the per-window EMA set.
  std::vector<detail::TraitRow> trait_rows;
  std::vector<double> trait_row_times;
  for (const auto& rec : tl_records) {
    if (!traits.count(rec.participant_id)) continue;
    trait_rows.push_back({traits.at(rec.participant_id), rec.participant_id, rec.label});
    trait_row_times.push_back(rec.ema_t_s);
  }
  std::vector<PredictionRecord> trait_records = detail::trait_only_baseline(
      trait_rows, trait_row_times, cfg.trait_baseline_k, cfg.infogain_bins,
      cfg.meta_fit, cfg.decision_threshold, wr.meta_plan);
  std::vector<PredictionRecord> random_records = detail::random_baseline_records(
      tl_records, derive_seed(cfg.seed, 0x7a2d0000ULL));

  wr.records = tl_records;
  wr.records.insert(wr.records.end(), meta_records.begin(), meta_records.end());
  wr.records.insert(wr.records.end(), trait_records.begin(), trait_records.end());
  wr.records.insert(wr.records.end(), random_records.begin(), random_records.end());

  wr.audit = audit_leakage(wr.tl_plan, wr.meta_plan, wr.records, wr.norm_provenance);

  auto stage_records = [&](const char* st) {
    std::vector<PredictionRecord> out;
    for (const auto& r : wr.records)
      if (r.stage == st) out.push_back(r);
    return out;
  };
  wr.metrics_tl = compute_metrics(stage_records(stage::kTl));
  if (!meta_records.empty()) wr.metrics_meta = compute_metrics(meta_records);
  if (!trait_records.empty()) wr.metrics_trait = compute_metrics(trait_records);
  if (!random_records.empty()) wr.metrics_random = compute_metrics(random_records);
  return wr;
}

inline ExperimentResult run_experiment(const Dataset& input, ExperimentConfig cfg) {
  cfg.validate();
  Dataset ds = input;
  ExperimentResult res;
  res.trait_flagged = score_all_traits(ds);
  res.data_summary = dataset_summary(ds);

  std::map<std::string, const TraitProfile*> traits;
  const std::size_t n_scales = ds.scales.size();
  for (const auto& p : ds.participants)
    if (p.traits.complete(n_scales)) traits[p.id] = &p.traits;

  for (const auto& w : cfg.windows) {
    WindowResult wr = run_window_experiment(ds, traits, w, cfg);
    if (!wr.audit.ok())
      throw std::runtime_error(
          "leakage audit failed with " +
          std::to_string(wr.audit.violations.size()) + " violation(s): " +
          wr.audit.violations.front().what);
    res.windows.push_back(std::move(wr));
  }

  // Baselines over every EMA (traits need no heart-rate window).
  {
    std::vector<detail::TraitRow> rows;
    std::vector<double> times;
    std::vector<std::string> ids;
    for (const auto& p : ds.participants) {
      if (!traits.count(p.id) || p.emas.empty()) continue;
      ids.push_back(p.id);
      for (const auto& e : p.emas) {
        rows.push_back({traits.at(p.id), p.id, e.label()});
        times.push_back(e.t_s);
      }
    }
    if (ids.size() >= 2) {
      FoldPlan plan = plan_loocv(ids);
      std::vector<PredictionRecord> trait_recs = detail::trait_only_baseline(
          rows, times, cfg.trait_baseline_k, cfg.infogain_bins, cfg.meta_fit,
          cfg.decision_threshold, plan);
      std::vector<PredictionRecord> base_rows;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        PredictionRecord r;
        r.participant_id = rows[i].participant_id;
        r.ema_t_s = times[i];
        r.label = rows[i].label;
        base_rows.push_back(std::move(r));
      }
      std::vector<PredictionRecord> rand_recs = detail::random_baseline_records(
          base_rows, derive_seed(cfg.seed, 0x7a2d1111ULL));
      if (!trait_recs.empty() && !rand_recs.empty()) {
        res.trait_all = compute_metrics(trait_recs);
        res.random_all = compute_metrics(rand_recs);
        res.has_all_ema_baselines = true;
      }
    }
  }
  return res;
}

}  // namespace hrx
