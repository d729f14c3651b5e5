#pragma once
// Synthetic dataset generator. Produces duty-cycled heart-rate streams,
// momentary anxiety self-reports, and baseline trait questionnaires from a
// latent two-state anxiety process, so the full pipeline can be exercised
// and calibrated without any private study data.
//
// Signal model: each participant carries an anxiety propensity that sets the
// long-run fraction of time spent in the anxious state (semi-Markov dwell
// times of 1-4 hours). While anxious, heart rate shifts up by
// anxiety_hr_shift_bpm * coupling_strength and short-term variability drops
// (slower, smaller AR(1) fluctuations). Self-report labels follow the latent
// state up to a small noise rate; trait scores correlate with propensity
// through per-scale affinities. coupling_strength = 0 leaves heart rate and
// traits carrying no label information at all.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hrx/core/types.hpp"
#include "hrx/util/rng.hpp"

namespace hrx {

struct SynthConfig {
  std::uint64_t seed = 1;
  int n_participants = 12;
  int n_days = 10;
  double duty_cycle_period_s = 300.0;
  double capture_s = 60.0;
  double hr_sampling_hz = 1.0;
  int emas_per_day = 7;
  int ema_scale_max = 10;          // R: 10 for the slider scale, 5 for TILES-style
  double coupling_strength = 1.0;  // 0 = no physiological signal
  double base_hr_bpm = 75.0;
  double anxiety_hr_shift_bpm = 18.0;
  double probe_missing_rate = 0.05;
  double ema_missing_rate = 0.05;
  double trait_item_missing_rate = 0.0059;
  double ema_label_noise = 0.05;  // rate of self-reports contradicting the state
  double probe_jitter_s = 2.0;    // bound on period deviation between probes
  int participant_age = 20;
  // Trait-label coupling; < 0 means "follow coupling_strength".
  double trait_coupling = -1.0;
  // Per-scale affinity multipliers (how strongly a scale tracks propensity).
  // Overridable; empty entries fall back to these defaults.
  std::map<ScaleId, double> trait_scale_affinity;
  // When >= 0, plants the overall class-1 fraction exactly (quota over emitted
  // self-reports). Intended for descriptive-statistics checks with coupling 0.
  double target_class1_fraction = -1.0;
  double propensity_lo = 0.15;
  double propensity_hi = 0.85;
};

namespace detail {

inline double default_affinity(ScaleId s) {
  switch (s) {
    case ScaleId::SIAS: return 0.90;
    case ScaleId::DASS21: return 0.75;
    case ScaleId::BFNE: return 0.50;
    case ScaleId::DERS: return 0.25;
    case ScaleId::ARSQ: return 0.0;
    case ScaleId::CDS2: return 0.0;
  }
  return 0.0;
}

inline const std::vector<int>& reverse_items(ScaleId s) {
  static const std::vector<int> sias = {5, 9, 11};
  static const std::vector<int> bfne = {2, 4, 7, 10};
  static const std::vector<int> ders = {1, 2, 6, 7, 8, 10, 17, 20, 22, 24, 34};
  static const std::vector<int> none = {};
  switch (s) {
    case ScaleId::SIAS: return sias;
    case ScaleId::BFNE: return bfne;
    case ScaleId::DERS: return ders;
    default: return none;
  }
}

inline std::map<ScaleId, ScaleDecl> default_scales() {
  return {
      {ScaleId::SIAS, {20, 0, 4}},  {ScaleId::BFNE, {12, 1, 5}},
      {ScaleId::DERS, {36, 1, 5}},  {ScaleId::DASS21, {21, 0, 3}},
      {ScaleId::ARSQ, {9, 1, 9}},   {ScaleId::CDS2, {2, 0, 4}},
  };
}

// Piecewise-constant two-state process; segment k covers [edges[k], edges[k+1]).
struct LatentProcess {
  std::vector<double> edges;
  std::vector<int> states;
  int state_at(double t) const {
    auto it = std::upper_bound(edges.begin(), edges.end(), t);
    std::size_t k = static_cast<std::size_t>(it - edges.begin());
    if (k == 0) return states.front();
    if (k > states.size()) return states.back();
    return states[k - 1];
  }
};

inline LatentProcess make_latent(Rng& rng, double span_s, double propensity) {
  LatentProcess lp;
  double fa = std::max(0.1, propensity / 0.5);
  double fc = std::max(0.1, (1.0 - propensity) / 0.5);
  int state = rng.bernoulli(propensity) ? 1 : 0;
  double t = 0.0;
  lp.edges.push_back(0.0);
  while (t < span_s) {
    double dwell = rng.uniform(3600.0, 4.0 * 3600.0) * (state == 1 ? fa : fc);
    t += dwell;
    lp.states.push_back(state);
    lp.edges.push_back(t);
    state = 1 - state;
  }
  return lp;
}

}  // namespace detail

inline void validate(const SynthConfig& c) {
  auto fail = [](const std::string& m) {
    throw std::invalid_argument("synth config: " + m);
  };
  if (c.n_participants < 1) fail("n_participants must be >= 1");
  if (c.n_days < 1) fail("n_days must be >= 1");
  if (c.duty_cycle_period_s <= 0) fail("duty_cycle_period_s must be > 0");
  if (c.capture_s <= 0 || c.capture_s > c.duty_cycle_period_s)
    fail("capture_s must be in (0, duty_cycle_period_s]");
  if (c.hr_sampling_hz <= 0) fail("hr_sampling_hz must be > 0");
  if (c.emas_per_day < 1 || c.emas_per_day > 7)
    fail("emas_per_day must be in [1, 7] (two-hour slots, 8 AM to 10 PM)");
  if (c.ema_scale_max < 2) fail("ema_scale_max must be >= 2");
  if (c.coupling_strength < 0 || c.coupling_strength > 1)
    fail("coupling_strength must be in [0, 1]");
  if (c.base_hr_bpm <= 40) fail("base_hr_bpm must be > 40");
  if (c.anxiety_hr_shift_bpm < 0) fail("anxiety_hr_shift_bpm must be >= 0");
  for (double r : {c.probe_missing_rate, c.ema_missing_rate,
                   c.trait_item_missing_rate, c.ema_label_noise}) {
    if (r < 0 || r >= 1) fail("missingness/noise rates must be in [0, 1)");
  }
  if (c.probe_jitter_s < 0 || c.probe_jitter_s >= c.duty_cycle_period_s / 2)
    fail("probe_jitter_s must be in [0, duty_cycle_period_s/2)");
  if (c.participant_age < 1 || c.participant_age >= 180)
    fail("participant_age must make 220 - age positive and sane");
  if (c.target_class1_fraction >= 0 &&
      (c.target_class1_fraction > 1))
    fail("target_class1_fraction must be in [0, 1] or negative");
  if (!(c.propensity_lo > 0 && c.propensity_hi < 1 &&
        c.propensity_lo <= c.propensity_hi))
    fail("propensity bounds must satisfy 0 < lo <= hi < 1");
}

inline Dataset generate_synthetic(const SynthConfig& cfg) {
  validate(cfg);
  constexpr double kDay = 86400.0;
  constexpr double kCollectStart = 8.0 * 3600.0;  // privacy blackout ends 8 AM
  constexpr double kEmaSlot = 2.0 * 3600.0;

  Dataset ds;
  ds.scales = detail::default_scales();
  ds.provenance = {Provenance::Synthetic, cfg.seed};

  const double span = cfg.n_days * kDay;
  const double trait_c =
      cfg.trait_coupling < 0 ? cfg.coupling_strength : cfg.trait_coupling;
  const int id_width =
      static_cast<int>(std::to_string(cfg.n_participants).size());

  // AR(1) fluctuation parameters per state; anxious = smoother and smaller.
  const double c = cfg.coupling_strength;
  const double phi_calm = 0.20, sigma_calm = 3.0;
  const double phi_anx = phi_calm + 0.72 * c;
  const double sigma_anx = sigma_calm * (1.0 - 0.55 * c);

  double quota_acc = 0.0;  // global accumulator for planted class balance

  for (int pi = 0; pi < cfg.n_participants; ++pi) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(pi)));

    Participant p;
    {
      std::string num = std::to_string(pi + 1);
      p.id = "P" + std::string(id_width - num.size(), '0') + num;
    }
    p.age = cfg.participant_age;

    const double propensity = rng.uniform(cfg.propensity_lo, cfg.propensity_hi);
    const double prop_mid = 0.5 * (cfg.propensity_lo + cfg.propensity_hi);
    const double prop_sd =
        std::max(1e-9, (cfg.propensity_hi - cfg.propensity_lo) / std::sqrt(12.0));
    const double zhat = (propensity - prop_mid) / prop_sd;

    // Baseline questionnaires.
    for (ScaleId sid : kAllScales) {
      const ScaleDecl& decl = ds.scales.at(sid);
      double affinity = detail::default_affinity(sid);
      if (auto it = cfg.trait_scale_affinity.find(sid);
          it != cfg.trait_scale_affinity.end())
        affinity = it->second;
      const double r = std::clamp(affinity * trait_c, 0.0, 0.98);
      const double latent = r * zhat + std::sqrt(1.0 - r * r) * rng.normal();
      const double total_min = decl.item_count * decl.item_min;
      const double total_max = decl.item_count * decl.item_max;
      const double target = std::clamp(
          0.5 * (total_min + total_max) + 0.18 * (total_max - total_min) * latent,
          total_min, total_max);
      const double item_mean = target / decl.item_count;
      const auto& rev = detail::reverse_items(sid);

      int n_valid = 0;
      std::vector<TraitItemResponse> items;
      for (int j = 1; j <= decl.item_count; ++j) {
        TraitItemResponse item;
        item.scale = sid;
        item.item_index = j;
        item.reverse_scored =
            std::find(rev.begin(), rev.end(), j) != rev.end();
        double v = std::round(
            std::clamp(item_mean + rng.normal(0.0, 0.55 * (decl.item_max - decl.item_min) / 3.0),
                       static_cast<double>(decl.item_min),
                       static_cast<double>(decl.item_max)));
        if (rng.bernoulli(cfg.trait_item_missing_rate)) {
          item.value = std::nullopt;
        } else {
          // Reverse-scored items are stored raw; scoring re-reverses them.
          item.value = item.reverse_scored ? decl.item_min + decl.item_max - v : v;
          ++n_valid;
        }
        items.push_back(item);
      }
      if (n_valid == 0) {  // keep at least one valid response per scale
        double v = std::round(item_mean);
        items.front().value = items.front().reverse_scored
                                  ? decl.item_min + decl.item_max - v
                                  : v;
      }
      for (auto& it : items) p.trait_items.push_back(it);
    }

    // Latent anxiety state over the whole collection span.
    detail::LatentProcess latent = detail::make_latent(rng, span, propensity);

    // Duty-cycled heart-rate probes, 8 AM to midnight.
    const int samples_per_probe =
        static_cast<int>(std::floor(cfg.capture_s * cfg.hr_sampling_hz + 1e-9));
    const double dt = 1.0 / cfg.hr_sampling_hz;
    int probe_counter = 0;
    for (int day = 0; day < cfg.n_days; ++day) {
      double t = day * kDay + kCollectStart +
                 std::floor(rng.uniform(0.0, cfg.probe_jitter_s + 1.0));
      while (t + cfg.capture_s <= (day + 1) * kDay) {
        const double start = t;
        t += cfg.duty_cycle_period_s +
             std::floor(rng.uniform(-cfg.probe_jitter_s, cfg.probe_jitter_s + 1.0));
        // AR state draws happen regardless of probe missingness so the HR
        // stream does not depend on which probes survive.
        const int s0 = latent.state_at(start);
        double phi = (s0 == 1) ? phi_anx : phi_calm;
        double sig = (s0 == 1) ? sigma_anx : sigma_calm;
        double x = rng.normal(0.0, sig / std::sqrt(1.0 - phi * phi));
        Probe probe;
        probe.id = "p" + std::to_string(++probe_counter);
        probe.samples.reserve(samples_per_probe);
        for (int j = 0; j < samples_per_probe; ++j) {
          const double ts = start + j * dt;
          const int s = latent.state_at(ts);
          phi = (s == 1) ? phi_anx : phi_calm;
          sig = (s == 1) ? sigma_anx : sigma_calm;
          x = phi * x + sig * std::sqrt(1.0 - phi * phi) * rng.normal();
          const double mean =
              cfg.base_hr_bpm + cfg.anxiety_hr_shift_bpm * c * s;
          double hr = std::max(1.0, mean + x);
          hr = std::round(hr * 10.0) / 10.0;  // watch-grade 0.1 bpm precision
          probe.samples.push_back({ts, hr});
        }
        if (!rng.bernoulli(cfg.probe_missing_rate)) {
          p.probes.push_back(std::move(probe));
        }
      }
    }

    // Momentary self-reports in two-hour slots starting 8 AM.
    for (int day = 0; day < cfg.n_days; ++day) {
      for (int k = 0; k < cfg.emas_per_day; ++k) {
        const double slot = day * kDay + kCollectStart + k * kEmaSlot;
        const double ts = slot + std::floor(rng.uniform(0.0, kEmaSlot - 1.0));
        const bool missing = rng.bernoulli(cfg.ema_missing_rate);
        const int state = latent.state_at(ts);
        const bool flip = rng.bernoulli(cfg.ema_label_noise);
        if (missing) continue;
        int label;
        if (cfg.target_class1_fraction >= 0) {
          quota_acc += cfg.target_class1_fraction;
          label = quota_acc >= 1.0 ? 1 : 0;
          if (label == 1) quota_acc -= 1.0;
        } else {
          label = flip ? 1 - state : state;
        }
        EmaResponse ema;
        ema.t_s = ts;
        ema.scale_max = cfg.ema_scale_max;
        ema.rating = label == 0 ? 1 : 2 + static_cast<int>(rng.below(
                                           static_cast<std::uint64_t>(
                                               cfg.ema_scale_max - 1)));
        p.emas.push_back(ema);
      }
    }

    ds.participants.push_back(std::move(p));
  }
  return ds;
}

}  // namespace hrx
