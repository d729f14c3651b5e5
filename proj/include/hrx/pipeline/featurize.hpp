#pragma once
// Dataset featurization: EMA-anchored windows -> beat-interval series ->
// recurrence plots and RQA vectors. Windows are independent, so the work
// partitions across threads with deterministic output slots.

#include <exception>
#include <thread>
#include <vector>

#include "hrx/core/types.hpp"
#include "hrx/preprocess/windows.hpp"
#include "hrx/recurrence/raster.hpp"
#include "hrx/recurrence/recurrence.hpp"
#include "hrx/train/examples.hpp"

namespace hrx {

struct FeaturizeConfig {
  WindowSpec window;
  EmbeddingParams embedding;
  int plot_side = 64;
  int rqa_l_min = 2;
  int rqa_v_min = 2;
  int jobs = 1;
};

struct FeaturizedWindow {
  LabeledWindow window;
  RecurrencePlot plot;
  RqaMeasures rqa;
};

namespace detail {

template <typename Fn>
inline void parallel_over(std::size_t n, int jobs, Fn&& fn) {
  if (jobs <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const int workers = std::min<int>(jobs, static_cast<int>(n));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = static_cast<std::size_t>(w); i < n;
             i += static_cast<std::size_t>(workers))
          fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace detail

struct FeaturizeStats {
  WindowExtractionStats windows;
  long too_short_for_embedding = 0;
};

inline std::vector<FeaturizedWindow> featurize_dataset(const Dataset& ds,
                                                       const FeaturizeConfig& cfg,
                                                       FeaturizeStats* stats = nullptr) {
  FeaturizeStats local;
  FeaturizeStats& st = stats ? *stats : local;
  std::vector<LabeledWindow> windows = extract_all_windows(ds, cfg.window, &st.windows);

  const long need = (cfg.embedding.dimension - 1) * cfg.embedding.delay + 2;
  std::vector<LabeledWindow> usable;
  for (auto& w : windows) {
    if (static_cast<long>(w.rri_series.size()) >= need) {
      usable.push_back(std::move(w));
    } else {
      ++st.too_short_for_embedding;
    }
  }

  std::vector<FeaturizedWindow> out(usable.size());
  detail::parallel_over(usable.size(), cfg.jobs, [&](std::size_t i) {
    FeaturizedWindow fw;
    fw.window = std::move(usable[i]);
    EmbeddedSeries pts = embed(fw.window.rri_series, cfg.embedding);
    RecurrenceMatrix rm = recurrence_matrix(pts, cfg.embedding);
    fw.plot = rasterize(rm, cfg.plot_side);
    fw.rqa = rqa_measures(rm, cfg.rqa_l_min, cfg.rqa_v_min);
    out[i] = std::move(fw);
  });
  return out;
}

inline std::vector<PlotExample> to_examples(const std::vector<FeaturizedWindow>& fws) {
  std::vector<PlotExample> out;
  out.reserve(fws.size());
  for (const auto& fw : fws)
    out.push_back({fw.window.participant_id, fw.window.ema_t_s, fw.window.label,
                   fw.plot});
  return out;
}

}  // namespace hrx
