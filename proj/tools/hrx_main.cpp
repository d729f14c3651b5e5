// Batch CLI wiring the library into reproducible experiments.
//
//   hrx synth     --config cfg.ini [--out DIR] [--seed N]
//   hrx featurize --config cfg.ini [--out DIR] [--seed N] [--jobs N]
//   hrx run       --config cfg.ini [--out DIR] [--seed N] [--jobs N]
//   hrx verify    [--quick]
//   hrx report    --in report.json [--out report.md]
//
// Exit codes: 0 ok, 1 audit/oracle failure, 2 input error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hrx/config.hpp"
#include "hrx/core/dataset_io.hpp"
#include "hrx/core/summary.hpp"
#include "hrx/io/reports.hpp"
#include "hrx/pipeline/experiment.hpp"
#include "hrx/verify.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // audit or oracle failure
constexpr int kExitInput = 2;    // missing/invalid input

struct Overrides {
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
};

hrx::RunConfig load_config(const std::string& path, const Overrides& ov) {
  if (!fs::exists(path))
    throw hrx::ConfigError("config file not found: " + path);
  hrx::RunConfig rc = hrx::load_run_config(path);
  if (!ov.out.empty()) rc.out_dir = ov.out;
  if (ov.seed_set) {
    rc.experiment.seed = ov.seed;  // master seed overrides all stage seeds
    rc.synth.seed = ov.seed;
  }
  if (ov.jobs > 0) rc.experiment.jobs = ov.jobs;
  return rc;
}

hrx::Dataset load_dataset(const hrx::RunConfig& rc) {
  if (rc.synthetic) return hrx::generate_synthetic(rc.synth);
  for (const std::string& p :
       {rc.hr_path, rc.ema_path, rc.traits_path, rc.scales_path}) {
    if (!fs::exists(p))
      throw hrx::ConfigError("input file not found: " + p);
  }
  hrx::IngestOptions opt;
  hrx::Provenance prov;
  if (!rc.manifest_path.empty()) {
    if (!fs::exists(rc.manifest_path))
      throw hrx::ConfigError("input file not found: " + rc.manifest_path);
    hrx::apply_manifest(rc.manifest_path, opt, &prov);
  }
  hrx::IngestReport report;
  hrx::Dataset ds = hrx::ingest_dataset(rc.hr_path, rc.ema_path, rc.traits_path,
                                        rc.scales_path, &report, opt);
  ds.provenance = prov;
  if (!report.rejected.empty()) {
    std::cerr << "ingest: rejected " << report.rejected.size() << " row(s)\n";
    for (std::size_t i = 0; i < report.rejected.size() && i < 10; ++i) {
      const auto& r = report.rejected[i];
      std::cerr << "  " << r.file << ":" << r.line << ": " << r.reason << "\n";
    }
  }
  if (!report.age_defaulted.empty())
    std::cerr << "ingest: defaulted age for " << report.age_defaulted.size()
              << " participant(s)\n";
  return ds;
}

std::string window_tag(const hrx::WindowSpec& w) {
  return hrx::format_double(w.length_s);
}

int cmd_synth(const std::string& config_path, const Overrides& ov) {
  hrx::RunConfig rc = load_config(config_path, ov);
  hrx::Dataset ds = hrx::generate_synthetic(rc.synth);
  const fs::path dir = fs::path(rc.out_dir) / "dataset";
  fs::create_directories(dir);
  hrx::ExportPaths paths{(dir / "hr.csv").string(), (dir / "ema.csv").string(),
                         (dir / "traits.csv").string(),
                         (dir / "scales.csv").string()};
  hrx::export_dataset(ds, paths);
  hrx::write_manifest(ds, rc.synth.capture_s, (dir / "manifest.json").string(),
                      hrx::config_echo(rc)["dataset"]);
  const hrx::DatasetSummary s = hrx::dataset_summary(ds);
  std::cout << "wrote " << dir.string() << ": " << s.n_participants
            << " participants, " << s.n_emas << " EMAs, class-1 fraction "
            << hrx::format_double(s.class1_fraction) << "\n";
  return kExitOk;
}

int cmd_featurize(const std::string& config_path, const Overrides& ov) {
  hrx::RunConfig rc = load_config(config_path, ov);
  hrx::Dataset ds = load_dataset(rc);
  fs::create_directories(rc.out_dir);
  for (const auto& wspec : rc.experiment.windows) {
    hrx::FeaturizeConfig fc;
    fc.window = wspec;
    fc.embedding = rc.experiment.embedding;
    fc.plot_side = rc.experiment.plot_side;
    fc.jobs = rc.experiment.jobs;
    hrx::FeaturizeStats stats;
    auto fws = hrx::featurize_dataset(ds, fc, &stats);
    const std::string tag = window_tag(wspec);
    hrx::write_file((fs::path(rc.out_dir) / ("windows_" + tag + ".jsonl")).string(),
                    hrx::windows_jsonl(fws));
    if (rc.export_plots) {
      const fs::path pdir = fs::path(rc.out_dir) / ("plots_" + tag);
      fs::create_directories(pdir);
      for (const auto& fw : fws) {
        const std::string base = fw.window.participant_id + "_" +
                                 hrx::format_double(fw.window.ema_t_s);
        hrx::write_pgm(fw.plot, (pdir / (base + ".pgm")).string());
        if (rc.export_png)
          hrx::write_png(fw.plot, (pdir / (base + ".png")).string());
      }
    }
    std::cout << "window " << tag << "s: " << fws.size() << " of "
              << stats.windows.emas_total << " EMAs usable ("
              << stats.windows.emas_excluded << " excluded)\n";
  }
  return kExitOk;
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
  hrx::RunConfig rc = load_config(config_path, ov);
  hrx::Dataset ds = load_dataset(rc);
  fs::create_directories(rc.out_dir);
  hrx::ExperimentResult res = hrx::run_experiment(ds, rc.experiment);

  std::string predictions;
  for (const auto& w : res.windows)
    predictions += hrx::predictions_jsonl(w.records, w.window.length_s);
  hrx::write_file((fs::path(rc.out_dir) / "predictions.jsonl").string(), predictions);

  nlohmann::json report = hrx::report_json(res, hrx::config_echo(rc));
  hrx::write_file((fs::path(rc.out_dir) / "report.json").string(),
                  report.dump(2) + "\n");
  hrx::write_file((fs::path(rc.out_dir) / "report.md").string(),
                  hrx::report_markdown(report));

  const fs::path tdir = fs::path(rc.out_dir) / "traces";
  fs::create_directories(tdir);
  for (const auto& w : res.windows) {
    const std::string tag = window_tag(w.window);
    hrx::write_file((tdir / ("base_" + tag + ".csv")).string(),
                    hrx::traces_csv(w.base_folds));
    hrx::write_file((tdir / ("head_" + tag + ".csv")).string(),
                    hrx::traces_csv(w.head_folds));
  }

  bool audit_ok = true;
  for (const auto& w : res.windows) {
    audit_ok = audit_ok && w.audit.ok();
    std::cout << "window " << window_tag(w.window) << "s: meta BA "
              << hrx::format_double(w.metrics_meta.balanced_accuracy)
              << ", tl-only BA "
              << hrx::format_double(w.metrics_tl.balanced_accuracy)
              << ", trait-only BA "
              << hrx::format_double(w.metrics_trait.balanced_accuracy)
              << ", random BA "
              << hrx::format_double(w.metrics_random.balanced_accuracy)
              << ", audit " << (w.audit.ok() ? "ok" : "FAILED") << "\n";
  }
  std::cout << "report: " << (fs::path(rc.out_dir) / "report.json").string() << "\n";
  return audit_ok ? kExitOk : kExitFailure;
}

int cmd_verify(bool quick) {
  auto results = hrx::oracle::run_suite(quick);
  int failures = 0;
  for (const auto& r : results) {
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
    failures += r.pass ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all oracles passed\n"
                              : std::to_string(failures) + " oracle(s) failed\n");
  return failures == 0 ? kExitOk : kExitFailure;
}

int cmd_report(const std::string& in_path, const std::string& out_path) {
  if (!fs::exists(in_path))
    throw hrx::ConfigError("report file not found: " + in_path);
  nlohmann::json report = nlohmann::json::parse(hrx::read_file(in_path));
  const std::string md = hrx::report_markdown(report);
  if (out_path.empty()) {
    std::cout << md;
  } else {
    hrx::write_file(out_path, md);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"heart-rate recurrence pipeline for momentary anxiety prediction"};
  app.require_subcommand(1);

  Overrides ov;
  std::string config_path, report_in, report_out;
  bool quick = false;

  auto add_common = [&](CLI::App* cmd, bool with_jobs) {
    cmd->add_option("--config", config_path, "configuration file")->required();
    cmd->add_option("--out", ov.out, "output directory override");
    cmd->add_option("--seed", ov.seed, "master seed; overrides all stage seeds")
        ->each([&](const std::string&) { ov.seed_set = true; });
    if (with_jobs)
      cmd->add_option("--jobs", ov.jobs, "fold/window parallelism (default 1)");
  };

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth, false);
  CLI::App* featurize =
      app.add_subcommand("featurize", "extract windows and recurrence plots");
  add_common(featurize, true);
  CLI::App* run = app.add_subcommand("run", "run the full nested experiment");
  add_common(run, true);
  CLI::App* verify = app.add_subcommand("verify", "run the oracle suite");
  verify->add_flag("--quick", quick, "reduced iteration counts");
  CLI::App* report = app.add_subcommand("report", "render report.md from report.json");
  report->add_option("--in", report_in, "report.json path")->required();
  report->add_option("--out", report_out, "output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(config_path, ov);
    if (featurize->parsed()) return cmd_featurize(config_path, ov);
    if (run->parsed()) return cmd_run(config_path, ov);
    if (verify->parsed()) return cmd_verify(quick);
    if (report->parsed()) return cmd_report(report_in, report_out);
  } catch (const hrx::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInput;
}
