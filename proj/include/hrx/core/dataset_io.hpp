#pragma once
// CSV ingestion and byte-stable export of datasets.
//
// Schemas (header row required, UTF-8, '.' decimal separator):
//   hr.csv     participant_id,probe_id,timestamp_s,hr_bpm
//   ema.csv    participant_id,timestamp_s,rating,scale_max
//   traits.csv participant_id,scale_id,item_index,value,reverse_scored
//   scales.csv scale_id,item_count,item_min,item_max
//
// Rows that violate a type invariant are rejected with a row-level
// diagnostic; structural problems (unknown scale, duplicate declarations)
// abort the ingest.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hrx/core/types.hpp"
#include "hrx/util/text.hpp"

#include <json.hpp>

namespace hrx {

struct RejectedRow {
  std::string file;
  long line = 0;
  std::string reason;
};

struct IngestReport {
  std::vector<RejectedRow> rejected;
  std::vector<std::string> age_defaulted;  // participants that got default_age
  long hr_rows = 0, ema_rows = 0, trait_rows = 0;
};

struct IngestOptions {
  double capture_span_s = 60.0;  // max allowed probe span
  int default_age = 20;
  std::map<std::string, int> ages;  // per-participant override (manifest)
};

namespace detail {

inline std::string row_err(std::string_view what) { return std::string(what); }

}  // namespace detail

inline Dataset ingest_dataset(const std::string& hr_path,
                              const std::string& ema_path,
                              const std::string& traits_path,
                              const std::string& scales_path,
                              IngestReport* report = nullptr,
                              const IngestOptions& opt = {}) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;

  Dataset ds;
  ds.provenance = {Provenance::RealIngest, 0};

  // scales.csv first; traits.csv validates against it.
  {
    CsvFile f(scales_path, {"scale_id", "item_count", "item_min", "item_max"});
    for (const auto& row : f.rows()) {
      if (row.fields.size() != 4)
        throw std::runtime_error(scales_path + ":" + std::to_string(row.line_no) +
                                 ": expected 4 fields");
      auto sid = parse_scale_id(row.fields[0]);
      if (!sid)
        throw std::runtime_error(scales_path + ":" + std::to_string(row.line_no) +
                                 ": unknown scale_id '" + std::string(row.fields[0]) + "'");
      long long count = 0, lo = 0, hi = 0;
      if (!parse_int(row.fields[1], count) || !parse_int(row.fields[2], lo) ||
          !parse_int(row.fields[3], hi) || count <= 0 || lo > hi)
        throw std::runtime_error(scales_path + ":" + std::to_string(row.line_no) +
                                 ": malformed scale declaration");
      if (ds.scales.count(*sid))
        throw std::runtime_error(scales_path + ":" + std::to_string(row.line_no) +
                                 ": duplicate scale " + std::string(row.fields[0]));
      ds.scales[*sid] = {static_cast<int>(count), static_cast<int>(lo),
                         static_cast<int>(hi)};
    }
  }

  std::map<std::string, Participant> by_id;
  auto participant = [&](std::string_view id) -> Participant& {
    auto it = by_id.find(std::string(id));
    if (it == by_id.end()) {
      Participant p;
      p.id = std::string(id);
      it = by_id.emplace(p.id, std::move(p)).first;
    }
    return it->second;
  };

  // hr.csv
  {
    CsvFile f(hr_path, {"participant_id", "probe_id", "timestamp_s", "hr_bpm"});
    std::map<std::pair<std::string, std::string>, std::size_t> probe_index;
    for (const auto& row : f.rows()) {
      ++rep.hr_rows;
      auto reject = [&](std::string_view why) {
        rep.rejected.push_back({hr_path, row.line_no, std::string(why)});
      };
      if (row.fields.size() != 4) { reject("expected 4 fields"); continue; }
      std::string_view pid = row.fields[0], probe_id = row.fields[1];
      double ts = 0, hr = 0;
      if (pid.empty() || probe_id.empty()) { reject("empty id"); continue; }
      if (!parse_double(row.fields[2], ts)) { reject("bad timestamp_s"); continue; }
      if (!parse_double(row.fields[3], hr)) { reject("bad hr_bpm"); continue; }
      if (hr <= 0) { reject("hr_bpm must be > 0"); continue; }
      Participant& p = participant(pid);
      auto key = std::make_pair(p.id, std::string(probe_id));
      auto it = probe_index.find(key);
      if (it == probe_index.end()) {
        p.probes.push_back(Probe{std::string(probe_id), {}});
        it = probe_index.emplace(key, p.probes.size() - 1).first;
      }
      Probe& probe = p.probes[it->second];
      if (!probe.samples.empty()) {
        if (ts <= probe.samples.back().t_s) {
          reject("timestamp not strictly increasing within probe");
          continue;
        }
        if (ts - probe.samples.front().t_s > opt.capture_span_s) {
          reject("probe span exceeds capture duration");
          continue;
        }
      }
      probe.samples.push_back({ts, hr});
    }
  }

  // ema.csv
  {
    CsvFile f(ema_path, {"participant_id", "timestamp_s", "rating", "scale_max"});
    for (const auto& row : f.rows()) {
      ++rep.ema_rows;
      auto reject = [&](std::string_view why) {
        rep.rejected.push_back({ema_path, row.line_no, std::string(why)});
      };
      if (row.fields.size() != 4) { reject("expected 4 fields"); continue; }
      std::string_view pid = row.fields[0];
      double ts = 0;
      long long rating = 0, scale_max = 0;
      if (pid.empty()) { reject("empty participant_id"); continue; }
      if (!parse_double(row.fields[1], ts)) { reject("bad timestamp_s"); continue; }
      if (!parse_int(row.fields[2], rating)) { reject("bad rating"); continue; }
      if (!parse_int(row.fields[3], scale_max) || scale_max < 2) {
        reject("bad scale_max");
        continue;
      }
      if (rating < 1 || rating > scale_max) {
        reject("rating out of range [1, scale_max]");
        continue;
      }
      EmaResponse ema;
      ema.t_s = ts;
      ema.rating = static_cast<int>(rating);
      ema.scale_max = static_cast<int>(scale_max);
      participant(pid).emas.push_back(ema);
    }
  }

  // traits.csv
  {
    CsvFile f(traits_path, {"participant_id", "scale_id", "item_index", "value",
                            "reverse_scored"});
    std::set<std::tuple<std::string, ScaleId, int>> seen;
    for (const auto& row : f.rows()) {
      ++rep.trait_rows;
      auto reject = [&](std::string_view why) {
        rep.rejected.push_back({traits_path, row.line_no, std::string(why)});
      };
      if (row.fields.size() != 5) { reject("expected 5 fields"); continue; }
      std::string_view pid = row.fields[0];
      if (pid.empty()) { reject("empty participant_id"); continue; }
      auto sid = parse_scale_id(row.fields[1]);
      if (!sid)
        throw std::runtime_error(traits_path + ":" + std::to_string(row.line_no) +
                                 ": unknown scale_id '" + std::string(row.fields[1]) + "'");
      const ScaleDecl& decl = ds.scales.at(*sid);
      long long idx = 0, rev = 0;
      if (!parse_int(row.fields[2], idx) || idx < 1 || idx > decl.item_count) {
        reject("item_index out of range");
        continue;
      }
      if (!parse_int(row.fields[4], rev) || (rev != 0 && rev != 1)) {
        reject("reverse_scored must be 0 or 1");
        continue;
      }
      TraitItemResponse item;
      item.scale = *sid;
      item.item_index = static_cast<int>(idx);
      item.reverse_scored = rev == 1;
      if (!row.fields[3].empty()) {
        double v = 0;
        if (!parse_double(row.fields[3], v)) { reject("bad value"); continue; }
        if (v < decl.item_min || v > decl.item_max) {
          reject("value outside the scale's item range");
          continue;
        }
        item.value = v;
      }
      auto key = std::make_tuple(std::string(pid), *sid, item.item_index);
      if (!seen.insert(key).second)
        throw std::runtime_error(traits_path + ":" + std::to_string(row.line_no) +
                                 ": duplicate participant item");
      participant(pid).trait_items.push_back(item);
    }
  }

  for (auto& [id, p] : by_id) {
    if (auto it = opt.ages.find(id); it != opt.ages.end()) {
      p.age = it->second;
    } else {
      p.age = opt.default_age;
      p.age_defaulted = true;
      rep.age_defaulted.push_back(id);
    }
    std::sort(p.probes.begin(), p.probes.end(),
              [](const Probe& a, const Probe& b) { return a.start_s() < b.start_s(); });
    std::sort(p.emas.begin(), p.emas.end(),
              [](const EmaResponse& a, const EmaResponse& b) { return a.t_s < b.t_s; });
    // Drop probes whose every sample was rejected.
    p.probes.erase(std::remove_if(p.probes.begin(), p.probes.end(),
                                  [](const Probe& pr) { return pr.samples.empty(); }),
                   p.probes.end());
    ds.participants.push_back(std::move(p));
  }
  return ds;
}

struct ExportPaths {
  std::string hr, ema, traits, scales;
};

inline void export_dataset(const Dataset& ds, const ExportPaths& paths) {
  std::string hr = "participant_id,probe_id,timestamp_s,hr_bpm\n";
  std::string ema = "participant_id,timestamp_s,rating,scale_max\n";
  std::string traits = "participant_id,scale_id,item_index,value,reverse_scored\n";
  std::string scales = "scale_id,item_count,item_min,item_max\n";

  std::vector<const Participant*> ps;
  for (const auto& p : ds.participants) ps.push_back(&p);
  std::sort(ps.begin(), ps.end(),
            [](const Participant* a, const Participant* b) { return a->id < b->id; });

  for (const Participant* p : ps) {
    std::vector<const Probe*> probes;
    for (const auto& pr : p->probes) probes.push_back(&pr);
    std::sort(probes.begin(), probes.end(), [](const Probe* a, const Probe* b) {
      return a->start_s() < b->start_s();
    });
    for (const Probe* pr : probes) {
      for (const auto& s : pr->samples) {
        hr += p->id + ',' + pr->id + ',' + format_double(s.t_s) + ',' +
              format_double(s.hr_bpm) + '\n';
      }
    }
    std::vector<EmaResponse> emas = p->emas;
    std::sort(emas.begin(), emas.end(),
              [](const EmaResponse& a, const EmaResponse& b) { return a.t_s < b.t_s; });
    for (const auto& e : emas) {
      ema += p->id + ',' + format_double(e.t_s) + ',' + std::to_string(e.rating) +
             ',' + std::to_string(e.scale_max) + '\n';
    }
    for (ScaleId sid : kAllScales) {
      if (!ds.scales.count(sid)) continue;
      std::vector<const TraitItemResponse*> items;
      for (const auto& it : p->trait_items)
        if (it.scale == sid) items.push_back(&it);
      std::sort(items.begin(), items.end(),
                [](const TraitItemResponse* a, const TraitItemResponse* b) {
                  return a->item_index < b->item_index;
                });
      for (const TraitItemResponse* it : items) {
        traits += p->id + ',' + to_string(sid) + ',' +
                  std::to_string(it->item_index) + ',' +
                  (it->value ? format_double(*it->value) : std::string()) + ',' +
                  (it->reverse_scored ? "1" : "0") + '\n';
      }
    }
  }
  for (ScaleId sid : kAllScales) {
    auto it = ds.scales.find(sid);
    if (it == ds.scales.end()) continue;
    scales += std::string(to_string(sid)) + ',' +
              std::to_string(it->second.item_count) + ',' +
              std::to_string(it->second.item_min) + ',' +
              std::to_string(it->second.item_max) + '\n';
  }

  write_file(paths.hr, hr);
  write_file(paths.ema, ema);
  write_file(paths.traits, traits);
  write_file(paths.scales, scales);
}

// Sidecar manifest: provenance and fields the CSV schemas cannot carry.
inline void write_manifest(const Dataset& ds, double capture_s,
                           const std::string& path,
                           const nlohmann::json& config_echo = {}) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["provenance"] =
      ds.provenance.kind == Provenance::Synthetic ? "synthetic" : "real-ingest";
  j["seed"] = ds.provenance.seed;
  j["capture_s"] = capture_s;
  nlohmann::json ages = nlohmann::json::object();
  for (const auto& p : ds.participants) ages[p.id] = p.age;
  j["ages"] = ages;
  if (!config_echo.is_null() && !config_echo.empty()) j["config"] = config_echo;
  write_file(path, j.dump(2) + "\n");
}

inline void apply_manifest(const std::string& path, IngestOptions& opt,
                           Provenance* prov = nullptr) {
  nlohmann::json j = nlohmann::json::parse(read_file(path));
  if (j.contains("capture_s")) opt.capture_span_s = j["capture_s"].get<double>();
  if (j.contains("ages"))
    for (auto& [id, age] : j["ages"].items())
      opt.ages[id] = age.get<int>();
  if (prov && j.contains("provenance")) {
    prov->kind = j["provenance"] == "synthetic" ? Provenance::Synthetic
                                                : Provenance::RealIngest;
    prov->seed = j.value("seed", 0ULL);
  }
}

}  // namespace hrx
