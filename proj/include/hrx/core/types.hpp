#pragma once
// Domain types: duty-cycled heart-rate probes, momentary anxiety self-reports,
// baseline trait questionnaires, and the dataset container that groups them
// per participant.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hrx {

struct HrSample {
  double t_s = 0;     // seconds since epoch; strictly increasing within a probe
  double hr_bpm = 0;  // > 0
};

// One duty-cycle capture burst (~1 minute of ~1 Hz samples).
struct Probe {
  std::string id;
  std::vector<HrSample> samples;  // non-empty
  double start_s() const { return samples.front().t_s; }
  double span_s() const { return samples.back().t_s - samples.front().t_s; }
};

// Momentary anxiety self-report on a 1..scale_max slider.
// Rating 1 maps to class 0, anything above to class 1.
struct EmaResponse {
  double t_s = 0;
  int rating = 1;
  int scale_max = 10;
  int label() const { return rating > 1 ? 1 : 0; }
};

enum class ScaleId { SIAS, BFNE, DERS, DASS21, ARSQ, CDS2 };

inline constexpr std::array<ScaleId, 6> kAllScales = {
    ScaleId::SIAS, ScaleId::BFNE, ScaleId::DERS,
    ScaleId::DASS21, ScaleId::ARSQ, ScaleId::CDS2};

inline const char* to_string(ScaleId s) {
  switch (s) {
    case ScaleId::SIAS: return "SIAS";
    case ScaleId::BFNE: return "BFNE";
    case ScaleId::DERS: return "DERS";
    case ScaleId::DASS21: return "DASS21";
    case ScaleId::ARSQ: return "ARSQ";
    case ScaleId::CDS2: return "CDS2";
  }
  return "?";
}

inline std::optional<ScaleId> parse_scale_id(std::string_view s) {
  for (ScaleId id : kAllScales)
    if (s == to_string(id)) return id;
  return std::nullopt;
}

struct ScaleDecl {
  int item_count = 0;
  int item_min = 0;
  int item_max = 0;
};

struct TraitItemResponse {
  ScaleId scale = ScaleId::SIAS;
  int item_index = 0;            // 1-based
  std::optional<double> value;   // empty = missing
  bool reverse_scored = false;
};

// Aggregated scale scores after reverse coding and per-participant imputation.
struct TraitProfile {
  std::map<ScaleId, double> scores;
  bool complete(std::size_t n_scales) const { return scores.size() == n_scales; }
};

struct Participant {
  std::string id;
  int age = 20;               // used for the 220 - age plausibility ceiling
  bool age_defaulted = false; // set when age was not provided by the source
  std::vector<TraitItemResponse> trait_items;
  TraitProfile traits;        // derived; filled by the trait scoring step
  std::vector<Probe> probes;  // sorted by start time
  std::vector<EmaResponse> emas;  // sorted by time
};

struct Provenance {
  enum Kind { RealIngest, Synthetic };
  Kind kind = RealIngest;
  std::uint64_t seed = 0;
};

struct Dataset {
  std::vector<Participant> participants;  // unique ids, sorted by id
  std::map<ScaleId, ScaleDecl> scales;
  Provenance provenance;

  const Participant* find(const std::string& id) const {
    for (const auto& p : participants)
      if (p.id == id) return &p;
    return nullptr;
  }
  Participant* find(const std::string& id) {
    for (auto& p : participants)
      if (p.id == id) return &p;
    return nullptr;
  }
};

inline bool operator==(const HrSample& a, const HrSample& b) {
  return a.t_s == b.t_s && a.hr_bpm == b.hr_bpm;
}
inline bool operator==(const Probe& a, const Probe& b) {
  return a.id == b.id && a.samples == b.samples;
}
inline bool operator==(const EmaResponse& a, const EmaResponse& b) {
  return a.t_s == b.t_s && a.rating == b.rating && a.scale_max == b.scale_max;
}
inline bool operator==(const TraitItemResponse& a, const TraitItemResponse& b) {
  return a.scale == b.scale && a.item_index == b.item_index &&
         a.value == b.value && a.reverse_scored == b.reverse_scored;
}
inline bool operator==(const ScaleDecl& a, const ScaleDecl& b) {
  return a.item_count == b.item_count && a.item_min == b.item_min &&
         a.item_max == b.item_max;
}

// Field-exact equality over source data (derived trait scores excluded).
inline bool same_data(const Participant& a, const Participant& b) {
  return a.id == b.id && a.age == b.age && a.trait_items == b.trait_items &&
         a.probes == b.probes && a.emas == b.emas;
}
inline bool same_data(const Dataset& a, const Dataset& b) {
  if (a.scales != b.scales) return false;
  if (a.participants.size() != b.participants.size()) return false;
  for (std::size_t i = 0; i < a.participants.size(); ++i)
    if (!same_data(a.participants[i], b.participants[i])) return false;
  return true;
}

}  // namespace hrx
