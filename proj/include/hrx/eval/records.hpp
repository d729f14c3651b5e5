#pragma once
// Per-EMA prediction records with provenance, shared between the training
// stages that produce them and the evaluation stage that consumes them.

#include <string>
#include <vector>

namespace hrx {

namespace stage {
inline constexpr const char* kTl = "tl";
inline constexpr const char* kMeta = "meta";
inline constexpr const char* kBaselineTrait = "baseline_trait";
inline constexpr const char* kBaselineRandom = "baseline_random";
}  // namespace stage

struct PredictionRecord {
  std::string participant_id;
  double ema_t_s = 0;
  int label = 0;
  double tl_probability = -1.0;    // set by the TL stage (and carried by meta)
  double meta_probability = -1.0;  // set by the meta stage
  int predicted_class = 0;
  int fold_id = -1;                // fold that produced this record
  std::string stage;               // stage::k* tag
  std::string model_hash;
};

}  // namespace hrx
