#ifndef EBHMM_SERIALIZE_HPP
#define EBHMM_SERIALIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ebhmm/baseline.hpp"
#include "ebhmm/cohort.hpp"
#include "ebhmm/inference.hpp"
#include "ebhmm/markov.hpp"
#include "ebhmm/synth.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm::serialize {

inline constexpr int kFormatVersion = 1;

// Stamped into every artifact so a run can be reproduced exactly.
struct ArtifactMeta {
  std::string config_hash;  // 16 hex digits
  std::uint64_t seed = 0;
};

// On-disk model document; model_type selects which half is populated.
struct ModelFile {
  std::string model_type;  // "ebhmm" or "cthmm"
  std::vector<std::string> feature_names;
  std::vector<Direction> feature_directions;
  inference::FittedModel event_model;
  baseline::CthmmModel cthmm_model;
  ArtifactMeta meta;
};

void save_model(const ModelFile& file, const std::string& path);
ModelFile load_model(const std::string& path);

void save_truth(const synth::GroundTruth& truth, const ArtifactMeta& meta,
                const std::string& path);
synth::GroundTruth load_truth(const std::string& path);

// Two columns: event_name, event_time_months; one row per event in order.
void save_timeline_csv(const markov::Timeline& timeline,
                       const std::vector<std::string>& event_names,
                       const ArtifactMeta& meta, const std::string& path);
void save_timeline_json(const markov::Timeline& timeline,
                        const std::vector<std::string>& event_names,
                        const ArtifactMeta& meta, const std::string& path);

struct StagingRow {
  std::string subject_id;
  Scalar visit_time = 0.0;
  int stage = 0;
  Scalar max_posterior = 0.0;
  int predicted_stage_12m = 0;
};

void save_staging_csv(const std::vector<StagingRow>& rows, const ArtifactMeta& meta,
                      const std::string& path);

struct PredictionRow {
  std::string subject_id;
  int predicted_stage = 0;
  Vector distribution;  // over stages at the horizon
};

void save_prediction_csv(const std::vector<PredictionRow>& rows, Scalar horizon_months,
                         const ArtifactMeta& meta, const std::string& path);

}  // namespace ebhmm::serialize

#endif
