#ifndef EBHMM_SYNTH_HPP
#define EBHMM_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ebhmm/cohort.hpp"
#include "ebhmm/markov.hpp"
#include "ebhmm/mixture.hpp"
#include "ebhmm/sequence.hpp"

namespace ebhmm::synth {

// Diagnosis by stage range: stages <= cn_max_stage are CN, stages
// <= mci_max_stage are MCI, higher stages AD.
struct LabelRule {
  int cn_max_stage = 2;
  int mci_max_stage = 8;

  Diagnosis label_for(int stage) const {
    if (stage <= cn_max_stage) return Diagnosis::CN;
    if (stage <= mci_max_stage) return Diagnosis::MCI;
    return Diagnosis::AD;
  }
};

// Known generating parameters for synthetic cohorts.
struct GroundTruth {
  EventSequence sequence;
  markov::TransitionModel transition;
  std::vector<mixture::MixturePair> mixtures;
  LabelRule label_rule;
  std::vector<std::string> feature_names;
  std::vector<Direction> feature_directions;
};

void validate_truth(const GroundTruth& truth);

// A ready-made truth with n_features events: staged means separated by
// `separation_sds` control sd, banded monotone dynamics, band-2 prior.
GroundTruth default_truth(int n_features, double separation_sds = 3.0,
                          Scalar base_interval_months = 12.0);

// Draw a cohort: initial stage from pi, stage jumps per schedule gap via
// transition_over_interval, features from the patient component once their
// event position is below the stage, labels from the rule. Missingness is
// applied per cell with probability missing_fraction.
Cohort sample_cohort(const GroundTruth& truth, Index n_individuals,
                     const std::vector<Scalar>& visit_schedule_months,
                     double missing_fraction, std::uint64_t seed);

// True stage of each individual at each visit from the most recent draw is
// needed for recovery scoring; sample_cohort_with_stages also returns them.
struct SampledCohort {
  Cohort cohort;
  std::vector<std::vector<int>> true_stages;
};

SampledCohort sample_cohort_with_stages(const GroundTruth& truth, Index n_individuals,
                                        const std::vector<Scalar>& visit_schedule_months,
                                        double missing_fraction, std::uint64_t seed);

}  // namespace ebhmm::synth

#endif
