#ifndef EBHMM_MIXTURE_HPP
#define EBHMM_MIXTURE_HPP

#include <utility>
#include <vector>

#include "ebhmm/cohort.hpp"
#include "ebhmm/sequence.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm::mixture {

struct GaussianParams {
  Scalar mu = 0.0;
  Scalar sigma = 1.0;   // > 0
  Scalar weight = 0.5;  // in [0,1]
};

// Per-feature event distribution: patient component describes the feature
// after its event, control before it. weights sum to 1.
struct MixturePair {
  GaussianParams patient;
  GaussianParams control;
  int feature_index = 0;
  bool em_converged = true;
};

struct MixtureConfig {
  int max_iter = 200;
  double tol = 1e-6;
  // Component means may drift at most this many labelled-group sd from
  // their label-derived initial values.
  double mean_drift_limit_sds = 1.0;
  double sigma_floor_factor = 1e-6;
  int min_group_size = 5;
};

Scalar log_gaussian(Scalar x, const GaussianParams& p);

// Fit one two-component mixture per feature. Labelled values initialise the
// components; EM then runs over all observed values of the feature with the
// patient mean constrained to the abnormal side of the control mean.
std::vector<MixturePair> fit_mixtures(const Cohort& cohort,
                                      Diagnosis patient_label,
                                      Diagnosis control_label,
                                      const MixtureConfig& config = {});

// (patient density, control density) at x; both exactly 1 when x is missing
// so the feature drops out of every likelihood ratio.
std::pair<Scalar, Scalar> event_likelihood_pair(Scalar x, bool is_missing,
                                                const MixturePair& pair);

// log emission of one observation at stage k: features at sequence positions
// 0..k-1 use their patient density, the rest control; missing features add 0.
Scalar stage_log_emission(const Observation& obs, int stage,
                          const EventSequence& sequence,
                          const std::vector<MixturePair>& pairs);

Scalar stage_emission(const Observation& obs, int stage,
                      const EventSequence& sequence,
                      const std::vector<MixturePair>& pairs);

// T x (I+1) matrix of stage_log_emission values for every visit and stage.
Matrix log_emission_matrix(const Individual& individual,
                           const EventSequence& sequence,
                           const std::vector<MixturePair>& pairs);

}  // namespace ebhmm::mixture

#endif
