#ifndef EBHMM_STAGING_HPP
#define EBHMM_STAGING_HPP

#include <utility>
#include <vector>

#include "ebhmm/cohort.hpp"
#include "ebhmm/inference.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm::staging {

struct StagePath {
  std::vector<int> stages;    // one per visit
  Scalar log_prob = 0.0;      // joint log probability of the path
  Matrix posterior_by_visit;  // smoothed T x (N+1) gamma
};

// Most probable state path for arbitrary log-domain HMM inputs; ties broken
// toward the lower state at every step. Shared by EB-HMM and CT-HMM staging.
std::pair<std::vector<int>, Scalar> viterbi_path(const Vector& log_pi,
                                                 const std::vector<Matrix>& log_trans,
                                                 const Matrix& log_emissions);

StagePath viterbi_stage(const Individual& individual, const inference::FittedModel& model);

struct StagePrediction {
  int stage = 0;
  Vector distribution;
};

// Push the last-visit smoothed posterior through the transition matrix for
// the horizon; argmax with ties toward the lower stage.
StagePrediction predict_next_stage(const Individual& individual,
                                   const inference::FittedModel& model,
                                   Scalar horizon_months);

}  // namespace ebhmm::staging

#endif
