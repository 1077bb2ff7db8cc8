#ifndef EBHMM_INFERENCE_HPP
#define EBHMM_INFERENCE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ebhmm/cohort.hpp"
#include "ebhmm/markov.hpp"
#include "ebhmm/mixture.hpp"
#include "ebhmm/sequence.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm::inference {

// Smoothed posteriors for one individual: gamma is T x (N+1), xi holds one
// (N+1) x (N+1) pairwise slice per visit gap.
struct PosteriorTables {
  Matrix gamma;
  std::vector<Matrix> xi;
  Scalar log_likelihood = 0.0;
};

struct FitDiagnostics {
  std::vector<Scalar> log_likelihood_trace;  // accepted score after each sweep
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> notes;
};

struct FittedModel {
  EventSequence sequence;
  markov::TransitionModel transition;
  std::vector<mixture::MixturePair> mixtures;
  FitDiagnostics diagnostics;
};

struct FitConfig {
  Scalar base_interval_months = 12.0;
  int band_width = 2;
  int max_outer_iter = 100;
  int random_restarts = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  Diagnosis patient_label = Diagnosis::AD;
};

// Exact smoothed posteriors and log marginal likelihood for one individual.
// Emissions are log-domain, one row per visit; each gap gets its own
// transition matrix via transition_over_interval.
PosteriorTables forward_backward(const Matrix& log_emissions,
                                 const std::vector<Scalar>& gap_months,
                                 const markov::TransitionModel& model);

// Forward-recursion log likelihood only.
Scalar log_likelihood_forward(const Matrix& log_emissions,
                              const std::vector<Scalar>& gap_months,
                              const markov::TransitionModel& model);

struct TransitionUpdate {
  Vector pi;
  Matrix trans;
  std::vector<std::string> notes;
};

// Single-pass M-step: pi averages the visit-0 posteriors; trans is the
// xi/gamma count ratio pushed through the structure prior. Stages with zero
// visit mass fall back to self-transitions; with no observed gaps at all the
// initial trans is returned unchanged. Assumes base-interval gaps.
TransitionUpdate update_transition(const std::vector<PosteriorTables>& posteriors,
                                   const Matrix& init_trans, int band_width,
                                   bool monotone = true);

// Nested EM: greedy coordinate ascent over event positions, each candidate
// sequence scored by one forward-backward pass plus one transition update
// from freshly initialised pi, Q.
FittedModel fit(const Cohort& cohort, const std::vector<mixture::MixturePair>& mixtures,
                const FitConfig& config = {});

Scalar total_log_likelihood(const Cohort& cohort, const FittedModel& model,
                            int threads = 1);

// Weakly-informative banded monotone start: 0.9 self-transition mass, the
// rest split over in-band forward entries.
Matrix default_transition_init(Index n_stages, int band_width);

// Visit gaps in months for one individual.
std::vector<Scalar> visit_gaps(const Individual& individual);

}  // namespace ebhmm::inference

#endif
