#ifndef EBHMM_BASELINE_HPP
#define EBHMM_BASELINE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ebhmm/cohort.hpp"
#include "ebhmm/staging.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm::baseline {

enum class CovarianceKind { SharedFull, PerStateDiagonal };

std::string to_string(CovarianceKind k);
CovarianceKind covariance_kind_from_string(const std::string& s);

// Continuous-time HMM with Gaussian emissions: the unstructured comparison
// model. States carry per-dimension means plus either one shared full
// covariance or per-state diagonal variances.
struct CthmmModel {
  Vector pi;
  Matrix trans;            // banded row-stochastic, per base interval
  Matrix emission_means;   // n_states x I
  CovarianceKind cov_kind = CovarianceKind::SharedFull;
  Matrix shared_cov;       // I x I
  Matrix state_variances;  // n_states x I
  Scalar base_interval_months = 12.0;
  int band_width = 2;
  bool monotone = false;

  struct Diagnostics {
    std::vector<Scalar> log_likelihood_trace;
    int iterations = 0;
    bool converged = false;
    std::vector<std::string> notes;
  } diagnostics;

  Index n_states() const { return pi.size(); }
  Index n_features() const { return emission_means.cols(); }
};

struct CthmmConfig {
  int n_states = 0;  // 0 means I + 1
  CovarianceKind cov_kind = CovarianceKind::SharedFull;
  Scalar conv_tol = 1e-2;  // stop when successive log likelihoods differ less
  int max_iter = 200;
  int kmeans_max_iter = 100;
  int kmeans_reseeds = 10;
  std::uint64_t seed = 0;
  Scalar base_interval_months = 12.0;
  int band_width = 2;
  int threads = 1;
};

// Marginal Gaussian log density over the observed dimensions of each visit,
// one row per visit, one column per state. Completely missing visits score 0
// for every state.
Matrix cthmm_log_emission_matrix(const Individual& individual, const CthmmModel& model);

// k-means initialised Baum-Welch with exact missing-data updates; states are
// ordered along the control-to-patient severity axis before EM starts.
CthmmModel fit_cthmm(const Cohort& cohort, int n_states, const CthmmConfig& config = {});

staging::StagePath stage_cthmm(const Individual& individual, const CthmmModel& model);

Scalar cthmm_log_likelihood(const Cohort& cohort, const CthmmModel& model, int threads = 1);

}  // namespace ebhmm::baseline

#endif
