#ifndef EBHMM_CONFIG_HPP
#define EBHMM_CONFIG_HPP

#include <cstdint>
#include <string>

#include "ebhmm/baseline.hpp"
#include "ebhmm/eval.hpp"
#include "ebhmm/inference.hpp"
#include "ebhmm/mixture.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm::config {

// Every knob shared across commands, loadable from a key=value file with
// flag overrides on top. Keys match field names exactly.
struct RunConfig {
  Scalar base_interval_months = 12.0;
  int band_width = 2;
  int max_outer_iter = 100;
  int random_restarts = 1;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = all available cores

  int mixture_max_iter = 200;
  Scalar mixture_tol = 1e-6;
  Scalar mixture_mean_drift_sds = 1.0;
  int mixture_min_group_size = 5;

  int cthmm_states = 0;  // 0 = one more than the feature count
  std::string cthmm_covariance = "shared_full";
  Scalar cthmm_tol = 1e-2;
  int cthmm_max_iter = 200;

  Scalar horizon_months = 24.0;
  int k_folds = 5;
  std::string data_mode = "full";
  bool stratify_folds = false;
  std::string patient_label = "AD";
  std::string control_label = "CN";
};

// Set one field by key. Unknown keys raise a schema error; malformed values a
// format error. `locus` names the source for error messages.
void apply_key_value(RunConfig& rc, const std::string& key, const std::string& value,
                     const std::string& locus);

// key=value lines, '#' comments, blank lines ignored.
void apply_config_file(RunConfig& rc, const std::string& path);

// Range checks across all fields.
void validate(const RunConfig& rc);

// Fixed-order key=value serialization; two configs hash equal iff every
// field matches bit-for-bit.
std::string canonical_string(const RunConfig& rc);
std::uint64_t hash(const RunConfig& rc);

inference::FitConfig fit_config(const RunConfig& rc);
mixture::MixtureConfig mixture_config(const RunConfig& rc);
baseline::CthmmConfig cthmm_config(const RunConfig& rc);
eval::EvalConfig eval_config(const RunConfig& rc);

}  // namespace ebhmm::config

#endif
