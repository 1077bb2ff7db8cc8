#include "ebhmm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ebhmm/errors.hpp"

namespace ebhmm::mixture {

namespace {

constexpr Scalar kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))

Scalar sample_mean(const std::vector<Scalar>& xs) {
  Scalar s = 0.0;
  for (Scalar x : xs) s += x;
  return s / static_cast<Scalar>(xs.size());
}

Scalar sample_sd(const std::vector<Scalar>& xs, Scalar mean) {
  if (xs.size() < 2) return 0.0;
  Scalar s = 0.0;
  for (Scalar x : xs) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<Scalar>(xs.size() - 1));
}

struct FeatureValues {
  std::vector<Scalar> patient;
  std::vector<Scalar> control;
  std::vector<Scalar> pooled;  // all non-NA-labelled observed values
  std::set<std::string> patient_ids;
  std::set<std::string> control_ids;
};

FeatureValues collect_values(const Cohort& cohort, Index feature,
                             Diagnosis patient_label, Diagnosis control_label) {
  FeatureValues out;
  for (const auto& ind : cohort.individuals) {
    for (std::size_t t = 0; t < ind.observations.size(); ++t) {
      const Observation& obs = ind.observations[t];
      if (obs.missing[feature]) continue;
      const Scalar x = obs.values[feature];
      const Diagnosis d = ind.diagnoses[t];
      if (d == Diagnosis::NA) continue;
      out.pooled.push_back(x);
      if (d == patient_label) {
        out.patient.push_back(x);
        out.patient_ids.insert(ind.id);
      } else if (d == control_label) {
        out.control.push_back(x);
        out.control_ids.insert(ind.id);
      }
    }
  }
  return out;
}

// Projection onto the ordering constraint: pull both means to their midpoint
// when the patient mean sits on the normal side of the control mean.
void enforce_ordering(Scalar& mu_p, Scalar& mu_c, Direction dir) {
  const bool violated = dir == Direction::Increasing ? mu_p < mu_c : mu_p > mu_c;
  if (violated) {
    const Scalar mid = 0.5 * (mu_p + mu_c);
    mu_p = mu_c = mid;
  }
}

}  // namespace

Scalar log_gaussian(Scalar x, const GaussianParams& p) {
  const Scalar z = (x - p.mu) / p.sigma;
  return -kLogSqrt2Pi - std::log(p.sigma) - 0.5 * z * z;
}

std::vector<MixturePair> fit_mixtures(const Cohort& cohort,
                                      Diagnosis patient_label,
                                      Diagnosis control_label,
                                      const MixtureConfig& config) {
  const Index n = cohort.n_features();
  std::vector<MixturePair> pairs;
  pairs.reserve(static_cast<std::size_t>(n));

  for (Index i = 0; i < n; ++i) {
    const FeatureValues vals =
        collect_values(cohort, i, patient_label, control_label);
    const auto min_size = static_cast<std::size_t>(config.min_group_size);
    if (vals.patient_ids.size() < min_size || vals.control_ids.size() < min_size) {
      throw FitError("feature '" + cohort.feature_names[i] + "': needs at least " +
                     std::to_string(config.min_group_size) + " " + to_string(patient_label) +
                     " and " + to_string(control_label) + " individuals with observed values (got " +
                     std::to_string(vals.patient_ids.size()) + " and " +
                     std::to_string(vals.control_ids.size()) + ")");
    }

    const Direction dir = cohort.feature_directions[static_cast<std::size_t>(i)];
    const Scalar pooled_mean = sample_mean(vals.pooled);
    const Scalar pooled_sd = sample_sd(vals.pooled, pooled_mean);

    const Scalar init_mu_p = sample_mean(vals.patient);
    const Scalar init_mu_c = sample_mean(vals.control);
    Scalar sd_p = sample_sd(vals.patient, init_mu_p);
    Scalar sd_c = sample_sd(vals.control, init_mu_c);
    if (sd_p <= 0.0) sd_p = pooled_sd > 0.0 ? pooled_sd : 1.0;
    if (sd_c <= 0.0) sd_c = pooled_sd > 0.0 ? pooled_sd : 1.0;

    const Scalar floor_p = config.sigma_floor_factor * sd_p;
    const Scalar floor_c = config.sigma_floor_factor * sd_c;
    const Scalar lo_p = init_mu_p - config.mean_drift_limit_sds * sd_p;
    const Scalar hi_p = init_mu_p + config.mean_drift_limit_sds * sd_p;
    const Scalar lo_c = init_mu_c - config.mean_drift_limit_sds * sd_c;
    const Scalar hi_c = init_mu_c + config.mean_drift_limit_sds * sd_c;

    MixturePair pair;
    pair.feature_index = static_cast<int>(i);
    pair.patient = {init_mu_p, sd_p, 0.5};
    pair.control = {init_mu_c, sd_c, 0.5};
    enforce_ordering(pair.patient.mu, pair.control.mu, dir);

    const std::vector<Scalar>& xs = vals.pooled;
    const auto m = static_cast<Scalar>(xs.size());
    Scalar prev_ll = -std::numeric_limits<Scalar>::infinity();
    Scalar best_ll = -std::numeric_limits<Scalar>::infinity();
    MixturePair best = pair;
    bool converged = false;

    for (int iter = 0; iter < config.max_iter; ++iter) {
      // E-step
      Scalar ll = 0.0;
      Scalar sum_rp = 0.0, sum_rp_x = 0.0;
      Scalar sum_rc = 0.0, sum_rc_x = 0.0;
      std::vector<Scalar> resp(xs.size());
      for (std::size_t v = 0; v < xs.size(); ++v) {
        const Scalar lp = std::log(pair.patient.weight) + log_gaussian(xs[v], pair.patient);
        const Scalar lc = std::log(pair.control.weight) + log_gaussian(xs[v], pair.control);
        const Scalar mx = std::max(lp, lc);
        const Scalar denom = std::exp(lp - mx) + std::exp(lc - mx);
        ll += mx + std::log(denom);
        const Scalar rp = std::exp(lp - mx) / denom;
        resp[v] = rp;
        sum_rp += rp;
        sum_rp_x += rp * xs[v];
        sum_rc += 1.0 - rp;
        sum_rc_x += (1.0 - rp) * xs[v];
      }
      if (ll > best_ll) {
        best_ll = ll;
        best = pair;
      }
      if (std::abs(ll - prev_ll) < config.tol) {
        converged = true;
        break;
      }
      prev_ll = ll;

      // M-step with drift clamp, sigma floor and ordering projection
      if (sum_rp > 1e-12) {
        pair.patient.mu = std::clamp(sum_rp_x / sum_rp, lo_p, hi_p);
      }
      if (sum_rc > 1e-12) {
        pair.control.mu = std::clamp(sum_rc_x / sum_rc, lo_c, hi_c);
      }
      enforce_ordering(pair.patient.mu, pair.control.mu, dir);
      Scalar ss_p = 0.0, ss_c = 0.0;
      for (std::size_t v = 0; v < xs.size(); ++v) {
        const Scalar dp = xs[v] - pair.patient.mu;
        const Scalar dc = xs[v] - pair.control.mu;
        ss_p += resp[v] * dp * dp;
        ss_c += (1.0 - resp[v]) * dc * dc;
      }
      if (sum_rp > 1e-12) pair.patient.sigma = std::max(std::sqrt(ss_p / sum_rp), floor_p);
      if (sum_rc > 1e-12) pair.control.sigma = std::max(std::sqrt(ss_c / sum_rc), floor_c);
      const Scalar wp = std::clamp(sum_rp / m, 1e-12, 1.0 - 1e-12);
      pair.patient.weight = wp;
      pair.control.weight = 1.0 - wp;
    }

    best.em_converged = converged;
    pairs.push_back(best);
  }
  return pairs;
}

std::pair<Scalar, Scalar> event_likelihood_pair(Scalar x, bool is_missing,
                                                const MixturePair& pair) {
  if (is_missing) return {1.0, 1.0};
  if (!std::isfinite(x)) throw ArgumentError("event_likelihood_pair: observed value is not finite");
  return {std::exp(log_gaussian(x, pair.patient)), std::exp(log_gaussian(x, pair.control))};
}

Scalar stage_log_emission(const Observation& obs, int stage,
                          const EventSequence& sequence,
                          const std::vector<MixturePair>& pairs) {
  const int n = sequence.size();
  if (stage < 0 || stage > n) {
    throw ArgumentError("stage " + std::to_string(stage) + " out of range [0, " +
                        std::to_string(n) + "]");
  }
  Scalar log_e = 0.0;
  for (int i = 0; i < n; ++i) {
    if (obs.missing[i]) continue;
    const MixturePair& pair = pairs[static_cast<std::size_t>(i)];
    const bool event_happened = sequence.position_of(i) < stage;
    log_e += log_gaussian(obs.values[i], event_happened ? pair.patient : pair.control);
  }
  return log_e;
}

Scalar stage_emission(const Observation& obs, int stage,
                      const EventSequence& sequence,
                      const std::vector<MixturePair>& pairs) {
  return std::exp(stage_log_emission(obs, stage, sequence, pairs));
}

Matrix log_emission_matrix(const Individual& individual,
                           const EventSequence& sequence,
                           const std::vector<MixturePair>& pairs) {
  const int n = sequence.size();
  Matrix out(individual.n_visits(), n + 1);
  for (Index t = 0; t < individual.n_visits(); ++t) {
    for (int k = 0; k <= n; ++k) {
      out(t, k) = stage_log_emission(individual.observations[static_cast<std::size_t>(t)], k,
                                     sequence, pairs);
    }
  }
  return out;
}

}  // namespace ebhmm::mixture
