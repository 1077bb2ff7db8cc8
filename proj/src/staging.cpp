#include "ebhmm/staging.hpp"

#include <cmath>
#include <limits>

namespace ebhmm::staging {

namespace {

constexpr Scalar kNegInf = -std::numeric_limits<Scalar>::infinity();

Matrix safe_log(const Matrix& m) {
  return m.array().max(0.0).log().matrix();  // log(0) = -inf
}

}  // namespace

std::pair<std::vector<int>, Scalar> viterbi_path(const Vector& log_pi,
                                                 const std::vector<Matrix>& log_trans,
                                                 const Matrix& log_emissions) {
  const Index t_count = log_emissions.rows();
  const Index n = log_emissions.cols();

  Matrix delta(t_count, n);
  Eigen::MatrixXi back(t_count, n);
  delta.row(0) = (log_pi + log_emissions.row(0).transpose()).transpose();
  for (Index t = 1; t < t_count; ++t) {
    const Matrix& lt = log_trans[static_cast<std::size_t>(t - 1)];
    for (Index b = 0; b < n; ++b) {
      Scalar best = kNegInf;
      Index best_a = 0;
      for (Index a = 0; a < n; ++a) {
        const Scalar v = delta(t - 1, a) + lt(a, b);
        if (v > best) {  // ties keep the lower predecessor
          best = v;
          best_a = a;
        }
      }
      delta(t, b) = best + log_emissions(t, b);
      back(t, b) = static_cast<int>(best_a);
    }
  }

  Index last = 0;
  Scalar best = kNegInf;
  for (Index s = 0; s < n; ++s) {
    if (delta(t_count - 1, s) > best) {
      best = delta(t_count - 1, s);
      last = s;
    }
  }
  if (!std::isfinite(best)) {
    throw NumericalError("viterbi: no path has positive probability");
  }

  std::vector<int> path(static_cast<std::size_t>(t_count));
  path.back() = static_cast<int>(last);
  for (Index t = t_count - 1; t > 0; --t) {
    last = back(t, last);
    path[static_cast<std::size_t>(t - 1)] = static_cast<int>(last);
  }
  return {std::move(path), best};
}

StagePath viterbi_stage(const Individual& individual, const inference::FittedModel& model) {
  const Matrix log_emis =
      mixture::log_emission_matrix(individual, model.sequence, model.mixtures);
  const std::vector<Scalar> gaps = inference::visit_gaps(individual);

  std::vector<Matrix> log_trans;
  log_trans.reserve(gaps.size());
  for (Scalar gap : gaps) {
    log_trans.push_back(safe_log(markov::transition_over_interval(model.transition, gap)));
  }

  auto [path, log_prob] =
      viterbi_path(safe_log(model.transition.pi), log_trans, log_emis);

  StagePath out;
  out.stages = std::move(path);
  out.log_prob = log_prob;
  out.posterior_by_visit =
      inference::forward_backward(log_emis, gaps, model.transition).gamma;
  return out;
}

StagePrediction predict_next_stage(const Individual& individual,
                                   const inference::FittedModel& model,
                                   Scalar horizon_months) {
  if (horizon_months <= 0.0) throw ArgumentError("predict_next_stage: horizon must be positive");

  const Matrix log_emis =
      mixture::log_emission_matrix(individual, model.sequence, model.mixtures);
  const std::vector<Scalar> gaps = inference::visit_gaps(individual);
  const inference::PosteriorTables tables =
      inference::forward_backward(log_emis, gaps, model.transition);

  const Vector last_posterior = tables.gamma.row(tables.gamma.rows() - 1).transpose();
  const Matrix horizon_trans = markov::transition_over_interval(model.transition, horizon_months);

  StagePrediction out;
  out.distribution = (last_posterior.transpose() * horizon_trans).transpose();
  out.distribution /= out.distribution.sum();
  out.stage = 0;
  Scalar best = -1.0;
  for (Index s = 0; s < out.distribution.size(); ++s) {
    if (out.distribution[s] > best) {  // ties keep the lower stage
      best = out.distribution[s];
      out.stage = static_cast<int>(s);
    }
  }
  return out;
}

}  // namespace ebhmm::staging
