#include "ebhmm/markov.hpp"

#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace ebhmm::markov {

namespace {

// Clip tiny excursions outside [0,1] and renormalise; large excursions mean
// the interval scaling failed.
Matrix clip_to_stochastic(Matrix m, const std::string& what) {
  if (!m.allFinite()) throw EmbeddingError(what + ": result has non-finite entries");
  if (m.minCoeff() < -1e-9 || m.maxCoeff() > 1.0 + 1e-9) {
    throw EmbeddingError(what + ": result leaves [0,1] by more than 1e-9");
  }
  m = m.cwiseMax(0.0).cwiseMin(1.0);
  for (Index a = 0; a < m.rows(); ++a) {
    const Scalar s = m.row(a).sum();
    if (std::abs(s - 1.0) > 1e-8) {
      throw EmbeddingError(what + ": row " + std::to_string(a) + " sums to " + std::to_string(s));
    }
    m.row(a) /= s;
  }
  return m;
}

}  // namespace

void validate_transition_model(const TransitionModel& model, int band_width, bool monotone) {
  const Index n = model.pi.size();
  if (n < 2) throw ValidationError("transition model needs at least 2 stages");
  if (model.trans.rows() != n || model.trans.cols() != n) {
    throw ValidationError("transition matrix shape does not match pi");
  }
  if (model.base_interval_months <= 0.0) {
    throw ValidationError("base_interval_months must be positive");
  }
  if (model.pi.minCoeff() < 0.0 || std::abs(model.pi.sum() - 1.0) > 1e-9) {
    throw ValidationError("pi is not a probability vector");
  }
  if (!is_row_stochastic(model.trans)) {
    throw ValidationError("transition matrix is not row-stochastic");
  }
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      if (monotone && b < a && model.trans(a, b) != 0.0) {
        throw ValidationError("monotone transition matrix has mass below the diagonal at (" +
                              std::to_string(a) + "," + std::to_string(b) + ")");
      }
      if (band_width >= 1 && b > a + band_width && model.trans(a, b) != 0.0) {
        throw ValidationError("transition matrix has mass outside the band at (" +
                              std::to_string(a) + "," + std::to_string(b) + ")");
      }
    }
  }
}

Matrix matrix_power(const Matrix& a, long n) {
  if (n < 0) throw ArgumentError("matrix_power: negative exponent");
  Matrix result = Matrix::Identity(a.rows(), a.cols());
  Matrix base = a;
  while (n > 0) {
    if (n & 1) result = result * base;
    base = base * base;
    n >>= 1;
  }
  return result;
}

Matrix transition_over_interval(const TransitionModel& model, Scalar delta_months) {
  if (delta_months <= 0.0) throw ArgumentError("transition_over_interval: delta must be positive");
  const Scalar exponent = delta_months / model.base_interval_months;
  const Scalar rounded = std::round(exponent);
  if (std::abs(exponent - rounded) < 1e-9 && rounded >= 1.0) {
    if (rounded == 1.0) return model.trans;
    return clip_to_stochastic(matrix_power(model.trans, static_cast<long>(rounded)),
                              "integer matrix power");
  }

  // Fractional exponent: go through the continuous-time generator.
  const Matrix log_trans = model.trans.log();
  if (!log_trans.allFinite()) {
    throw EmbeddingError("transition matrix has no real logarithm; cannot scale to " +
                         std::to_string(delta_months) + " months");
  }
  const Matrix scaled = (log_trans * exponent).exp();
  return clip_to_stochastic(scaled, "fractional matrix power");
}

Vector sojourn_times(const TransitionModel& model) {
  const Index n = model.n_stages();
  Vector out(n);
  for (Index k = 0; k < n; ++k) {
    const Scalar q = model.trans(k, k);
    out[k] = q >= 1.0 ? std::numeric_limits<Scalar>::infinity()
                      : model.base_interval_months / (1.0 - q);
  }
  return out;
}

Timeline event_timeline(const TransitionModel& model, const EventSequence& sequence) {
  const Index n_events = sequence.size();
  if (model.n_stages() != n_events + 1) {
    throw ArgumentError("event_timeline: sequence length " + std::to_string(n_events) +
                        " does not match " + std::to_string(model.n_stages()) + " stages");
  }
  Timeline timeline;
  timeline.sojourns = sojourn_times(model);
  for (Index k = 0; k < n_events; ++k) {
    if (!std::isfinite(timeline.sojourns[k])) {
      throw TimelineError("stage " + std::to_string(k) +
                          " is absorbing before the final stage; timeline undefined");
    }
  }
  timeline.event_times = Vector(n_events);
  Scalar acc = 0.0;
  for (Index k = 0; k < n_events; ++k) {
    acc += timeline.sojourns[k];
    timeline.event_times[k] = acc;
  }
  return timeline;
}

}  // namespace ebhmm::markov
