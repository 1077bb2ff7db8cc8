#ifndef EBHMM_MARKOV_HPP
#define EBHMM_MARKOV_HPP

#include <limits>
#include <vector>

#include "ebhmm/errors.hpp"
#include "ebhmm/sequence.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm::markov {

// Stage-transition dynamics over N+1 stages. `trans` holds per-base-interval
// transition probabilities, row-stochastic; monotone models are upper
// triangular (no reversion to earlier stages).
struct TransitionModel {
  Vector pi;
  Matrix trans;
  Scalar base_interval_months = 12.0;

  Index n_stages() const { return pi.size(); }
};

struct Timeline {
  Vector sojourns;     // months per stage; +inf for the absorbing final stage
  Vector event_times;  // cumulative months at which each event occurs
};

// Zero entries outside the allowed band and renormalise rows. Monotone keeps
// b in [a, a+band_width]; otherwise the band is symmetric. Rows with no
// surviving mass become pure self-transitions.
template <class Derived>
Matrix apply_structure_prior(const Eigen::MatrixBase<Derived>& raw, int band_width,
                             bool monotone) {
  if (band_width < 1) throw ArgumentError("band_width must be >= 1");
  const Index n = raw.rows();
  Matrix out = raw;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) {
      const Index lo = monotone ? a : a - band_width;
      if (b < lo || b > a + band_width) out(a, b) = 0.0;
    }
    const Scalar row_sum = out.row(a).sum();
    if (row_sum > 0.0) {
      out.row(a) /= row_sum;
    } else {
      out.row(a).setZero();
      out(a, a) = 1.0;
    }
  }
  return out;
}

template <class Derived>
bool is_row_stochastic(const Eigen::MatrixBase<Derived>& m, Scalar tol = 1e-9) {
  if (m.minCoeff() < -tol) return false;
  return (m.rowwise().sum().array() - 1.0).abs().maxCoeff() <= tol;
}

void validate_transition_model(const TransitionModel& model, int band_width = -1,
                               bool monotone = true);

// A^n by binary exponentiation.
Matrix matrix_power(const Matrix& a, long n);

// Transition matrix over an arbitrary interval: an integer number of base
// intervals uses matrix powers; a fractional one goes through the generator
// log(trans)/base, which fails with EmbeddingError when trans has no real
// logarithm.
Matrix transition_over_interval(const TransitionModel& model, Scalar delta_months);

// Expected dwell per stage: base_interval / (1 - q_kk); +inf when q_kk = 1.
Vector sojourn_times(const TransitionModel& model);

// Cumulative expected event times; event n occurs after the dwell in stages
// 0..n-1. The final stage's (infinite) sojourn is excluded.
Timeline event_timeline(const TransitionModel& model, const EventSequence& sequence);

}  // namespace ebhmm::markov

#endif
