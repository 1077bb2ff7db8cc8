#ifndef EBHMM_TESTS_SUPPORT_GENERATORS_HPP
#define EBHMM_TESTS_SUPPORT_GENERATORS_HPP

// Randomised inputs for property tests. All draws go through ebhmm::rng so
// case sets are identical across platforms and runs.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "ebhmm/cohort.hpp"
#include "ebhmm/inference.hpp"
#include "ebhmm/markov.hpp"
#include "ebhmm/mixture.hpp"
#include "ebhmm/random.hpp"
#include "ebhmm/sequence.hpp"
#include "ebhmm/types.hpp"

namespace gen {

using ebhmm::Index;
using ebhmm::Matrix;
using ebhmm::Scalar;
using ebhmm::Vector;
using ebhmm::rng::Engine;

inline double uniform_in(Engine& g, double lo, double hi) {
  return lo + (hi - lo) * ebhmm::rng::uniform(g);
}

inline Vector prob_vector(Engine& g, Index n) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = uniform_in(g, 0.05, 1.0);
  return v / v.sum();
}

inline Matrix stochastic_matrix(Engine& g, Index n) {
  Matrix m(n, n);
  for (Index a = 0; a < n; ++a) m.row(a) = prob_vector(g, n).transpose();
  return m;
}

// Upper-triangular banded rows with a dominant diagonal, last row absorbing.
inline Matrix monotone_banded_matrix(Engine& g, Index n, int band) {
  Matrix m = Matrix::Zero(n, n);
  for (Index a = 0; a < n; ++a) {
    const Index last = std::min(n - 1, a + band);
    m(a, a) = uniform_in(g, 0.5, 0.95);
    Scalar rest = 1.0 - m(a, a);
    if (last == a) {
      m(a, a) = 1.0;
      continue;
    }
    Vector w = prob_vector(g, last - a);
    for (Index b = a + 1; b <= last; ++b) m(a, b) = rest * w[b - a - 1];
  }
  return m;
}

inline ebhmm::markov::TransitionModel monotone_model(Engine& g, Index n_stages, int band,
                                                     Scalar base_interval = 12.0) {
  return {prob_vector(g, n_stages), monotone_banded_matrix(g, n_stages, band), base_interval};
}

inline Matrix log_emissions(Engine& g, Index t_count, Index s_count, double lo = -6.0,
                            double hi = 0.0) {
  Matrix m(t_count, s_count);
  for (Index t = 0; t < t_count; ++t) {
    for (Index s = 0; s < s_count; ++s) m(t, s) = uniform_in(g, lo, hi);
  }
  return m;
}

inline ebhmm::EventSequence random_sequence(Engine& g, int n_features) {
  std::vector<int> order(static_cast<std::size_t>(n_features));
  for (int i = 0; i < n_features; ++i) order[static_cast<std::size_t>(i)] = i;
  ebhmm::rng::shuffle(order, g);
  return ebhmm::EventSequence(std::move(order));
}

// Control near zero, patient displaced by a few control sd.
inline std::vector<ebhmm::mixture::MixturePair> random_mixtures(Engine& g, int n_features) {
  std::vector<ebhmm::mixture::MixturePair> out;
  for (int i = 0; i < n_features; ++i) {
    ebhmm::mixture::MixturePair pair;
    pair.feature_index = i;
    pair.control.mu = uniform_in(g, -0.5, 0.5);
    pair.control.sigma = uniform_in(g, 0.6, 1.4);
    pair.control.weight = uniform_in(g, 0.3, 0.7);
    pair.patient.mu = pair.control.mu + uniform_in(g, 2.0, 4.0) * pair.control.sigma;
    pair.patient.sigma = uniform_in(g, 0.6, 1.6);
    pair.patient.weight = 1.0 - pair.control.weight;
    out.push_back(pair);
  }
  return out;
}

inline ebhmm::Observation observation(Engine& g, Index n_features, Scalar visit_time,
                                      double missing_rate = 0.0) {
  ebhmm::Observation obs;
  obs.values = Vector(n_features);
  obs.missing = ebhmm::ArrayXb::Constant(n_features, false);
  obs.visit_time = visit_time;
  for (Index i = 0; i < n_features; ++i) {
    if (ebhmm::rng::uniform(g) < missing_rate) {
      obs.missing[i] = true;
      obs.values[i] = std::numeric_limits<Scalar>::quiet_NaN();
    } else {
      obs.values[i] = ebhmm::rng::normal(g, 0.0, 2.0);
    }
  }
  return obs;
}

inline ebhmm::Individual individual(Engine& g, const std::string& id, Index n_features,
                                    Index n_visits, double missing_rate = 0.0,
                                    Scalar gap = 12.0) {
  ebhmm::Individual ind;
  ind.id = id;
  for (Index t = 0; t < n_visits; ++t) {
    ind.observations.push_back(observation(g, n_features, static_cast<Scalar>(t) * gap, missing_rate));
    ind.diagnoses.push_back(ebhmm::Diagnosis::NA);
  }
  return ind;
}

inline ebhmm::Cohort cohort(Engine& g, Index n_individuals, Index n_features, Index n_visits,
                            double missing_rate = 0.0) {
  ebhmm::Cohort c;
  for (Index i = 0; i < n_features; ++i) {
    c.feature_names.push_back("f" + std::to_string(i));
    c.feature_directions.push_back(ebhmm::Direction::Increasing);
  }
  for (Index j = 0; j < n_individuals; ++j) {
    c.individuals.push_back(individual(g, "s" + std::to_string(j), n_features, n_visits, missing_rate));
  }
  return c;
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("ebhmm_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline ebhmm::inference::FittedModel fitted_model(const ebhmm::EventSequence& sequence,
                                                  const ebhmm::markov::TransitionModel& transition,
                                                  std::vector<ebhmm::mixture::MixturePair> mixtures) {
  ebhmm::inference::FittedModel model;
  model.sequence = sequence;
  model.transition = transition;
  model.mixtures = std::move(mixtures);
  return model;
}

}  // namespace gen

#endif
