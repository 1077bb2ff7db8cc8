#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "ebhmm/random.hpp"
#include "ebhmm/staging.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace ebhmm;
using markov::TransitionModel;

namespace {

Matrix log_of(const Matrix& m) { return m.array().max(0.0).log().matrix(); }

Individual one_visit(const Vector& values) {
  Individual ind;
  ind.id = "s";
  Observation obs;
  obs.values = values;
  obs.missing = ArrayXb::Constant(values.size(), false);
  obs.visit_time = 0.0;
  ind.observations.push_back(obs);
  ind.diagnoses.push_back(Diagnosis::NA);
  return ind;
}

Individual missing_visits(Index n_features, Index n_visits, Scalar gap = 12.0) {
  Individual ind;
  ind.id = "s";
  for (Index t = 0; t < n_visits; ++t) {
    Observation obs;
    obs.values = Vector::Constant(n_features, std::numeric_limits<Scalar>::quiet_NaN());
    obs.missing = ArrayXb::Constant(n_features, true);
    obs.visit_time = static_cast<Scalar>(t) * gap;
    ind.observations.push_back(obs);
    ind.diagnoses.push_back(Diagnosis::NA);
  }
  return ind;
}

}  // namespace

TEST_CASE("viterbi_path matches the exhaustive argmax") {
  auto g = rng::derived_engine(301, 0);
  int path_compared = 0;
  for (int iter = 0; iter < 250; ++iter) {
    const Index s_count = 2 + static_cast<Index>(rng::uniform_index(g, 3));
    const Index t_count = 2 + static_cast<Index>(rng::uniform_index(g, 4));
    const bool monotone = rng::uniform(g) < 0.5;
    const Matrix trans = monotone ? gen::monotone_banded_matrix(g, s_count, 2)
                                  : gen::stochastic_matrix(g, s_count);
    const Vector pi = gen::prob_vector(g, s_count);
    const Matrix log_emis = gen::log_emissions(g, t_count, s_count);
    const std::vector<Matrix> log_trans(static_cast<std::size_t>(t_count) - 1, log_of(trans));

    const auto [path, log_prob] = staging::viterbi_path(log_of(pi).col(0), log_trans, log_emis);
    const auto best =
        oracle::enumerate_best_path(pi, std::vector<Matrix>(log_trans.size(), trans), log_emis);

    INFO("iter=", iter, " states=", s_count, " visits=", t_count);
    CHECK(std::abs(log_prob - best.log_prob) <= 1e-9 * std::max(1.0, std::abs(best.log_prob)));
    if (best.log_prob - best.runner_up > 1e-7) {
      ++path_compared;
      CHECK(path == best.stages);
    }

    if (monotone) {
      for (std::size_t t = 1; t < path.size(); ++t) CHECK(path[t] >= path[t - 1]);
    }

    // No explicitly evaluated path may beat the returned one.
    for (int probe = 0; probe < 20; ++probe) {
      std::vector<int> rand_path;
      Scalar lw = 0.0;
      for (Index t = 0; t < t_count; ++t) {
        rand_path.push_back(static_cast<int>(rng::uniform_index(g, static_cast<std::size_t>(s_count))));
        lw += log_emis(t, rand_path.back());
        lw += t == 0 ? std::log(pi[rand_path[0]])
                     : log_of(trans)(rand_path[static_cast<std::size_t>(t) - 1], rand_path.back());
      }
      CHECK(log_prob >= lw - 1e-9);
    }
  }
  CHECK(path_compared >= 200);
}

TEST_CASE("viterbi_stage reads strongly patient-like single visits as the last stage") {
  auto g = rng::derived_engine(302, 0);
  const int n_features = 4;
  const auto mixtures = gen::random_mixtures(g, n_features);
  const auto model = gen::fitted_model(
      EventSequence::identity(n_features), gen::monotone_model(g, n_features + 1, 2), mixtures);

  Vector patient_values(n_features);
  for (int i = 0; i < n_features; ++i) {
    patient_values[i] = mixtures[static_cast<std::size_t>(i)].patient.mu;
  }
  const auto path = staging::viterbi_stage(one_visit(patient_values), model);
  REQUIRE(path.stages.size() == 1);
  CHECK(path.stages[0] == n_features);
  CHECK(std::abs(path.posterior_by_visit.row(0).sum() - 1.0) <= 1e-9);
}

TEST_CASE("missing observations fall back to the prior and tie toward stage zero") {
  auto g = rng::derived_engine(303, 0);
  const int n_features = 3;
  const auto mixtures = gen::random_mixtures(g, n_features);

  SUBCASE("concentrated prior pins the whole path at zero") {
    TransitionModel trans_model;
    trans_model.pi = Vector{{0.97, 0.01, 0.01, 0.01}};
    trans_model.trans = Matrix::Identity(4, 4) * 0.98;
    for (Index a = 0; a + 1 < 4; ++a) trans_model.trans(a, a + 1) = 0.02;
    trans_model.trans(3, 3) = 1.0;
    trans_model.base_interval_months = 12.0;
    const auto model = gen::fitted_model(EventSequence::identity(n_features), trans_model, mixtures);

    const auto path = staging::viterbi_stage(missing_visits(n_features, 3), model);
    CHECK(path.stages == std::vector<int>{0, 0, 0});
  }

  SUBCASE("uniform everything ties toward the lowest stage") {
    TransitionModel trans_model;
    trans_model.pi = Vector::Constant(4, 0.25);
    trans_model.trans = Matrix::Identity(4, 4);
    trans_model.base_interval_months = 12.0;
    const auto model = gen::fitted_model(EventSequence::identity(n_features), trans_model, mixtures);

    const auto path = staging::viterbi_stage(missing_visits(n_features, 2), model);
    CHECK(path.stages == std::vector<int>{0, 0});
  }
}

TEST_CASE("predict_next_stage pushes the last posterior through the dynamics") {
  auto g = rng::derived_engine(304, 0);
  const int n_features = 2;
  const auto mixtures = gen::random_mixtures(g, n_features);

  TransitionModel trans_model;
  trans_model.pi = Vector{{0.0, 1.0, 0.0}};
  trans_model.trans = Matrix(3, 3);
  trans_model.trans << 0.6, 0.4, 0.0,  //
      0.0, 0.3, 0.7,                   //
      0.0, 0.0, 1.0;
  trans_model.base_interval_months = 12.0;
  const auto model = gen::fitted_model(EventSequence::identity(n_features), trans_model, mixtures);

  // All-missing single visit: the smoothed posterior is exactly pi = (0,1,0).
  const Individual ind = missing_visits(n_features, 1);
  const auto pred = staging::predict_next_stage(ind, model, 12.0);
  CHECK(pred.distribution[0] == 0.0);
  CHECK(pred.distribution[1] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(pred.distribution[2] == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(pred.stage == 2);

  CHECK_THROWS_AS(staging::predict_next_stage(ind, model, 0.0), ArgumentError);
  CHECK_THROWS_AS(staging::predict_next_stage(ind, model, -12.0), ArgumentError);
}

TEST_CASE("identity dynamics predict the current stage") {
  auto g = rng::derived_engine(305, 0);
  const int n_features = 3;
  const auto mixtures = gen::random_mixtures(g, n_features);
  TransitionModel trans_model;
  trans_model.pi = gen::prob_vector(g, 4);
  trans_model.trans = Matrix::Identity(4, 4);
  trans_model.base_interval_months = 12.0;
  const auto model = gen::fitted_model(EventSequence::identity(n_features), trans_model, mixtures);

  for (int iter = 0; iter < 50; ++iter) {
    const Individual ind = gen::individual(g, "s", n_features, 2);
    const auto path = staging::viterbi_stage(ind, model);
    const auto pred = staging::predict_next_stage(ind, model, 12.0);
    INFO("iter=", iter);
    CHECK(pred.stage == path.stages.back());
  }
}

TEST_CASE("monotone dynamics never predict backwards and compose over horizons") {
  auto g = rng::derived_engine(306, 0);
  for (int iter = 0; iter < 210; ++iter) {
    const int n_features = 2 + static_cast<int>(rng::uniform_index(g, 3));
    const auto mixtures = gen::random_mixtures(g, n_features);
    const auto model = gen::fitted_model(gen::random_sequence(g, n_features),
                                         gen::monotone_model(g, n_features + 1, 2), mixtures);
    const Individual ind =
        gen::individual(g, "s", n_features, 1 + static_cast<Index>(rng::uniform_index(g, 3)), 0.2);

    const auto path = staging::viterbi_stage(ind, model);
    const auto pred12 = staging::predict_next_stage(ind, model, 12.0);
    const auto pred24 = staging::predict_next_stage(ind, model, 24.0);
    INFO("iter=", iter);

    CHECK(std::abs(pred12.distribution.sum() - 1.0) <= 1e-9);
    CHECK(pred12.distribution.minCoeff() >= 0.0);

    Index current_max = 0;
    path.posterior_by_visit.row(path.posterior_by_visit.rows() - 1).maxCoeff(&current_max);
    CHECK(pred12.stage >= static_cast<int>(current_max));
    CHECK(pred24.stage >= pred12.stage);

    // Distribution-level composition on integer multiples of the base step.
    const Vector composed =
        (pred12.distribution.transpose() * model.transition.trans).transpose();
    CHECK((composed - pred24.distribution).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("non-embeddable dynamics surface as embedding errors for fractional horizons") {
  auto g = rng::derived_engine(307, 0);
  const int n_features = 2;
  const auto mixtures = gen::random_mixtures(g, n_features);
  TransitionModel trans_model;
  trans_model.pi = Vector::Constant(3, 1.0 / 3.0);
  trans_model.trans = Matrix(3, 3);
  trans_model.trans << 0.0, 1.0, 0.0,  //
      0.0, 0.5, 0.5,                   //
      0.0, 0.0, 1.0;
  trans_model.base_interval_months = 12.0;
  const auto model = gen::fitted_model(EventSequence::identity(n_features), trans_model, mixtures);

  const Individual ind = missing_visits(n_features, 1);
  CHECK_NOTHROW(staging::predict_next_stage(ind, model, 24.0));
  CHECK_THROWS_AS(staging::predict_next_stage(ind, model, 18.0), EmbeddingError);
}
