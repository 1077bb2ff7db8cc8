#include <doctest.h>

#include <cmath>
#include <vector>

#include "ebhmm/cohort.hpp"
#include "ebhmm/markov.hpp"
#include "ebhmm/random.hpp"
#include "ebhmm/synth.hpp"

using namespace ebhmm;

namespace {

// Truth whose chain never moves: everyone sits at `stage` forever.
synth::GroundTruth frozen_truth(int n_features, int stage, double separation = 3.0) {
  synth::GroundTruth truth = synth::default_truth(n_features, separation);
  const Index n_stages = truth.transition.n_stages();
  truth.transition.pi = Vector::Zero(n_stages);
  truth.transition.pi[stage] = 1.0;
  truth.transition.trans = Matrix::Identity(n_stages, n_stages);
  return truth;
}

std::vector<Scalar> regular_schedule(int n_visits, Scalar gap = 12.0) {
  std::vector<Scalar> schedule;
  for (int t = 0; t < n_visits; ++t) schedule.push_back(gap * t);
  return schedule;
}

int count_missing_cells(const Cohort& c) {
  int n = 0;
  for (const auto& ind : c.individuals) {
    for (const auto& obs : ind.observations) n += static_cast<int>(obs.missing.count());
  }
  return n;
}

}  // namespace

TEST_CASE("default_truth builds the documented generating process") {
  const synth::GroundTruth truth = synth::default_truth(4, 2.5, 6.0);
  REQUIRE(truth.sequence.size() == 4);
  REQUIRE(truth.transition.n_stages() == 5);
  CHECK(truth.transition.base_interval_months == 6.0);

  for (int i = 0; i < 4; ++i) CHECK(truth.sequence.feature_at(i) == i);

  for (Index s = 0; s < 5; ++s) CHECK(truth.transition.pi[s] == 0.2);

  const Matrix& q = truth.transition.trans;
  for (Index s = 0; s + 2 < 5; ++s) {
    CHECK(q(s, s) == 0.5);
    CHECK(q(s, s + 1) == 0.35);
    CHECK(q(s, s + 2) == 0.15);
  }
  CHECK(q(3, 3) == 0.5);
  CHECK(q(3, 4) == 0.5);
  CHECK(q(4, 4) == 1.0);
  CHECK(q.sum() == doctest::Approx(5.0));

  for (int i = 0; i < 4; ++i) {
    const auto& pair = truth.mixtures[static_cast<std::size_t>(i)];
    CHECK(pair.feature_index == i);
    CHECK(pair.control.mu == 0.0);
    CHECK(pair.control.sigma == 1.0);
    CHECK(pair.patient.mu == 2.5);
    CHECK(pair.patient.sigma == 1.0);
  }

  CHECK(truth.label_rule.cn_max_stage == 0);
  CHECK(truth.label_rule.mci_max_stage == 3);
  CHECK(truth.feature_names ==
        std::vector<std::string>{"F1", "F2", "F3", "F4"});
  for (Direction d : truth.feature_directions) CHECK(d == Direction::Increasing);

  CHECK_THROWS_AS(synth::default_truth(1), ArgumentError);
}

TEST_CASE("label rule maps stage ranges to diagnoses") {
  SUBCASE("defaults") {
    const synth::LabelRule rule;
    CHECK(rule.cn_max_stage == 2);
    CHECK(rule.mci_max_stage == 8);
    CHECK(rule.label_for(0) == Diagnosis::CN);
    CHECK(rule.label_for(2) == Diagnosis::CN);
    CHECK(rule.label_for(3) == Diagnosis::MCI);
    CHECK(rule.label_for(8) == Diagnosis::MCI);
    CHECK(rule.label_for(9) == Diagnosis::AD);
    CHECK(rule.label_for(12) == Diagnosis::AD);
  }
  SUBCASE("custom boundaries") {
    const synth::LabelRule rule{1, 2};
    CHECK(rule.label_for(1) == Diagnosis::CN);
    CHECK(rule.label_for(2) == Diagnosis::MCI);
    CHECK(rule.label_for(3) == Diagnosis::AD);
  }
}

TEST_CASE("validate_truth rejects each inconsistency") {
  const synth::GroundTruth good = synth::default_truth(3);
  CHECK_NOTHROW(synth::validate_truth(good));

  SUBCASE("stage count must be events + 1") {
    synth::GroundTruth t = good;
    t.transition.pi = Vector::Constant(3, 1.0 / 3.0);
    t.transition.trans = Matrix::Identity(3, 3);
    CHECK_THROWS_AS(synth::validate_truth(t), ValidationError);
  }
  SUBCASE("one mixture pair per event") {
    synth::GroundTruth t = good;
    t.mixtures.pop_back();
    CHECK_THROWS_AS(synth::validate_truth(t), ValidationError);
  }
  SUBCASE("feature names sized to events") {
    synth::GroundTruth t = good;
    t.feature_names.pop_back();
    CHECK_THROWS_AS(synth::validate_truth(t), ValidationError);
  }
  SUBCASE("feature directions sized to events") {
    synth::GroundTruth t = good;
    t.feature_directions.push_back(Direction::Decreasing);
    CHECK_THROWS_AS(synth::validate_truth(t), ValidationError);
  }
  SUBCASE("label rule ranges ordered") {
    synth::GroundTruth t = good;
    t.label_rule = {2, 1};
    CHECK_THROWS_AS(synth::validate_truth(t), ValidationError);
    t.label_rule = {-1, 2};
    CHECK_THROWS_AS(synth::validate_truth(t), ValidationError);
  }
  SUBCASE("dynamics must be monotone and stochastic") {
    synth::GroundTruth t = good;
    t.transition.trans(2, 1) = t.transition.trans(2, 2);
    t.transition.trans(2, 2) = 0.0;
    CHECK_THROWS_AS(synth::validate_truth(t), ValidationError);

    synth::GroundTruth u = good;
    u.transition.pi[0] += 0.5;
    CHECK_THROWS_AS(synth::validate_truth(u), ValidationError);
  }
}

TEST_CASE("sample_cohort rejects bad schedules and missing fractions") {
  const synth::GroundTruth truth = synth::default_truth(2);
  CHECK_THROWS_AS(synth::sample_cohort(truth, 3, {}, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(synth::sample_cohort(truth, 3, {0.0, 12.0, 12.0}, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(synth::sample_cohort(truth, 3, {0.0, 12.0, 6.0}, 0.0, 1), ArgumentError);
  CHECK_THROWS_AS(synth::sample_cohort(truth, 3, {0.0, 12.0}, -0.01, 1), ArgumentError);
  CHECK_THROWS_AS(synth::sample_cohort(truth, 3, {0.0, 12.0}, 1.0, 1), ArgumentError);
  CHECK_NOTHROW(synth::sample_cohort(truth, 3, {0.0, 12.0}, 0.0, 1));
}

TEST_CASE("a frozen chain yields pure-component observations") {
  // Everyone pinned at stage 0: all labels CN, all values from the controls.
  const synth::GroundTruth truth = frozen_truth(3, 0);
  const auto drawn =
      synth::sample_cohort_with_stages(truth, 10000, {0.0}, 0.0, 404);

  Vector sum = Vector::Zero(3);
  Vector sum_sq = Vector::Zero(3);
  for (Index j = 0; j < drawn.cohort.n_individuals(); ++j) {
    const auto& ind = drawn.cohort.individuals[static_cast<std::size_t>(j)];
    REQUIRE(drawn.true_stages[static_cast<std::size_t>(j)] == std::vector<int>{0});
    REQUIRE(ind.diagnoses.front() == Diagnosis::CN);
    sum += ind.observations.front().values;
    sum_sq += ind.observations.front().values.array().square().matrix();
  }
  const Vector mean = sum / 10000.0;
  for (Index i = 0; i < 3; ++i) {
    const Scalar sd = std::sqrt(sum_sq[i] / 10000.0 - mean[i] * mean[i]);
    CHECK(std::abs(mean[i]) < 0.05);
    CHECK(std::abs(sd - 1.0) < 0.05);
  }
}

TEST_CASE("a frozen mid-trajectory stage mixes patient and control components") {
  // Stage 2 of 3 events: the first two features read from the patient
  // component, the last still from controls.
  const synth::GroundTruth truth = frozen_truth(3, 2);
  const Cohort cohort = synth::sample_cohort(truth, 10000, {0.0}, 0.0, 405);

  Vector sum = Vector::Zero(3);
  for (const auto& ind : cohort.individuals) {
    CHECK(ind.diagnoses.front() == Diagnosis::MCI);
    sum += ind.observations.front().values;
  }
  const Vector mean = sum / 10000.0;
  CHECK(std::abs(mean[0] - 3.0) < 0.05);
  CHECK(std::abs(mean[1] - 3.0) < 0.05);
  CHECK(std::abs(mean[2]) < 0.05);
}

TEST_CASE("sampled stage paths are monotone and labelled consistently") {
  const synth::GroundTruth truth = synth::default_truth(4);
  const std::vector<Scalar> schedule{0.0, 12.0, 24.0, 48.0, 60.0, 84.0};
  const auto drawn = synth::sample_cohort_with_stages(truth, 250, schedule, 0.1, 77);

  REQUIRE(drawn.cohort.n_individuals() == 250);
  REQUIRE(drawn.true_stages.size() == 250);
  for (std::size_t j = 0; j < 250; ++j) {
    const auto& stages = drawn.true_stages[j];
    const auto& ind = drawn.cohort.individuals[j];
    REQUIRE(stages.size() == schedule.size());
    CHECK(ind.id == "S" + std::to_string(j + 1));
    for (std::size_t t = 0; t < stages.size(); ++t) {
      INFO("individual=", j, " visit=", t);
      CHECK(stages[t] >= 0);
      CHECK(stages[t] <= 4);
      if (t > 0) CHECK(stages[t] >= stages[t - 1]);
      CHECK(ind.diagnoses[t] == truth.label_rule.label_for(stages[t]));
      CHECK(ind.observations[t].visit_time == schedule[t]);
    }
  }
}

TEST_CASE("stage dwell times match the closed-form sojourn") {
  // From stage 0 the chain leaves with probability 0.5 per base interval, so
  // completed dwells should average base / (1 - q) = 24 months.
  synth::GroundTruth truth = synth::default_truth(3);
  truth.transition.pi = Vector::Zero(4);
  truth.transition.pi[0] = 1.0;

  const Vector sojourns = markov::sojourn_times(truth.transition);
  REQUIRE(sojourns[0] == 24.0);

  const auto drawn =
      synth::sample_cohort_with_stages(truth, 10000, regular_schedule(22), 0.0, 909);

  double total = 0.0;
  long completed = 0;
  for (const auto& stages : drawn.true_stages) {
    for (std::size_t t = 1; t < stages.size(); ++t) {
      if (stages[t] != 0) {
        total += 12.0 * static_cast<double>(t);
        ++completed;
        break;
      }
    }
  }
  REQUIRE(completed > 9900);
  const double mean_dwell = total / static_cast<double>(completed);
  CHECK(std::abs(mean_dwell - 24.0) < 0.05 * 24.0);
}

TEST_CASE("one-step stage jumps follow the transition rows") {
  for (int row : {0, 1, 2}) {
    synth::GroundTruth truth = synth::default_truth(3);
    truth.transition.pi = Vector::Zero(4);
    truth.transition.pi[row] = 1.0;

    const auto drawn =
        synth::sample_cohort_with_stages(truth, 10000, {0.0, 12.0}, 0.0, 606 + row);

    Vector counts = Vector::Zero(4);
    for (const auto& stages : drawn.true_stages) {
      REQUIRE(stages[0] == row);
      counts[stages[1]] += 1.0;
    }
    counts /= 10000.0;
    for (Index s = 0; s < 4; ++s) {
      INFO("row=", row, " target=", s);
      CHECK(std::abs(counts[s] - truth.transition.trans(row, s)) < 0.02);
    }
  }

  SUBCASE("the final stage is absorbing") {
    synth::GroundTruth truth = synth::default_truth(3);
    truth.transition.pi = Vector::Zero(4);
    truth.transition.pi[3] = 1.0;
    const auto drawn =
        synth::sample_cohort_with_stages(truth, 200, {0.0, 12.0, 24.0}, 0.0, 3);
    for (const auto& stages : drawn.true_stages) {
      CHECK(stages == std::vector<int>{3, 3, 3});
    }
  }
}

TEST_CASE("missingness is applied per cell at the requested rate") {
  const synth::GroundTruth truth = synth::default_truth(3);
  const std::vector<Scalar> schedule{0.0, 12.0, 24.0, 36.0};

  SUBCASE("zero fraction leaves every cell observed") {
    const Cohort c = synth::sample_cohort(truth, 50, schedule, 0.0, 8);
    CHECK(count_missing_cells(c) == 0);
  }
  SUBCASE("rate concentrates near the nominal fraction") {
    const Cohort c = synth::sample_cohort(truth, 1000, schedule, 0.3, 8);
    const double cells = 1000.0 * 4.0 * 3.0;
    const double rate = static_cast<double>(count_missing_cells(c)) / cells;
    CHECK(std::abs(rate - 0.3) < 0.02);
    validate_cohort(c);
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  const synth::GroundTruth truth = synth::default_truth(3);
  const std::vector<Scalar> schedule{0.0, 12.0, 36.0};

  const auto a = synth::sample_cohort_with_stages(truth, 40, schedule, 0.2, 1234);
  const auto b = synth::sample_cohort_with_stages(truth, 40, schedule, 0.2, 1234);
  CHECK(cohorts_equal(a.cohort, b.cohort));
  CHECK(a.true_stages == b.true_stages);

  const auto c = synth::sample_cohort_with_stages(truth, 40, schedule, 0.2, 1235);
  CHECK_FALSE(cohorts_equal(a.cohort, c.cohort));
}
