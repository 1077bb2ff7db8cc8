#include "ebhmm/synth.hpp"

#include <cmath>

#include "ebhmm/errors.hpp"
#include "ebhmm/random.hpp"

namespace ebhmm::synth {

void validate_truth(const GroundTruth& truth) {
  const int n = truth.sequence.size();
  if (truth.transition.n_stages() != n + 1) {
    throw ValidationError("ground truth: transition stages must equal events + 1");
  }
  if (static_cast<int>(truth.mixtures.size()) != n) {
    throw ValidationError("ground truth: one mixture pair per event required");
  }
  if (static_cast<int>(truth.feature_names.size()) != n ||
      static_cast<int>(truth.feature_directions.size()) != n) {
    throw ValidationError("ground truth: feature names/directions must match event count");
  }
  if (truth.label_rule.cn_max_stage < 0 ||
      truth.label_rule.mci_max_stage < truth.label_rule.cn_max_stage) {
    throw ValidationError("ground truth: label rule stage ranges are not ordered");
  }
  markov::validate_transition_model(truth.transition, -1, true);
}

GroundTruth default_truth(int n_features, double separation_sds, Scalar base_interval_months) {
  if (n_features < 2) throw ArgumentError("default_truth: need at least 2 features");
  const Index n_stages = n_features + 1;

  Matrix trans = Matrix::Zero(n_stages, n_stages);
  for (Index s = 0; s < n_stages; ++s) {
    if (s + 2 < n_stages) {
      trans(s, s) = 0.5;
      trans(s, s + 1) = 0.35;
      trans(s, s + 2) = 0.15;
    } else if (s + 1 < n_stages) {
      trans(s, s) = 0.5;
      trans(s, s + 1) = 0.5;
    } else {
      trans(s, s) = 1.0;
    }
  }

  GroundTruth truth{
      EventSequence::identity(n_features),
      markov::TransitionModel{Vector::Constant(n_stages, 1.0 / static_cast<Scalar>(n_stages)),
                              std::move(trans), base_interval_months},
      {},
      // CN only before any event, AD only once every event has occurred:
      // the extreme labels then identify the pure mixture components.
      LabelRule{0, n_features - 1},
      {},
      {}};

  for (int i = 0; i < n_features; ++i) {
    mixture::MixturePair pair;
    pair.feature_index = i;
    pair.control = {0.0, 1.0, 0.5};
    pair.patient = {separation_sds, 1.0, 0.5};
    truth.mixtures.push_back(pair);
    truth.feature_names.push_back("F" + std::to_string(i + 1));
    truth.feature_directions.push_back(Direction::Increasing);
  }
  validate_truth(truth);
  return truth;
}

SampledCohort sample_cohort_with_stages(const GroundTruth& truth, Index n_individuals,
                                        const std::vector<Scalar>& visit_schedule_months,
                                        double missing_fraction, std::uint64_t seed) {
  validate_truth(truth);
  if (visit_schedule_months.empty()) throw ArgumentError("sample_cohort: empty visit schedule");
  for (std::size_t t = 1; t < visit_schedule_months.size(); ++t) {
    if (visit_schedule_months[t] <= visit_schedule_months[t - 1]) {
      throw ArgumentError("sample_cohort: visit schedule must be strictly ascending");
    }
  }
  if (missing_fraction < 0.0 || missing_fraction >= 1.0) {
    throw ArgumentError("sample_cohort: missing_fraction must be in [0,1)");
  }

  const int n = truth.sequence.size();

  // Per-gap transition matrices, shared across individuals.
  std::vector<Matrix> gap_trans;
  for (std::size_t t = 1; t < visit_schedule_months.size(); ++t) {
    gap_trans.push_back(markov::transition_over_interval(
        truth.transition, visit_schedule_months[t] - visit_schedule_months[t - 1]));
  }

  SampledCohort out;
  out.cohort.feature_names = truth.feature_names;
  out.cohort.feature_directions = truth.feature_directions;

  for (Index j = 0; j < n_individuals; ++j) {
    auto engine = rng::derived_engine(seed, static_cast<std::uint64_t>(j));
    Individual ind;
    ind.id = "S" + std::to_string(j + 1);
    std::vector<int> stages;

    int stage = static_cast<int>(rng::discrete(engine, truth.transition.pi));
    for (std::size_t t = 0; t < visit_schedule_months.size(); ++t) {
      if (t > 0) {
        stage = static_cast<int>(
            rng::discrete(engine, gap_trans[t - 1].row(stage).transpose()));
      }
      stages.push_back(stage);

      Observation obs;
      obs.visit_time = visit_schedule_months[t];
      obs.values = Vector::Zero(n);
      obs.missing = ArrayXb::Constant(n, false);
      for (int i = 0; i < n; ++i) {
        const auto& pair = truth.mixtures[static_cast<std::size_t>(i)];
        const bool event_happened = truth.sequence.position_of(i) < stage;
        const auto& comp = event_happened ? pair.patient : pair.control;
        obs.values[i] = rng::normal(engine, comp.mu, comp.sigma);
        if (missing_fraction > 0.0 && rng::uniform(engine) < missing_fraction) {
          obs.missing[i] = true;
          obs.values[i] = 0.0;
        }
      }
      ind.observations.push_back(std::move(obs));
      ind.diagnoses.push_back(truth.label_rule.label_for(stage));
    }
    out.cohort.individuals.push_back(std::move(ind));
    out.true_stages.push_back(std::move(stages));
  }
  validate_cohort(out.cohort);
  return out;
}

Cohort sample_cohort(const GroundTruth& truth, Index n_individuals,
                     const std::vector<Scalar>& visit_schedule_months,
                     double missing_fraction, std::uint64_t seed) {
  return sample_cohort_with_stages(truth, n_individuals, visit_schedule_months,
                                   missing_fraction, seed)
      .cohort;
}

}  // namespace ebhmm::synth
