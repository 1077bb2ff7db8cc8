#include "ebhmm/eval.hpp"

#include <algorithm>
#include <cmath>

#include "ebhmm/errors.hpp"
#include "ebhmm/random.hpp"
#include "ebhmm/staging.hpp"

namespace ebhmm::eval {

namespace {

Individual baseline_only(const Individual& ind) {
  Individual first;
  first.id = ind.id;
  first.observations = {ind.observations.front()};
  first.diagnoses = {ind.diagnoses.front()};
  return first;
}

std::uint64_t fold_seed(std::uint64_t seed, std::size_t fold) {
  return rng::splitmix64(seed ^ rng::splitmix64(0xF07D + fold));
}

struct FoldOutcome {
  bool usable = false;
  Scalar auc = 0.0;
  std::string note;
};

FoldOutcome evaluate_fold(const Fold& fold, std::size_t fold_index, const EvalConfig& config) {
  FoldOutcome outcome;
  LabelReport report;
  try {
    report = conversion_labels(fold.test, config.horizon_months);
  } catch (const EvalError& e) {
    outcome.note = "fold " + std::to_string(fold_index) + " skipped: " + e.what();
    return outcome;
  }

  std::vector<int> stages;
  stages.reserve(report.labels.size());
  if (config.model_kind == ModelKind::EventBased) {
    const auto mixtures = mixture::fit_mixtures(fold.train, config.patient_label,
                                                config.control_label, config.mixture);
    inference::FitConfig fc = config.fit;
    fc.seed = fold_seed(config.seed, fold_index);
    fc.threads = config.threads;
    fc.patient_label = config.patient_label;
    const auto model = inference::fit(fold.train, mixtures, fc);
    for (const auto& label : report.labels) {
      const auto& ind = fold.test.individuals[static_cast<std::size_t>(label.cohort_index)];
      stages.push_back(staging::viterbi_stage(baseline_only(ind), model).stages.front());
    }
  } else {
    baseline::CthmmConfig cc = config.cthmm;
    cc.seed = fold_seed(config.seed, fold_index);
    cc.threads = config.threads;
    const auto model = baseline::fit_cthmm(fold.train, cc.n_states, cc);
    for (const auto& label : report.labels) {
      const auto& ind = fold.test.individuals[static_cast<std::size_t>(label.cohort_index)];
      stages.push_back(baseline::stage_cthmm(baseline_only(ind), model).stages.front());
    }
  }

  try {
    outcome.auc = stage_threshold_auroc(stages, report.labels).auc;
    outcome.usable = true;
  } catch (const EvalError& e) {
    outcome.note = "fold " + std::to_string(fold_index) + " skipped: " + e.what();
  }
  return outcome;
}

}  // namespace

std::string to_string(ModelKind k) {
  return k == ModelKind::EventBased ? "ebhmm" : "cthmm";
}

std::string to_string(DataMode m) { return m == DataMode::Full ? "full" : "subset"; }

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "ebhmm") return ModelKind::EventBased;
  if (s == "cthmm") return ModelKind::Cthmm;
  throw FormatError("unknown model kind '" + s + "'");
}

DataMode data_mode_from_string(const std::string& s) {
  if (s == "full") return DataMode::Full;
  if (s == "subset") return DataMode::Subset;
  throw FormatError("unknown data mode '" + s + "'");
}

LabelReport conversion_labels(const Cohort& cohort, Scalar horizon_months) {
  if (!(horizon_months > 0.0)) {
    throw ArgumentError("conversion horizon must be positive");
  }
  LabelReport report;
  for (Index j = 0; j < cohort.n_individuals(); ++j) {
    const Individual& ind = cohort.individuals[static_cast<std::size_t>(j)];
    const Diagnosis base = ind.diagnoses.front();
    if (base == Diagnosis::NA) {
      ++report.excluded_na_baseline;
      continue;
    }
    if (base == Diagnosis::AD) {
      ++report.excluded_baseline_patient;
      continue;
    }
    const Scalar t0 = ind.observations.front().visit_time;
    bool followed = false;
    bool converted = false;
    for (std::size_t t = 1; t < ind.observations.size(); ++t) {
      if (ind.observations[t].visit_time - t0 > horizon_months + 1e-9) break;
      const Diagnosis dx = ind.diagnoses[t];
      if (dx == Diagnosis::NA) continue;
      followed = true;
      if (base == Diagnosis::CN && dx != Diagnosis::CN) converted = true;
      if (base == Diagnosis::MCI && dx == Diagnosis::AD) converted = true;
    }
    if (!followed) {
      ++report.excluded_no_followup;
      continue;
    }
    report.labels.push_back({ind.id, j, converted, base});
  }
  if (report.labels.empty()) {
    throw EvalError("no individuals eligible for conversion labelling");
  }
  return report;
}

RocResult stage_threshold_auroc(const std::vector<int>& stages,
                                const std::vector<ConversionLabel>& labels) {
  if (stages.size() != labels.size()) {
    throw ArgumentError("stage_threshold_auroc: one stage per labelled subject required");
  }
  if (stages.empty()) throw ArgumentError("stage_threshold_auroc: empty input");

  RocResult out;
  for (const auto& label : labels) (label.converted ? out.n_pos : out.n_neg)++;
  if (out.n_pos == 0 || out.n_neg == 0) {
    throw EvalError("AUC undefined: labels are all " +
                    std::string(out.n_pos == 0 ? "negative" : "positive"));
  }

  const int max_stage = *std::max_element(stages.begin(), stages.end());
  // Tightest threshold first so the curve runs (0,0) -> (1,1); the extra
  // threshold below every stage closes the curve at (1,1).
  for (int thr = max_stage; thr >= -1; --thr) {
    int tp = 0;
    int fp = 0;
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (stages[i] > thr) (labels[i].converted ? tp : fp)++;
    }
    out.thresholds.push_back({static_cast<Scalar>(thr),
                              static_cast<Scalar>(tp) / out.n_pos,
                              static_cast<Scalar>(fp) / out.n_neg});
  }

  Scalar auc = 0.0;
  for (std::size_t i = 1; i < out.thresholds.size(); ++i) {
    const RocPoint& a = out.thresholds[i - 1];
    const RocPoint& b = out.thresholds[i];
    auc += (b.fpr - a.fpr) * 0.5 * (a.tpr + b.tpr);
  }
  out.auc = auc;
  return out;
}

CvResult cross_validated_auroc(const Cohort& cohort, const EvalConfig& config) {
  Cohort working = cohort;
  CvResult out;
  if (config.data_mode == DataMode::Subset) {
    working = complete_data_subset(cohort);
    out.notes.push_back("subset mode: kept " + std::to_string(working.n_individuals()) +
                        " of " + std::to_string(cohort.n_individuals()) + " individuals");
  }

  const LabelReport overall = conversion_labels(working, config.horizon_months);
  out.notes.push_back(
      "labels: " + std::to_string(overall.labels.size()) + " eligible, excluded " +
      std::to_string(overall.excluded_na_baseline) + " unlabelled baselines, " +
      std::to_string(overall.excluded_no_followup) + " without follow-up, " +
      std::to_string(overall.excluded_baseline_patient) + " already-patient baselines");

  const auto folds = split_folds(working, config.k_folds, config.seed, config.stratify_folds);
  out.n_folds_requested = static_cast<int>(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const FoldOutcome outcome = evaluate_fold(folds[f], f, config);
    if (outcome.usable) {
      out.fold_aucs.push_back(outcome.auc);
    } else {
      out.notes.push_back(outcome.note);
    }
  }

  if (out.fold_aucs.empty()) {
    throw EvalError("AUC undefined in every fold");
  }
  Scalar sum = 0.0;
  for (Scalar a : out.fold_aucs) sum += a;
  out.mean_auc = sum / static_cast<Scalar>(out.fold_aucs.size());
  if (out.fold_aucs.size() > 1) {
    Scalar ss = 0.0;
    for (Scalar a : out.fold_aucs) ss += (a - out.mean_auc) * (a - out.mean_auc);
    out.sd_auc = std::sqrt(ss / static_cast<Scalar>(out.fold_aucs.size() - 1));
  }
  return out;
}

std::vector<SweepRow> missing_data_sweep(const Cohort& cohort,
                                         const std::vector<Scalar>& fractions,
                                         const EvalConfig& config) {
  if (fractions.empty()) throw ArgumentError("missing_data_sweep: no fractions given");
  std::vector<SweepRow> rows;
  rows.reserve(fractions.size());
  for (Scalar f : fractions) {
    const Cohort ablated = ablate_features(cohort, f, config.seed);
    rows.push_back({f, cross_validated_auroc(ablated, config)});
  }
  return rows;
}

Scalar kendall_tau(const EventSequence& a, const EventSequence& b) {
  if (a.size() != b.size()) {
    throw ArgumentError("kendall_tau: orderings cover different feature counts");
  }
  const Index n = a.size();
  if (n < 2) throw ArgumentError("kendall_tau: need at least two events");
  long concordant = 0;
  long discordant = 0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const bool order_a = a.position_of(i) < a.position_of(j);
      const bool order_b = b.position_of(i) < b.position_of(j);
      (order_a == order_b ? concordant : discordant)++;
    }
  }
  return static_cast<Scalar>(concordant - discordant) /
         (static_cast<Scalar>(n) * static_cast<Scalar>(n - 1) / 2.0);
}

}  // namespace ebhmm::eval
