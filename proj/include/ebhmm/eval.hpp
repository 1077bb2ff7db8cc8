#ifndef EBHMM_EVAL_HPP
#define EBHMM_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ebhmm/baseline.hpp"
#include "ebhmm/cohort.hpp"
#include "ebhmm/inference.hpp"
#include "ebhmm/mixture.hpp"
#include "ebhmm/sequence.hpp"
#include "ebhmm/types.hpp"

namespace ebhmm::eval {

// Did this individual progress to a worse diagnosis within the horizon?
struct ConversionLabel {
  std::string subject_id;
  Index cohort_index = 0;  // position within the cohort the label was built from
  bool converted = false;
  Diagnosis baseline_group = Diagnosis::CN;  // CN or MCI
};

struct LabelReport {
  std::vector<ConversionLabel> labels;
  int excluded_na_baseline = 0;
  int excluded_no_followup = 0;
  int excluded_baseline_patient = 0;
};

// Converted means CN at baseline followed by MCI or AD, or MCI followed by
// AD, at any labelled visit within the horizon. Individuals with an NA or AD
// baseline, or without a labelled follow-up inside the horizon, are excluded
// and counted.
LabelReport conversion_labels(const Cohort& cohort, Scalar horizon_months);

struct RocPoint {
  Scalar threshold = 0.0;  // predicted positive means stage > threshold
  Scalar tpr = 0.0;
  Scalar fpr = 0.0;
};

struct RocResult {
  Scalar auc = 0.0;
  std::vector<RocPoint> thresholds;  // loosening order, (0,0) up to (1,1)
  int n_pos = 0;
  int n_neg = 0;
};

// Threshold sweep over integer stages; trapezoidal AUC, which equals the
// pairwise concordance statistic with ties credited 0.5.
RocResult stage_threshold_auroc(const std::vector<int>& stages,
                                const std::vector<ConversionLabel>& labels);

enum class ModelKind { EventBased, Cthmm };
enum class DataMode { Full, Subset };

std::string to_string(ModelKind k);
std::string to_string(DataMode m);
ModelKind model_kind_from_string(const std::string& s);
DataMode data_mode_from_string(const std::string& s);

struct EvalConfig {
  ModelKind model_kind = ModelKind::EventBased;
  DataMode data_mode = DataMode::Full;  // Subset keeps only complete-data individuals
  int k_folds = 5;
  Scalar horizon_months = 24.0;
  std::uint64_t seed = 0;
  int threads = 1;
  bool stratify_folds = false;
  Diagnosis patient_label = Diagnosis::AD;
  Diagnosis control_label = Diagnosis::CN;
  inference::FitConfig fit;
  mixture::MixtureConfig mixture;
  baseline::CthmmConfig cthmm;
};

struct CvResult {
  Scalar mean_auc = 0.0;
  Scalar sd_auc = 0.0;  // sample standard deviation over usable folds
  std::vector<Scalar> fold_aucs;
  int n_folds_requested = 0;
  std::vector<std::string> notes;  // skipped folds, subset size, exclusions
};

// Per fold: fit on the training split (mixtures refit inside the fold),
// Viterbi-stage each labelled test individual from its baseline visit alone,
// then score the conversion AUC. Folds whose AUC is undefined are skipped
// with a warning.
CvResult cross_validated_auroc(const Cohort& cohort, const EvalConfig& config);

struct SweepRow {
  Scalar fraction = 0.0;
  CvResult result;
};

// Ablate, then cross-validate, at each fraction. All fractions share the
// ablation seed, so the discarded cells at a smaller fraction are a subset of
// those at a larger one.
std::vector<SweepRow> missing_data_sweep(const Cohort& cohort,
                                         const std::vector<Scalar>& fractions,
                                         const EvalConfig& config);

// Rank correlation between two event orderings, in [-1, 1].
Scalar kendall_tau(const EventSequence& a, const EventSequence& b);

}  // namespace ebhmm::eval

#endif
