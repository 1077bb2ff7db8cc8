#ifndef EBHMM_COHORT_HPP
#define EBHMM_COHORT_HPP

#include <string>
#include <utility>
#include <vector>

#include "ebhmm/types.hpp"

namespace ebhmm {

enum class Diagnosis { CN, MCI, AD, NA };

std::string to_string(Diagnosis d);
Diagnosis diagnosis_from_string(const std::string& s);

enum class Direction { Increasing, Decreasing };

std::string to_string(Direction d);
Direction direction_from_string(const std::string& s);

// One visit: per-feature measurements with a missingness mask.
struct Observation {
  Vector values;        // finite wherever missing[i] is false
  ArrayXb missing;
  Scalar visit_time = 0.0;  // months since baseline

  Index n_features() const { return values.size(); }
  Index n_observed() const { return static_cast<Index>((missing == false).count()); }
};

struct Individual {
  std::string id;
  std::vector<Observation> observations;   // strictly ascending visit_time
  std::vector<Diagnosis> diagnoses;        // one per observation

  Index n_visits() const { return static_cast<Index>(observations.size()); }
};

struct Cohort {
  std::vector<Individual> individuals;
  std::vector<std::string> feature_names;
  std::vector<Direction> feature_directions;

  Index n_individuals() const { return static_cast<Index>(individuals.size()); }
  Index n_features() const { return static_cast<Index>(feature_names.size()); }
  Index feature_index(const std::string& name) const;  // -1 when absent
};

enum class CohortFormat { Csv, Json };

// Throws ValidationError if any invariant fails; used by loaders and builders.
void validate_cohort(const Cohort& cohort);

// CSV schema: subject_id,visit_time,diagnosis,<feature...>; empty cell = missing.
// Lines starting with '#' are metadata/comments; a "# directions=..." line
// restores feature directions on round-trip. The JSON schema mirrors Cohort.
Cohort load_cohort(const std::string& path, CohortFormat format);
void save_cohort(const Cohort& cohort, const std::string& path, CohortFormat format);

struct Fold {
  Cohort train;
  Cohort test;
};

// Partition individuals (never visits) into k disjoint test folds.
// Optionally stratified by baseline diagnosis.
std::vector<Fold> split_folds(const Cohort& cohort, int k, std::uint64_t seed,
                              bool stratify = false);

// For each individual, discard exactly round(fraction * observed cells)
// additional cells, uniformly at random. For a fixed seed the discarded set
// at fraction f is a prefix of the one at f' > f (mask inclusion).
Cohort ablate_features(const Cohort& cohort, double fraction, std::uint64_t seed);

// Individuals with no missing cells at any visit.
Cohort complete_data_subset(const Cohort& cohort);

bool cohorts_equal(const Cohort& a, const Cohort& b);

}  // namespace ebhmm

#endif
