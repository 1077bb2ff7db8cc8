#include "ebhmm/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ebhmm/errors.hpp"
#include "ebhmm/random.hpp"
#include "ebhmm/text.hpp"

namespace ebhmm {

namespace {

using text::format_double;
using text::parse_double;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string to_string(Diagnosis d) {
  switch (d) {
    case Diagnosis::CN: return "CN";
    case Diagnosis::MCI: return "MCI";
    case Diagnosis::AD: return "AD";
    case Diagnosis::NA: return "NA";
  }
  return "NA";
}

Diagnosis diagnosis_from_string(const std::string& s) {
  if (s == "CN") return Diagnosis::CN;
  if (s == "MCI") return Diagnosis::MCI;
  if (s == "AD") return Diagnosis::AD;
  if (s == "NA" || s.empty()) return Diagnosis::NA;
  throw FormatError("unknown diagnosis label '" + s + "' (expected CN, MCI, AD or NA)");
}

std::string to_string(Direction d) {
  return d == Direction::Increasing ? "increasing" : "decreasing";
}

Direction direction_from_string(const std::string& s) {
  if (s == "increasing" || s == "inc") return Direction::Increasing;
  if (s == "decreasing" || s == "dec") return Direction::Decreasing;
  throw FormatError("unknown direction '" + s + "' (expected increasing or decreasing)");
}

Index Cohort::feature_index(const std::string& name) const {
  for (Index i = 0; i < n_features(); ++i) {
    if (feature_names[i] == name) return i;
  }
  return -1;
}

void validate_cohort(const Cohort& cohort) {
  const Index n = cohort.n_features();
  if (n < 2) throw ValidationError("cohort needs at least 2 features, got " + std::to_string(n));
  if (cohort.feature_directions.size() != cohort.feature_names.size()) {
    throw ValidationError("feature_directions size does not match feature_names");
  }
  for (const auto& ind : cohort.individuals) {
    if (ind.observations.empty()) {
      throw ValidationError("individual '" + ind.id + "' has no observations");
    }
    if (ind.diagnoses.size() != ind.observations.size()) {
      throw ValidationError("individual '" + ind.id + "' has mismatched diagnosis count");
    }
    Scalar prev_time = -1.0;
    bool first = true;
    for (const auto& obs : ind.observations) {
      if (obs.values.size() != n || obs.missing.size() != n) {
        throw ValidationError("individual '" + ind.id + "' has an observation with wrong feature count");
      }
      if (obs.visit_time < 0.0 || !std::isfinite(obs.visit_time)) {
        throw ValidationError("individual '" + ind.id + "' has a negative or non-finite visit time");
      }
      if (!first && obs.visit_time <= prev_time) {
        throw ValidationError("individual '" + ind.id + "' has visits not strictly ascending in time");
      }
      for (Index i = 0; i < n; ++i) {
        if (!obs.missing[i] && !std::isfinite(obs.values[i])) {
          throw ValidationError("individual '" + ind.id + "' has a non-finite observed value for feature '" +
                                cohort.feature_names[i] + "'");
        }
      }
      prev_time = obs.visit_time;
      first = false;
    }
  }
}

namespace {

Cohort load_cohort_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");

  Cohort cohort;
  std::vector<Direction> directions_meta;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;

  // id -> index into cohort.individuals, first-appearance order
  std::map<std::string, std::size_t> index_of;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string key = "# directions=";
      if (line.rfind(key, 0) == 0) {
        for (const auto& tok : split_csv_line(line.substr(key.size()))) {
          directions_meta.push_back(direction_from_string(tok));
        }
      }
      continue;
    }
    auto cells = split_csv_line(line);
    if (!have_header) {
      if (cells.size() < 5 || cells[0] != "subject_id" || cells[1] != "visit_time" ||
          cells[2] != "diagnosis") {
        throw FormatError("line " + std::to_string(line_no) +
                          ": expected header 'subject_id,visit_time,diagnosis,<features...>'");
      }
      cohort.feature_names.assign(cells.begin() + 3, cells.end());
      have_header = true;
      continue;
    }
    if (cells.size() != cohort.feature_names.size() + 3) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " +
                        std::to_string(cohort.feature_names.size() + 3) + " columns, got " +
                        std::to_string(cells.size()));
    }
    const std::string locus = "line " + std::to_string(line_no);
    Observation obs;
    const Index n = static_cast<Index>(cohort.feature_names.size());
    obs.values = Vector::Zero(n);
    obs.missing = ArrayXb::Constant(n, false);
    obs.visit_time = parse_double(cells[1], locus + " column visit_time");
    for (Index i = 0; i < n; ++i) {
      const std::string& cell = cells[3 + static_cast<std::size_t>(i)];
      if (cell.empty()) {
        obs.missing[i] = true;
      } else {
        obs.values[i] = parse_double(cell, locus + " column " + cohort.feature_names[i]);
      }
    }

    auto [it, inserted] = index_of.try_emplace(cells[0], cohort.individuals.size());
    if (inserted) {
      cohort.individuals.push_back(Individual{cells[0], {}, {}});
    }
    Individual& ind = cohort.individuals[it->second];
    ind.observations.push_back(std::move(obs));
    ind.diagnoses.push_back(diagnosis_from_string(cells[2]));
  }
  if (!have_header) throw FormatError("'" + path + "' is empty or has no header");

  if (!directions_meta.empty() && directions_meta.size() != cohort.feature_names.size()) {
    throw SchemaError("'" + path + "': directions metadata does not match feature count");
  }
  cohort.feature_directions = directions_meta.empty()
      ? std::vector<Direction>(cohort.feature_names.size(), Direction::Increasing)
      : directions_meta;

  validate_cohort(cohort);
  return cohort;
}

void save_cohort_csv(const Cohort& cohort, const std::string& path) {
  for (const auto& name : cohort.feature_names) {
    if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos) {
      throw SchemaError("feature name '" + name + "' cannot be written to CSV");
    }
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << "# directions=";
  for (std::size_t i = 0; i < cohort.feature_directions.size(); ++i) {
    out << (i ? "," : "") << to_string(cohort.feature_directions[i]);
  }
  out << "\nsubject_id,visit_time,diagnosis";
  for (const auto& name : cohort.feature_names) out << ',' << name;
  out << '\n';
  for (const auto& ind : cohort.individuals) {
    for (std::size_t t = 0; t < ind.observations.size(); ++t) {
      const Observation& obs = ind.observations[t];
      out << ind.id << ',' << format_double(obs.visit_time) << ',' << to_string(ind.diagnoses[t]);
      for (Index i = 0; i < obs.values.size(); ++i) {
        out << ',';
        if (!obs.missing[i]) out << format_double(obs.values[i]);
      }
      out << '\n';
    }
  }
}

Cohort load_cohort_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("'" + path + "': " + e.what());
  }

  Cohort cohort;
  try {
    cohort.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    for (const auto& d : doc.at("feature_directions")) {
      cohort.feature_directions.push_back(direction_from_string(d.get<std::string>()));
    }
    const Index n = static_cast<Index>(cohort.feature_names.size());
    for (const auto& jind : doc.at("individuals")) {
      Individual ind;
      ind.id = jind.at("id").get<std::string>();
      for (const auto& jv : jind.at("visits")) {
        Observation obs;
        obs.visit_time = jv.at("time").get<double>();
        const auto& vals = jv.at("values");
        if (static_cast<Index>(vals.size()) != n) {
          throw SchemaError("individual '" + ind.id + "': values length " +
                            std::to_string(vals.size()) + " != feature count " + std::to_string(n));
        }
        obs.values = Vector::Zero(n);
        obs.missing = ArrayXb::Constant(n, false);
        for (Index i = 0; i < n; ++i) {
          if (vals[static_cast<std::size_t>(i)].is_null()) {
            obs.missing[i] = true;
          } else {
            obs.values[i] = vals[static_cast<std::size_t>(i)].get<double>();
          }
        }
        ind.observations.push_back(std::move(obs));
        ind.diagnoses.push_back(diagnosis_from_string(jv.at("diagnosis").get<std::string>()));
      }
      cohort.individuals.push_back(std::move(ind));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("'" + path + "': " + e.what());
  }
  validate_cohort(cohort);
  return cohort;
}

void save_cohort_json(const Cohort& cohort, const std::string& path) {
  nlohmann::json doc;
  doc["format_version"] = 1;
  doc["feature_names"] = cohort.feature_names;
  auto& dirs = doc["feature_directions"] = nlohmann::json::array();
  for (const auto& d : cohort.feature_directions) dirs.push_back(to_string(d));
  auto& inds = doc["individuals"] = nlohmann::json::array();
  for (const auto& ind : cohort.individuals) {
    nlohmann::json jind;
    jind["id"] = ind.id;
    auto& visits = jind["visits"] = nlohmann::json::array();
    for (std::size_t t = 0; t < ind.observations.size(); ++t) {
      const Observation& obs = ind.observations[t];
      nlohmann::json jv;
      jv["time"] = obs.visit_time;
      jv["diagnosis"] = to_string(ind.diagnoses[t]);
      auto& vals = jv["values"] = nlohmann::json::array();
      for (Index i = 0; i < obs.values.size(); ++i) {
        if (obs.missing[i]) {
          vals.push_back(nullptr);
        } else {
          vals.push_back(obs.values[i]);
        }
      }
      visits.push_back(std::move(jv));
    }
    inds.push_back(std::move(jind));
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << doc.dump(2) << '\n';
}

}  // namespace

Cohort load_cohort(const std::string& path, CohortFormat format) {
  return format == CohortFormat::Csv ? load_cohort_csv(path) : load_cohort_json(path);
}

void save_cohort(const Cohort& cohort, const std::string& path, CohortFormat format) {
  if (format == CohortFormat::Csv) {
    save_cohort_csv(cohort, path);
  } else {
    save_cohort_json(cohort, path);
  }
}

std::vector<Fold> split_folds(const Cohort& cohort, int k, std::uint64_t seed, bool stratify) {
  const Index j = cohort.n_individuals();
  if (k < 2) throw ArgumentError("split_folds needs k >= 2, got " + std::to_string(k));
  if (static_cast<Index>(k) > j) {
    throw ArgumentError("split_folds: k=" + std::to_string(k) + " exceeds cohort size " +
                        std::to_string(j));
  }

  rng::Engine engine(rng::splitmix64(seed));
  std::vector<std::size_t> order;
  order.reserve(static_cast<std::size_t>(j));

  if (stratify) {
    // Shuffle within baseline-diagnosis strata, then interleave so each
    // fold sees a similar label mix.
    std::map<Diagnosis, std::vector<std::size_t>> strata;
    for (std::size_t i = 0; i < cohort.individuals.size(); ++i) {
      strata[cohort.individuals[i].diagnoses.front()].push_back(i);
    }
    std::vector<std::vector<std::size_t>> groups;
    for (auto& [label, members] : strata) {
      rng::shuffle(members, engine);
      groups.push_back(std::move(members));
    }
    for (auto& g : groups) {
      for (std::size_t m : g) order.push_back(m);
    }
  } else {
    for (std::size_t i = 0; i < cohort.individuals.size(); ++i) order.push_back(i);
    rng::shuffle(order, engine);
  }

  // Round-robin over the (stratified) order gives balanced fold sizes.
  std::vector<std::vector<std::size_t>> test_members(static_cast<std::size_t>(k));
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    test_members[pos % static_cast<std::size_t>(k)].push_back(order[pos]);
  }

  std::vector<Fold> folds;
  folds.reserve(static_cast<std::size_t>(k));
  for (int f = 0; f < k; ++f) {
    std::vector<char> in_test(static_cast<std::size_t>(j), 0);
    for (std::size_t m : test_members[static_cast<std::size_t>(f)]) in_test[m] = 1;
    Fold fold;
    fold.train.feature_names = fold.test.feature_names = cohort.feature_names;
    fold.train.feature_directions = fold.test.feature_directions = cohort.feature_directions;
    for (std::size_t i = 0; i < cohort.individuals.size(); ++i) {
      (in_test[i] ? fold.test : fold.train).individuals.push_back(cohort.individuals[i]);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

Cohort ablate_features(const Cohort& cohort, double fraction, std::uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw ArgumentError("ablate_features fraction must be in [0,1]");
  }
  Cohort out = cohort;
  for (std::size_t j = 0; j < out.individuals.size(); ++j) {
    Individual& ind = out.individuals[j];
    std::vector<std::pair<std::size_t, Index>> observed;  // (visit, feature)
    for (std::size_t t = 0; t < ind.observations.size(); ++t) {
      for (Index i = 0; i < ind.observations[t].missing.size(); ++i) {
        if (!ind.observations[t].missing[i]) observed.emplace_back(t, i);
      }
    }
    // The shuffled order is independent of the fraction, so a larger
    // fraction discards a superset of cells (mask inclusion).
    auto engine = rng::derived_engine(seed, j);
    rng::shuffle(observed, engine);
    const auto n_drop = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(observed.size())));
    for (std::size_t c = 0; c < n_drop; ++c) {
      auto [t, i] = observed[c];
      ind.observations[t].missing[i] = true;
      ind.observations[t].values[i] = 0.0;
    }
  }
  return out;
}

Cohort complete_data_subset(const Cohort& cohort) {
  Cohort out;
  out.feature_names = cohort.feature_names;
  out.feature_directions = cohort.feature_directions;
  for (const auto& ind : cohort.individuals) {
    bool complete = true;
    for (const auto& obs : ind.observations) {
      if (obs.missing.any()) {
        complete = false;
        break;
      }
    }
    if (complete) out.individuals.push_back(ind);
  }
  return out;
}

bool cohorts_equal(const Cohort& a, const Cohort& b) {
  if (a.feature_names != b.feature_names) return false;
  if (a.feature_directions != b.feature_directions) return false;
  if (a.individuals.size() != b.individuals.size()) return false;
  for (std::size_t j = 0; j < a.individuals.size(); ++j) {
    const Individual& x = a.individuals[j];
    const Individual& y = b.individuals[j];
    if (x.id != y.id || x.diagnoses != y.diagnoses) return false;
    if (x.observations.size() != y.observations.size()) return false;
    for (std::size_t t = 0; t < x.observations.size(); ++t) {
      const Observation& p = x.observations[t];
      const Observation& q = y.observations[t];
      if (p.visit_time != q.visit_time) return false;
      if ((p.missing != q.missing).any()) return false;
      for (Index i = 0; i < p.values.size(); ++i) {
        if (!p.missing[i] && p.values[i] != q.values[i]) return false;
      }
    }
  }
  return true;
}

}  // namespace ebhmm
