#include "ebhmm/serialize.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "ebhmm/errors.hpp"
#include "ebhmm/text.hpp"

namespace ebhmm::serialize {

namespace {

using json = nlohmann::json;

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  Index i = 0;
  for (const auto& x : j) v[i++] = x.get<Scalar>();
  return v;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Index>(j.size());
  if (rows == 0) return Matrix(0, 0);
  const auto cols = static_cast<Index>(j.front().size());
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const auto& row = j.at(static_cast<std::size_t>(r));
    if (static_cast<Index>(row.size()) != cols) {
      throw SchemaError("ragged matrix in document");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<Scalar>();
  }
  return m;
}

json gaussian_to_json(const mixture::GaussianParams& p) {
  return json{{"mu", p.mu}, {"sigma", p.sigma}, {"weight", p.weight}};
}

mixture::GaussianParams gaussian_from_json(const json& j) {
  mixture::GaussianParams p;
  p.mu = j.at("mu").get<Scalar>();
  p.sigma = j.at("sigma").get<Scalar>();
  p.weight = j.at("weight").get<Scalar>();
  return p;
}

json mixtures_to_json(const std::vector<mixture::MixturePair>& pairs,
                      const std::vector<std::string>& feature_names) {
  json out = json::array();
  for (const auto& pair : pairs) {
    out.push_back(json{{"feature", feature_names.at(static_cast<std::size_t>(pair.feature_index))},
                       {"patient", gaussian_to_json(pair.patient)},
                       {"control", gaussian_to_json(pair.control)},
                       {"em_converged", pair.em_converged}});
  }
  return out;
}

std::vector<mixture::MixturePair> mixtures_from_json(
    const json& j, const std::vector<std::string>& feature_names) {
  std::vector<mixture::MixturePair> pairs;
  for (const auto& item : j) {
    mixture::MixturePair pair;
    const std::string feature = item.at("feature").get<std::string>();
    const auto it = std::find(feature_names.begin(), feature_names.end(), feature);
    if (it == feature_names.end()) {
      throw SchemaError("mixture references unknown feature '" + feature + "'");
    }
    pair.feature_index = static_cast<int>(it - feature_names.begin());
    pair.patient = gaussian_from_json(item.at("patient"));
    pair.control = gaussian_from_json(item.at("control"));
    pair.em_converged = item.at("em_converged").get<bool>();
    pairs.push_back(pair);
  }
  // Stage emissions index mixtures by feature, so keep feature order.
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.feature_index < b.feature_index; });
  return pairs;
}

json sequence_to_json(const EventSequence& sequence,
                      const std::vector<std::string>& feature_names) {
  json out = json::array();
  for (int p = 0; p < sequence.size(); ++p) {
    out.push_back(feature_names.at(static_cast<std::size_t>(sequence.feature_at(p))));
  }
  return out;
}

EventSequence sequence_from_json(const json& j, const std::vector<std::string>& feature_names) {
  std::vector<int> order;
  for (const auto& name : j) {
    const auto it = std::find(feature_names.begin(), feature_names.end(), name.get<std::string>());
    if (it == feature_names.end()) {
      throw SchemaError("sequence references unknown feature '" + name.get<std::string>() + "'");
    }
    order.push_back(static_cast<int>(it - feature_names.begin()));
  }
  return EventSequence(std::move(order));
}

json directions_to_json(const std::vector<Direction>& dirs) {
  json out = json::array();
  for (Direction d : dirs) out.push_back(to_string(d));
  return out;
}

std::vector<Direction> directions_from_json(const json& j) {
  std::vector<Direction> out;
  for (const auto& s : j) out.push_back(direction_from_string(s.get<std::string>()));
  return out;
}

json names_to_json(const std::vector<std::string>& names) {
  json out = json::array();
  for (const auto& n : names) out.push_back(n);
  return out;
}

std::vector<std::string> names_from_json(const json& j) {
  std::vector<std::string> out;
  for (const auto& n : j) out.push_back(n.get<std::string>());
  return out;
}

void write_json_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw FormatError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

void require_version(const json& j, const std::string& path) {
  if (!j.contains("format_version")) {
    throw SchemaError(path + ": missing format_version");
  }
  const int version = j.at("format_version").get<int>();
  if (version != kFormatVersion) {
    throw SchemaError(path + ": unsupported format_version " + std::to_string(version));
  }
}

json meta_to_json(const ArtifactMeta& meta) {
  return json{{"config_hash", meta.config_hash}, {"seed", meta.seed}};
}

ArtifactMeta meta_from_json(const json& j) {
  ArtifactMeta meta;
  meta.config_hash = j.at("config_hash").get<std::string>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  return meta;
}

json diagnostics_to_json(const std::vector<Scalar>& trace, int iterations, bool converged,
                         const std::vector<std::string>& notes) {
  json out;
  out["log_likelihood_trace"] = json::array();
  for (Scalar v : trace) out["log_likelihood_trace"].push_back(v);
  out["iterations"] = iterations;
  out["converged"] = converged;
  out["notes"] = names_to_json(notes);
  return out;
}

std::string csv_meta_line(const ArtifactMeta& meta) {
  return "# config_hash=" + meta.config_hash + " seed=" + std::to_string(meta.seed);
}

}  // namespace

void save_model(const ModelFile& file, const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["model_type"] = file.model_type;
  j["config_hash"] = file.meta.config_hash;
  j["seed"] = file.meta.seed;
  j["features"] = names_to_json(file.feature_names);
  j["directions"] = directions_to_json(file.feature_directions);
  if (file.model_type == "ebhmm") {
    const auto& m = file.event_model;
    j["base_interval_months"] = m.transition.base_interval_months;
    j["sequence"] = sequence_to_json(m.sequence, file.feature_names);
    j["pi"] = vector_to_json(m.transition.pi);
    j["transition"] = matrix_to_json(m.transition.trans);
    j["mixtures"] = mixtures_to_json(m.mixtures, file.feature_names);
    j["diagnostics"] =
        diagnostics_to_json(m.diagnostics.log_likelihood_trace, m.diagnostics.iterations,
                            m.diagnostics.converged, m.diagnostics.notes);
  } else if (file.model_type == "cthmm") {
    const auto& m = file.cthmm_model;
    j["base_interval_months"] = m.base_interval_months;
    j["n_states"] = m.n_states();
    j["pi"] = vector_to_json(m.pi);
    j["transition"] = matrix_to_json(m.trans);
    j["band_width"] = m.band_width;
    j["emission_means"] = matrix_to_json(m.emission_means);
    j["covariance_kind"] = baseline::to_string(m.cov_kind);
    if (m.cov_kind == baseline::CovarianceKind::SharedFull) {
      j["shared_covariance"] = matrix_to_json(m.shared_cov);
    } else {
      j["state_variances"] = matrix_to_json(m.state_variances);
    }
    j["diagnostics"] =
        diagnostics_to_json(m.diagnostics.log_likelihood_trace, m.diagnostics.iterations,
                            m.diagnostics.converged, m.diagnostics.notes);
  } else {
    throw ArgumentError("save_model: unknown model_type '" + file.model_type + "'");
  }
  write_json_file(j, path);
}

ModelFile load_model(const std::string& path) {
  const json j = read_json_file(path);
  try {
    require_version(j, path);
    ModelFile file;
    file.model_type = j.at("model_type").get<std::string>();
    file.meta = meta_from_json(j);
    file.feature_names = names_from_json(j.at("features"));
    file.feature_directions = directions_from_json(j.at("directions"));
    if (file.model_type == "ebhmm") {
      auto& m = file.event_model;
      m.sequence = sequence_from_json(j.at("sequence"), file.feature_names);
      m.transition.pi = vector_from_json(j.at("pi"));
      m.transition.trans = matrix_from_json(j.at("transition"));
      m.transition.base_interval_months = j.at("base_interval_months").get<Scalar>();
      m.mixtures = mixtures_from_json(j.at("mixtures"), file.feature_names);
      const auto& d = j.at("diagnostics");
      for (const auto& v : d.at("log_likelihood_trace")) {
        m.diagnostics.log_likelihood_trace.push_back(v.get<Scalar>());
      }
      m.diagnostics.iterations = d.at("iterations").get<int>();
      m.diagnostics.converged = d.at("converged").get<bool>();
      m.diagnostics.notes = names_from_json(d.at("notes"));
    } else if (file.model_type == "cthmm") {
      auto& m = file.cthmm_model;
      m.pi = vector_from_json(j.at("pi"));
      m.trans = matrix_from_json(j.at("transition"));
      m.base_interval_months = j.at("base_interval_months").get<Scalar>();
      m.band_width = j.at("band_width").get<int>();
      m.emission_means = matrix_from_json(j.at("emission_means"));
      m.cov_kind = baseline::covariance_kind_from_string(j.at("covariance_kind").get<std::string>());
      if (m.cov_kind == baseline::CovarianceKind::SharedFull) {
        m.shared_cov = matrix_from_json(j.at("shared_covariance"));
        m.state_variances = m.shared_cov.diagonal().transpose().replicate(m.n_states(), 1);
      } else {
        m.state_variances = matrix_from_json(j.at("state_variances"));
        m.shared_cov = Matrix::Zero(m.n_features(), m.n_features());
      }
      const auto& d = j.at("diagnostics");
      for (const auto& v : d.at("log_likelihood_trace")) {
        m.diagnostics.log_likelihood_trace.push_back(v.get<Scalar>());
      }
      m.diagnostics.iterations = d.at("iterations").get<int>();
      m.diagnostics.converged = d.at("converged").get<bool>();
      m.diagnostics.notes = names_from_json(d.at("notes"));
    } else {
      throw SchemaError(path + ": unknown model_type '" + file.model_type + "'");
    }
    return file;
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void save_truth(const synth::GroundTruth& truth, const ArtifactMeta& meta,
                const std::string& path) {
  json j;
  j["format_version"] = kFormatVersion;
  j["model_type"] = "ground_truth";
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
  j["features"] = names_to_json(truth.feature_names);
  j["directions"] = directions_to_json(truth.feature_directions);
  j["sequence"] = sequence_to_json(truth.sequence, truth.feature_names);
  j["pi"] = vector_to_json(truth.transition.pi);
  j["transition"] = matrix_to_json(truth.transition.trans);
  j["base_interval_months"] = truth.transition.base_interval_months;
  j["mixtures"] = mixtures_to_json(truth.mixtures, truth.feature_names);
  j["label_rule"] = json{{"cn_max_stage", truth.label_rule.cn_max_stage},
                         {"mci_max_stage", truth.label_rule.mci_max_stage}};
  write_json_file(j, path);
}

synth::GroundTruth load_truth(const std::string& path) {
  const json j = read_json_file(path);
  try {
    require_version(j, path);
    if (j.at("model_type").get<std::string>() != "ground_truth") {
      throw SchemaError(path + ": not a ground-truth document");
    }
    synth::GroundTruth truth;
    truth.feature_names = names_from_json(j.at("features"));
    truth.feature_directions = directions_from_json(j.at("directions"));
    truth.sequence = sequence_from_json(j.at("sequence"), truth.feature_names);
    truth.transition.pi = vector_from_json(j.at("pi"));
    truth.transition.trans = matrix_from_json(j.at("transition"));
    truth.transition.base_interval_months = j.at("base_interval_months").get<Scalar>();
    truth.mixtures = mixtures_from_json(j.at("mixtures"), truth.feature_names);
    truth.label_rule.cn_max_stage = j.at("label_rule").at("cn_max_stage").get<int>();
    truth.label_rule.mci_max_stage = j.at("label_rule").at("mci_max_stage").get<int>();
    return truth;
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void save_timeline_csv(const markov::Timeline& timeline,
                       const std::vector<std::string>& event_names,
                       const ArtifactMeta& meta, const std::string& path) {
  if (static_cast<Index>(event_names.size()) != timeline.event_times.size()) {
    throw ArgumentError("save_timeline_csv: one name per event required");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << csv_meta_line(meta) << '\n';
  out << "event_name,event_time_months\n";
  for (Index i = 0; i < timeline.event_times.size(); ++i) {
    out << event_names[static_cast<std::size_t>(i)] << ','
        << text::format_double(timeline.event_times[i]) << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

void save_timeline_json(const markov::Timeline& timeline,
                        const std::vector<std::string>& event_names,
                        const ArtifactMeta& meta, const std::string& path) {
  if (static_cast<Index>(event_names.size()) != timeline.event_times.size()) {
    throw ArgumentError("save_timeline_json: one name per event required");
  }
  json j;
  j["format_version"] = kFormatVersion;
  j["config_hash"] = meta.config_hash;
  j["seed"] = meta.seed;
  json events = json::array();
  for (Index i = 0; i < timeline.event_times.size(); ++i) {
    events.push_back(json{{"name", event_names[static_cast<std::size_t>(i)]},
                          {"event_time_months", timeline.event_times[i]},
                          {"stage_sojourn_months", timeline.sojourns[i]}});
  }
  j["events"] = events;
  j["total_span_months"] =
      timeline.event_times.size() > 0 ? timeline.event_times[timeline.event_times.size() - 1] : 0.0;
  write_json_file(j, path);
}

void save_staging_csv(const std::vector<StagingRow>& rows, const ArtifactMeta& meta,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << csv_meta_line(meta) << '\n';
  out << "subject_id,visit_time,stage,max_posterior,predicted_stage_12m\n";
  for (const auto& row : rows) {
    out << row.subject_id << ',' << text::format_double(row.visit_time) << ',' << row.stage << ','
        << text::format_double(row.max_posterior) << ',' << row.predicted_stage_12m << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

void save_prediction_csv(const std::vector<PredictionRow>& rows, Scalar horizon_months,
                         const ArtifactMeta& meta, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << csv_meta_line(meta) << '\n';
  out << "# horizon_months=" << text::format_double(horizon_months) << '\n';
  const Index n_stages = rows.empty() ? 0 : rows.front().distribution.size();
  out << "subject_id,predicted_stage";
  for (Index s = 0; s < n_stages; ++s) out << ",p_stage_" << s;
  out << '\n';
  for (const auto& row : rows) {
    out << row.subject_id << ',' << row.predicted_stage;
    for (Index s = 0; s < row.distribution.size(); ++s) {
      out << ',' << text::format_double(row.distribution[s]);
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path);
}

}  // namespace ebhmm::serialize
