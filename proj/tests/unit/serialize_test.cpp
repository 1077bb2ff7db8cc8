#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ebhmm/markov.hpp"
#include "ebhmm/random.hpp"
#include "ebhmm/serialize.hpp"
#include "ebhmm/synth.hpp"
#include "support/generators.hpp"

using namespace ebhmm;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void patch_json_file(const std::string& path, void (*edit)(json&)) {
  json j = json::parse(slurp(path));
  edit(j);
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

serialize::ModelFile random_event_model_file(rng::Engine& g) {
  serialize::ModelFile file;
  file.model_type = "ebhmm";
  const int n = 3 + static_cast<int>(rng::uniform_index(g, 2));
  for (int i = 0; i < n; ++i) {
    file.feature_names.push_back("feat_" + std::to_string(i));
    file.feature_directions.push_back(rng::uniform(g) < 0.5 ? Direction::Increasing
                                                            : Direction::Decreasing);
  }
  file.event_model.sequence = gen::random_sequence(g, n);
  file.event_model.transition = gen::monotone_model(g, n + 1, 2, gen::uniform_in(g, 1.0, 24.0));
  file.event_model.mixtures = gen::random_mixtures(g, n);
  for (auto& pair : file.event_model.mixtures) {
    pair.em_converged = rng::uniform(g) < 0.5;
  }
  auto& d = file.event_model.diagnostics;
  d.log_likelihood_trace = {-1e300, gen::uniform_in(g, -1e4, 0.0), -3.25e-17};
  d.iterations = 7;
  d.converged = rng::uniform(g) < 0.5;
  d.notes = {"first note", "second, with comma"};
  file.meta.config_hash = "00ff00ff00ff00ff";
  file.meta.seed = g();
  return file;
}

bool gaussians_equal(const mixture::GaussianParams& a, const mixture::GaussianParams& b) {
  return a.mu == b.mu && a.sigma == b.sigma && a.weight == b.weight;
}

bool mixtures_equal(const std::vector<mixture::MixturePair>& a,
                    const std::vector<mixture::MixturePair>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].feature_index != b[i].feature_index) return false;
    if (a[i].em_converged != b[i].em_converged) return false;
    if (!gaussians_equal(a[i].patient, b[i].patient)) return false;
    if (!gaussians_equal(a[i].control, b[i].control)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("event models round-trip bit-exactly through their files") {
  gen::TempDir dir;
  auto g = rng::derived_engine(0x5E1, 0);
  for (int iter = 0; iter < 100; ++iter) {
    INFO("iter=", iter);
    const serialize::ModelFile file = random_event_model_file(g);
    const std::string path = dir.file("model.json");
    serialize::save_model(file, path);
    const serialize::ModelFile loaded = serialize::load_model(path);

    CHECK(loaded.model_type == "ebhmm");
    CHECK(loaded.feature_names == file.feature_names);
    CHECK(loaded.feature_directions == file.feature_directions);
    CHECK(loaded.meta.config_hash == file.meta.config_hash);
    CHECK(loaded.meta.seed == file.meta.seed);

    const auto& a = file.event_model;
    const auto& b = loaded.event_model;
    CHECK(a.sequence == b.sequence);
    CHECK(a.transition.pi == b.transition.pi);
    CHECK(a.transition.trans == b.transition.trans);
    CHECK(a.transition.base_interval_months == b.transition.base_interval_months);
    CHECK(mixtures_equal(a.mixtures, b.mixtures));
    CHECK(a.diagnostics.log_likelihood_trace == b.diagnostics.log_likelihood_trace);
    CHECK(a.diagnostics.iterations == b.diagnostics.iterations);
    CHECK(a.diagnostics.converged == b.diagnostics.converged);
    CHECK(a.diagnostics.notes == b.diagnostics.notes);
  }
}

TEST_CASE("state models round-trip with either covariance kind") {
  gen::TempDir dir;
  auto g = rng::derived_engine(0x5E2, 0);

  serialize::ModelFile file;
  file.model_type = "cthmm";
  file.feature_names = {"hippo", "abeta"};
  file.feature_directions = {Direction::Decreasing, Direction::Increasing};
  auto& m = file.cthmm_model;
  m.pi = gen::prob_vector(g, 3);
  m.trans = gen::stochastic_matrix(g, 3);
  m.emission_means = Matrix::Random(3, 2);
  m.base_interval_months = 6.0;
  m.band_width = 1;
  m.diagnostics.iterations = 12;
  m.diagnostics.converged = true;
  m.diagnostics.log_likelihood_trace = {-5.0, -4.5};
  file.meta.config_hash = "deadbeefdeadbeef";
  file.meta.seed = 17;

  SUBCASE("shared full covariance") {
    m.cov_kind = baseline::CovarianceKind::SharedFull;
    Matrix c = Matrix::Random(2, 2);
    m.shared_cov = c * c.transpose() + Matrix::Identity(2, 2);
    m.state_variances = Matrix::Zero(3, 2);
    const std::string path = dir.file("ct_full.json");
    serialize::save_model(file, path);
    const serialize::ModelFile loaded = serialize::load_model(path);
    const auto& l = loaded.cthmm_model;
    CHECK(loaded.model_type == "cthmm");
    CHECK(l.pi == m.pi);
    CHECK(l.trans == m.trans);
    CHECK(l.emission_means == m.emission_means);
    CHECK(l.shared_cov == m.shared_cov);
    CHECK(l.cov_kind == baseline::CovarianceKind::SharedFull);
    CHECK(l.band_width == 1);
    CHECK(l.base_interval_months == 6.0);
    // Diagonal variances are derived from the shared covariance on load.
    for (Index s = 0; s < 3; ++s) {
      CHECK(l.state_variances(s, 0) == m.shared_cov(0, 0));
      CHECK(l.state_variances(s, 1) == m.shared_cov(1, 1));
    }
    CHECK(l.diagnostics.log_likelihood_trace == m.diagnostics.log_likelihood_trace);
  }

  SUBCASE("per-state diagonal variances") {
    m.cov_kind = baseline::CovarianceKind::PerStateDiagonal;
    m.state_variances = (Matrix::Random(3, 2).array().abs() + 0.5).matrix();
    m.shared_cov = Matrix::Identity(2, 2);
    const std::string path = dir.file("ct_diag.json");
    serialize::save_model(file, path);
    const serialize::ModelFile loaded = serialize::load_model(path);
    const auto& l = loaded.cthmm_model;
    CHECK(l.cov_kind == baseline::CovarianceKind::PerStateDiagonal);
    CHECK(l.state_variances == m.state_variances);
    CHECK(l.shared_cov == Matrix::Zero(2, 2));
  }
}

TEST_CASE("ground truths round-trip exactly") {
  gen::TempDir dir;
  synth::GroundTruth truth = synth::default_truth(4, 2.5, 6.0);
  truth.sequence = EventSequence(std::vector<int>{2, 0, 3, 1});
  truth.label_rule = {1, 3};

  const std::string path = dir.file("truth.json");
  serialize::save_truth(truth, {"0123456789abcdef", 99}, path);
  const synth::GroundTruth loaded = serialize::load_truth(path);

  CHECK(loaded.sequence == truth.sequence);
  CHECK(loaded.transition.pi == truth.transition.pi);
  CHECK(loaded.transition.trans == truth.transition.trans);
  CHECK(loaded.transition.base_interval_months == 6.0);
  CHECK(mixtures_equal(loaded.mixtures, truth.mixtures));
  CHECK(loaded.label_rule.cn_max_stage == 1);
  CHECK(loaded.label_rule.mci_max_stage == 3);
  CHECK(loaded.feature_names == truth.feature_names);
  CHECK(loaded.feature_directions == truth.feature_directions);
  CHECK_NOTHROW(synth::validate_truth(loaded));
}

TEST_CASE("model loading rejects damaged documents") {
  gen::TempDir dir;
  auto g = rng::derived_engine(0x5E3, 0);
  const serialize::ModelFile file = random_event_model_file(g);
  const std::string path = dir.file("model.json");

  SUBCASE("missing file") { CHECK_THROWS_AS(serialize::load_model(dir.file("no.json")), IoError); }
  SUBCASE("unparseable JSON") {
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(serialize::load_model(path), FormatError);
  }
  SUBCASE("missing format version") {
    serialize::save_model(file, path);
    patch_json_file(path, [](json& j) { j.erase("format_version"); });
    CHECK_THROWS_AS(serialize::load_model(path), SchemaError);
  }
  SUBCASE("unsupported format version") {
    serialize::save_model(file, path);
    patch_json_file(path, [](json& j) { j["format_version"] = 2; });
    CHECK_THROWS_AS(serialize::load_model(path), SchemaError);
  }
  SUBCASE("unknown model type") {
    serialize::save_model(file, path);
    patch_json_file(path, [](json& j) { j["model_type"] = "gp"; });
    CHECK_THROWS_AS(serialize::load_model(path), SchemaError);
  }
  SUBCASE("missing field") {
    serialize::save_model(file, path);
    patch_json_file(path, [](json& j) { j.erase("pi"); });
    CHECK_THROWS_AS(serialize::load_model(path), SchemaError);
  }
  SUBCASE("ragged transition matrix") {
    serialize::save_model(file, path);
    patch_json_file(path, [](json& j) { j["transition"][1].erase(0); });
    CHECK_THROWS_AS(serialize::load_model(path), SchemaError);
  }
  SUBCASE("sequence referencing an unknown feature") {
    serialize::save_model(file, path);
    patch_json_file(path, [](json& j) { j["sequence"][0] = "mystery"; });
    CHECK_THROWS_AS(serialize::load_model(path), SchemaError);
  }
  SUBCASE("mixture referencing an unknown feature") {
    serialize::save_model(file, path);
    patch_json_file(path, [](json& j) { j["mixtures"][0]["feature"] = "mystery"; });
    CHECK_THROWS_AS(serialize::load_model(path), SchemaError);
  }
  SUBCASE("saving an unknown model type") {
    serialize::ModelFile bad = file;
    bad.model_type = "gp";
    CHECK_THROWS_AS(serialize::save_model(bad, path), ArgumentError);
  }
  SUBCASE("a model file is not a ground truth") {
    serialize::save_model(file, path);
    CHECK_THROWS_AS(serialize::load_truth(path), SchemaError);
  }
}

TEST_CASE("timeline files carry names, times and provenance") {
  gen::TempDir dir;
  markov::Timeline timeline;
  timeline.sojourns = (Vector(3) << 24.0, 18.0,
                       std::numeric_limits<Scalar>::infinity()).finished();
  timeline.event_times = (Vector(2) << 24.0, 42.0).finished();
  const std::vector<std::string> names = {"amyloid", "tau"};
  const serialize::ArtifactMeta meta{"abcdefabcdefabcd", 7};

  SUBCASE("csv layout is exact") {
    const std::string path = dir.file("timeline.csv");
    serialize::save_timeline_csv(timeline, names, meta, path);
    CHECK(slurp(path) ==
          "# config_hash=abcdefabcdefabcd seed=7\n"
          "event_name,event_time_months\n"
          "amyloid,24\n"
          "tau,42\n");
  }

  SUBCASE("json mirrors the same content") {
    const std::string path = dir.file("timeline.json");
    serialize::save_timeline_json(timeline, names, meta, path);
    const json j = json::parse(slurp(path));
    CHECK(j.at("format_version") == serialize::kFormatVersion);
    CHECK(j.at("config_hash") == "abcdefabcdefabcd");
    CHECK(j.at("seed") == 7);
    REQUIRE(j.at("events").size() == 2);
    CHECK(j["events"][0]["name"] == "amyloid");
    CHECK(j["events"][0]["event_time_months"] == 24.0);
    CHECK(j["events"][0]["stage_sojourn_months"] == 24.0);
    CHECK(j["events"][1]["name"] == "tau");
    CHECK(j["events"][1]["event_time_months"] == 42.0);
    CHECK(j.at("total_span_months") == 42.0);
  }

  SUBCASE("name count must match events") {
    CHECK_THROWS_AS(
        serialize::save_timeline_csv(timeline, {"amyloid"}, meta, dir.file("t.csv")),
        ArgumentError);
    CHECK_THROWS_AS(
        serialize::save_timeline_json(timeline, {"a", "b", "c"}, meta, dir.file("t.json")),
        ArgumentError);
  }
}

TEST_CASE("staging and prediction tables serialise exactly") {
  gen::TempDir dir;
  const serialize::ArtifactMeta meta{"1111222233334444", 21};

  SUBCASE("staging csv") {
    const std::vector<serialize::StagingRow> rows = {
        {"S1", 0.0, 2, 0.875, 3},
        {"S1", 12.5, 3, 0.5, 3},
        {"S2", 0.0, 0, 1.0, 0},
    };
    const std::string path = dir.file("staging.csv");
    serialize::save_staging_csv(rows, meta, path);
    CHECK(slurp(path) ==
          "# config_hash=1111222233334444 seed=21\n"
          "subject_id,visit_time,stage,max_posterior,predicted_stage_12m\n"
          "S1,0,2,0.875,3\n"
          "S1,12.5,3,0.5,3\n"
          "S2,0,0,1,0\n");
  }

  SUBCASE("prediction csv") {
    std::vector<serialize::PredictionRow> rows(2);
    rows[0].subject_id = "S1";
    rows[0].predicted_stage = 2;
    rows[0].distribution = (Vector(3) << 0.25, 0.25, 0.5).finished();
    rows[1].subject_id = "S2";
    rows[1].predicted_stage = 0;
    rows[1].distribution = (Vector(3) << 1.0, 0.0, 0.0).finished();
    const std::string path = dir.file("prediction.csv");
    serialize::save_prediction_csv(rows, 24.0, meta, path);
    CHECK(slurp(path) ==
          "# config_hash=1111222233334444 seed=21\n"
          "# horizon_months=24\n"
          "subject_id,predicted_stage,p_stage_0,p_stage_1,p_stage_2\n"
          "S1,2,0.25,0.25,0.5\n"
          "S2,0,1,0,0\n");
  }

  SUBCASE("empty prediction table still writes its header") {
    const std::string path = dir.file("empty.csv");
    serialize::save_prediction_csv({}, 12.0, meta, path);
    CHECK(slurp(path) ==
          "# config_hash=1111222233334444 seed=21\n"
          "# horizon_months=12\n"
          "subject_id,predicted_stage\n");
  }
}
