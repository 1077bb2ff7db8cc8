#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ebhmm/baseline.hpp"
#include "ebhmm/cohort.hpp"
#include "ebhmm/config.hpp"
#include "ebhmm/errors.hpp"
#include "ebhmm/eval.hpp"
#include "ebhmm/inference.hpp"
#include "ebhmm/markov.hpp"
#include "ebhmm/mixture.hpp"
#include "ebhmm/serialize.hpp"
#include "ebhmm/staging.hpp"
#include "ebhmm/synth.hpp"
#include "ebhmm/text.hpp"

namespace {

using namespace ebhmm;
using nlohmann::json;

struct CommonOpts {
  std::string config_path;
  std::vector<std::string> sets;
  std::uint64_t seed = 0;
  int threads = 0;
  bool seed_given = false;
  bool threads_given = false;
};

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--config", c.config_path, "key=value configuration file");
  sub->add_option("--set", c.sets, "override one configuration key (key=value, repeatable)");
  sub->add_option("--seed", c.seed, "random seed")->each([&c](const std::string&) {
    c.seed_given = true;
  });
  sub->add_option("--threads", c.threads, "worker threads (0 = all cores)")
      ->each([&c](const std::string&) { c.threads_given = true; });
}

config::RunConfig resolve_config(const CommonOpts& c) {
  config::RunConfig rc;
  if (!c.config_path.empty()) config::apply_config_file(rc, c.config_path);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ArgumentError("--set expects key=value, got '" + kv + "'");
    config::apply_key_value(rc, kv.substr(0, eq), kv.substr(eq + 1), "--set");
  }
  if (c.seed_given) rc.seed = c.seed;
  if (c.threads_given) rc.threads = c.threads;
  config::validate(rc);
  return rc;
}

serialize::ArtifactMeta make_meta(const config::RunConfig& rc, const std::string& extras) {
  serialize::ArtifactMeta meta;
  meta.seed = rc.seed;
  meta.config_hash = text::hex64(text::fnv1a(config::canonical_string(rc) + extras));
  return meta;
}

CohortFormat detect_format(const std::string& path, const std::string& requested) {
  if (requested == "csv") return CohortFormat::Csv;
  if (requested == "json") return CohortFormat::Json;
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return CohortFormat::Json;
  return CohortFormat::Csv;
}

std::vector<Scalar> parse_number_list(const std::string& csv, const std::string& what) {
  std::vector<Scalar> out;
  std::string item;
  std::stringstream ss(csv);
  while (std::getline(ss, item, ',')) {
    out.push_back(text::parse_double(text::trim(item), what));
  }
  if (out.empty()) throw ArgumentError(what + ": empty list");
  return out;
}

void require_matching_features(const Cohort& cohort, const std::vector<std::string>& names) {
  if (cohort.feature_names != names) {
    throw ValidationError("cohort features do not match the model's feature panel");
  }
}

int argmax_low_tie(const Vector& v) {
  int best = 0;
  for (Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = static_cast<int>(i);
  }
  return best;
}

// Stage distribution 12 months past a visit, from its smoothed posterior row.
int predicted_stage_12m(const Vector& gamma_row, const markov::TransitionModel& dyn) {
  Vector next = (gamma_row.transpose() * markov::transition_over_interval(dyn, 12.0)).transpose();
  const Scalar total = next.sum();
  if (total > 0.0) next /= total;
  return argmax_low_tie(next);
}

std::string format_auc(Scalar mean, Scalar sd) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f +/- %.3f", mean, sd);
  return buf;
}

// ---- subcommand payloads ------------------------------------------------

struct FitOpts {
  CommonOpts common;
  std::string cohort_path;
  std::string format = "auto";
  std::string out_path = "model.json";
  std::string model_kind = "ebhmm";
  std::string truth_path;  // optional: score sequence recovery
};

void run_fit(const FitOpts& opt) {
  const config::RunConfig rc = resolve_config(opt.common);
  const Cohort cohort = load_cohort(opt.cohort_path, detect_format(opt.cohort_path, opt.format));
  const auto meta = make_meta(rc, "command=fit\nmodel=" + opt.model_kind + "\n");

  serialize::ModelFile file;
  file.model_type = opt.model_kind;
  file.feature_names = cohort.feature_names;
  file.feature_directions = cohort.feature_directions;
  file.meta = meta;

  if (opt.model_kind == "ebhmm") {
    const auto mixtures =
        mixture::fit_mixtures(cohort, diagnosis_from_string(rc.patient_label),
                              diagnosis_from_string(rc.control_label), config::mixture_config(rc));
    file.event_model = inference::fit(cohort, mixtures, config::fit_config(rc));
    const auto& m = file.event_model;
    std::cout << "sequence:";
    for (int p = 0; p < m.sequence.size(); ++p) {
      std::cout << (p == 0 ? " " : " -> ")
                << cohort.feature_names[static_cast<std::size_t>(m.sequence.feature_at(p))];
    }
    std::cout << '\n';
    std::cout << "log_likelihood: "
              << text::format_double(m.diagnostics.log_likelihood_trace.back()) << '\n';
    std::cout << "sweeps: " << m.diagnostics.iterations
              << (m.diagnostics.converged ? " (converged)" : " (iteration cap)") << '\n';
    if (!opt.truth_path.empty()) {
      const auto truth = serialize::load_truth(opt.truth_path);
      std::vector<int> truth_order;
      for (int p = 0; p < truth.sequence.size(); ++p) {
        const auto name = truth.feature_names[static_cast<std::size_t>(truth.sequence.feature_at(p))];
        const Index idx = cohort.feature_index(name);
        if (idx < 0) throw ValidationError("truth feature '" + name + "' absent from cohort");
        truth_order.push_back(static_cast<int>(idx));
      }
      const EventSequence truth_seq{truth_order};
      std::cout << "kendall_tau: "
                << text::format_double(eval::kendall_tau(m.sequence, truth_seq)) << '\n';
      std::cout << "sequence_exact_match: " << (m.sequence == truth_seq ? "true" : "false")
                << '\n';
    }
  } else if (opt.model_kind == "cthmm") {
    baseline::CthmmConfig cc = config::cthmm_config(rc);
    file.cthmm_model = baseline::fit_cthmm(cohort, cc.n_states, cc);
    const auto& m = file.cthmm_model;
    std::cout << "states: " << m.n_states() << '\n';
    std::cout << "log_likelihood: "
              << text::format_double(m.diagnostics.log_likelihood_trace.back()) << '\n';
    std::cout << "iterations: " << m.diagnostics.iterations
              << (m.diagnostics.converged ? " (converged)" : " (iteration cap)") << '\n';
  } else {
    throw ArgumentError("unknown model kind '" + opt.model_kind + "'");
  }

  serialize::save_model(file, opt.out_path);
  std::cout << "model written to " << opt.out_path << '\n';
}

struct StageOpts {
  CommonOpts common;
  std::string cohort_path;
  std::string format = "auto";
  std::string model_path;
  std::string out_path = "staging.csv";
};

void run_stage(const StageOpts& opt) {
  const config::RunConfig rc = resolve_config(opt.common);
  const Cohort cohort = load_cohort(opt.cohort_path, detect_format(opt.cohort_path, opt.format));
  const serialize::ModelFile file = serialize::load_model(opt.model_path);
  require_matching_features(cohort, file.feature_names);
  const auto meta = make_meta(rc, "command=stage\nmodel_file=" + file.meta.config_hash + "\n");

  std::vector<serialize::StagingRow> rows;
  for (const auto& ind : cohort.individuals) {
    staging::StagePath path;
    markov::TransitionModel dyn;
    if (file.model_type == "ebhmm") {
      path = staging::viterbi_stage(ind, file.event_model);
      dyn = file.event_model.transition;
    } else {
      path = baseline::stage_cthmm(ind, file.cthmm_model);
      dyn = markov::TransitionModel{file.cthmm_model.pi, file.cthmm_model.trans,
                                    file.cthmm_model.base_interval_months};
    }
    for (std::size_t t = 0; t < ind.observations.size(); ++t) {
      const Vector gamma_row = path.posterior_by_visit.row(static_cast<Index>(t)).transpose();
      rows.push_back({ind.id, ind.observations[t].visit_time, path.stages[t],
                      gamma_row.maxCoeff(), predicted_stage_12m(gamma_row, dyn)});
    }
  }
  serialize::save_staging_csv(rows, meta, opt.out_path);
  std::cout << "staged " << cohort.n_individuals() << " individuals to " << opt.out_path << '\n';
}

struct PredictOpts {
  CommonOpts common;
  std::string cohort_path;
  std::string format = "auto";
  std::string model_path;
  std::string out_path = "predictions.csv";
  Scalar horizon = -1.0;  // <0: use configured horizon_months
};

void run_predict(const PredictOpts& opt) {
  const config::RunConfig rc = resolve_config(opt.common);
  const Scalar horizon = opt.horizon > 0.0 ? opt.horizon : rc.horizon_months;
  const Cohort cohort = load_cohort(opt.cohort_path, detect_format(opt.cohort_path, opt.format));
  const serialize::ModelFile file = serialize::load_model(opt.model_path);
  if (file.model_type != "ebhmm") {
    throw ValidationError("predict requires an event-based model file");
  }
  require_matching_features(cohort, file.feature_names);
  const auto meta = make_meta(
      rc, "command=predict\nhorizon=" + text::format_double(horizon) + "\n");

  std::vector<serialize::PredictionRow> rows;
  for (const auto& ind : cohort.individuals) {
    const auto prediction = staging::predict_next_stage(ind, file.event_model, horizon);
    rows.push_back({ind.id, prediction.stage, prediction.distribution});
  }
  serialize::save_prediction_csv(rows, horizon, meta, opt.out_path);
  std::cout << "predicted " << cohort.n_individuals() << " individuals at +"
            << text::format_double(horizon) << " months to " << opt.out_path << '\n';
}

struct TimelineOpts {
  CommonOpts common;
  std::string model_path;
  std::string out_path = "timeline.csv";
  std::string json_out;
};

void run_timeline(const TimelineOpts& opt) {
  const config::RunConfig rc = resolve_config(opt.common);
  const serialize::ModelFile file = serialize::load_model(opt.model_path);
  if (file.model_type != "ebhmm") {
    throw ValidationError("timeline requires an event-based model file");
  }
  const auto& m = file.event_model;
  const markov::Timeline timeline = markov::event_timeline(m.transition, m.sequence);
  std::vector<std::string> names;
  for (int p = 0; p < m.sequence.size(); ++p) {
    names.push_back(file.feature_names[static_cast<std::size_t>(m.sequence.feature_at(p))]);
  }
  const auto meta = make_meta(rc, "command=timeline\n");
  serialize::save_timeline_csv(timeline, names, meta, opt.out_path);
  if (!opt.json_out.empty()) serialize::save_timeline_json(timeline, names, meta, opt.json_out);

  const Scalar span = timeline.event_times[timeline.event_times.size() - 1];
  std::cout << "events: " << names.size() << ", total span " << text::format_double(span)
            << " months (" << text::format_double(span / 12.0) << " years)\n";
  std::cout << "timeline written to " << opt.out_path << '\n';
}

struct SimulateOpts {
  CommonOpts common;
  std::string truth_path;   // optional input truth
  int features = 6;
  Scalar separation = 3.0;
  long n = 300;
  std::string schedule = "0,12,24,36";
  Scalar missing = 0.0;
  std::string out_path = "cohort.csv";
  std::string format = "auto";
  std::string truth_out;
  std::string stages_out;
};

void run_simulate(const SimulateOpts& opt) {
  const config::RunConfig rc = resolve_config(opt.common);
  synth::GroundTruth truth;
  if (!opt.truth_path.empty()) {
    truth = serialize::load_truth(opt.truth_path);
  } else {
    truth = synth::default_truth(opt.features, opt.separation, rc.base_interval_months);
  }
  const auto schedule = parse_number_list(opt.schedule, "--schedule");
  const auto sampled =
      synth::sample_cohort_with_stages(truth, opt.n, schedule, opt.missing, rc.seed);
  save_cohort(sampled.cohort, opt.out_path, detect_format(opt.out_path, opt.format));

  const auto meta = make_meta(rc, "command=simulate\n");
  const std::string truth_out =
      opt.truth_out.empty() ? opt.out_path + ".truth.json" : opt.truth_out;
  serialize::save_truth(truth, meta, truth_out);

  if (!opt.stages_out.empty()) {
    std::ofstream out(opt.stages_out);
    if (!out) throw IoError("cannot open " + opt.stages_out + " for writing");
    out << "# config_hash=" << meta.config_hash << " seed=" << meta.seed << '\n';
    out << "subject_id,visit_time,true_stage\n";
    for (std::size_t j = 0; j < sampled.cohort.individuals.size(); ++j) {
      const auto& ind = sampled.cohort.individuals[j];
      for (std::size_t t = 0; t < ind.observations.size(); ++t) {
        out << ind.id << ',' << text::format_double(ind.observations[t].visit_time) << ','
            << sampled.true_stages[j][t] << '\n';
      }
    }
  }
  std::cout << "simulated " << sampled.cohort.n_individuals() << " individuals, "
            << schedule.size() << " visits each, " << truth.feature_names.size()
            << " features\n";
  std::cout << "cohort written to " << opt.out_path << ", truth to " << truth_out << '\n';
}

struct EvaluateOpts {
  CommonOpts common;
  std::string cohort_path;
  std::string format = "auto";
  std::string model_kind = "ebhmm";  // ebhmm | cthmm | both
  std::string data_mode;             // full | subset | both; empty = configured
  std::string out_path;
};

void run_evaluate(const EvaluateOpts& opt) {
  const config::RunConfig rc = resolve_config(opt.common);
  const Cohort cohort = load_cohort(opt.cohort_path, detect_format(opt.cohort_path, opt.format));

  std::vector<std::string> kinds;
  if (opt.model_kind == "both") {
    kinds = {"ebhmm", "cthmm"};
  } else {
    kinds = {opt.model_kind};
  }
  std::vector<std::string> modes;
  const std::string mode = opt.data_mode.empty() ? rc.data_mode : opt.data_mode;
  if (mode == "both") {
    modes = {"full", "subset"};
  } else {
    modes = {mode};
  }

  const auto meta = make_meta(rc, "command=evaluate\nmodel=" + opt.model_kind +
                                      "\nmode=" + mode + "\n");
  json report;
  report["format_version"] = serialize::kFormatVersion;
  report["config_hash"] = meta.config_hash;
  report["seed"] = meta.seed;
  report["horizon_months"] = rc.horizon_months;
  report["k_folds"] = rc.k_folds;
  report["results"] = json::array();

  std::printf("%-8s %-8s %s\n", "model", "data", "auroc (mean +/- sd over folds)");
  for (const auto& kind : kinds) {
    for (const auto& m : modes) {
      eval::EvalConfig ec = config::eval_config(rc);
      ec.model_kind = eval::model_kind_from_string(kind);
      ec.data_mode = eval::data_mode_from_string(m);
      const eval::CvResult cv = eval::cross_validated_auroc(cohort, ec);
      std::printf("%-8s %-8s %s\n", kind.c_str(), m.c_str(),
                  format_auc(cv.mean_auc, cv.sd_auc).c_str());
      json entry;
      entry["model"] = kind;
      entry["data"] = m;
      entry["mean_auc"] = cv.mean_auc;
      entry["sd_auc"] = cv.sd_auc;
      entry["fold_aucs"] = cv.fold_aucs;
      entry["n_folds_requested"] = cv.n_folds_requested;
      entry["notes"] = cv.notes;
      report["results"].push_back(entry);
      for (const auto& note : cv.notes) std::cout << "  note: " << note << '\n';
    }
  }
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path);
    if (!out) throw IoError("cannot open " + opt.out_path + " for writing");
    out << report.dump(2) << '\n';
    std::cout << "report written to " << opt.out_path << '\n';
  }
}

struct AblateOpts {
  CommonOpts common;
  std::string cohort_path;
  std::string format = "auto";
  std::string model_kind = "ebhmm";
  std::string fractions = "0,0.25,0.5,0.75";
  std::string out_path;
};

void run_ablate(const AblateOpts& opt) {
  const config::RunConfig rc = resolve_config(opt.common);
  const Cohort cohort = load_cohort(opt.cohort_path, detect_format(opt.cohort_path, opt.format));
  const auto fractions = parse_number_list(opt.fractions, "--fractions");

  eval::EvalConfig ec = config::eval_config(rc);
  ec.model_kind = eval::model_kind_from_string(opt.model_kind);
  const auto rows = eval::missing_data_sweep(cohort, fractions, ec);

  const auto meta = make_meta(rc, "command=ablate\nmodel=" + opt.model_kind +
                                      "\nfractions=" + opt.fractions + "\n");
  json report;
  report["format_version"] = serialize::kFormatVersion;
  report["config_hash"] = meta.config_hash;
  report["seed"] = meta.seed;
  report["model"] = opt.model_kind;
  report["results"] = json::array();

  std::printf("%-10s %s\n", "discarded", "auroc (mean +/- sd over folds)");
  for (const auto& row : rows) {
    char frac[32];
    std::snprintf(frac, sizeof(frac), "%g%%", row.fraction * 100.0);
    std::printf("%-10s %s\n", frac, format_auc(row.result.mean_auc, row.result.sd_auc).c_str());
    json entry;
    entry["fraction"] = row.fraction;
    entry["mean_auc"] = row.result.mean_auc;
    entry["sd_auc"] = row.result.sd_auc;
    entry["fold_aucs"] = row.result.fold_aucs;
    entry["notes"] = row.result.notes;
    report["results"].push_back(entry);
  }
  if (!opt.out_path.empty()) {
    std::ofstream out(opt.out_path);
    if (!out) throw IoError("cannot open " + opt.out_path + " for writing");
    out << report.dump(2) << '\n';
    std::cout << "report written to " << opt.out_path << '\n';
  }
}

void emit_error(const std::string& type, const std::string& message, int code) {
  json j;
  j["error"] = json{{"type", type}, {"message", message}, {"code", code}};
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-based hidden Markov disease progression model"};
  app.require_subcommand(1);

  FitOpts fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a cohort");
  add_common(fit_cmd, fit_opts.common);
  fit_cmd->add_option("--cohort", fit_opts.cohort_path, "cohort CSV/JSON")->required();
  fit_cmd->add_option("--format", fit_opts.format, "cohort format: csv, json, auto")
      ->check(CLI::IsMember({"csv", "json", "auto"}));
  fit_cmd->add_option("--out", fit_opts.out_path, "output model JSON");
  fit_cmd->add_option("--model-kind", fit_opts.model_kind, "ebhmm or cthmm")
      ->check(CLI::IsMember({"ebhmm", "cthmm"}));
  fit_cmd->add_option("--truth", fit_opts.truth_path,
                      "ground-truth JSON; prints sequence recovery metrics");

  StageOpts stage_opts;
  auto* stage_cmd = app.add_subcommand("stage", "assign per-visit stages");
  add_common(stage_cmd, stage_opts.common);
  stage_cmd->add_option("--cohort", stage_opts.cohort_path, "cohort CSV/JSON")->required();
  stage_cmd->add_option("--format", stage_opts.format, "cohort format")
      ->check(CLI::IsMember({"csv", "json", "auto"}));
  stage_cmd->add_option("--model", stage_opts.model_path, "model JSON")->required();
  stage_cmd->add_option("--out", stage_opts.out_path, "output staging CSV");

  PredictOpts predict_opts;
  auto* predict_cmd = app.add_subcommand("predict", "predict stage distributions ahead");
  add_common(predict_cmd, predict_opts.common);
  predict_cmd->add_option("--cohort", predict_opts.cohort_path, "cohort CSV/JSON")->required();
  predict_cmd->add_option("--format", predict_opts.format, "cohort format")
      ->check(CLI::IsMember({"csv", "json", "auto"}));
  predict_cmd->add_option("--model", predict_opts.model_path, "model JSON")->required();
  predict_cmd->add_option("--out", predict_opts.out_path, "output prediction CSV");
  predict_cmd->add_option("--horizon", predict_opts.horizon, "months ahead");

  TimelineOpts timeline_opts;
  auto* timeline_cmd = app.add_subcommand("timeline", "export the expected event timeline");
  add_common(timeline_cmd, timeline_opts.common);
  timeline_cmd->add_option("--model", timeline_opts.model_path, "model JSON")->required();
  timeline_cmd->add_option("--out", timeline_opts.out_path, "output timeline CSV");
  timeline_cmd->add_option("--json-out", timeline_opts.json_out, "also write timeline JSON");

  SimulateOpts simulate_opts;
  auto* simulate_cmd = app.add_subcommand("simulate", "draw a synthetic cohort");
  add_common(simulate_cmd, simulate_opts.common);
  simulate_cmd->add_option("--truth", simulate_opts.truth_path, "generating truth JSON");
  simulate_cmd->add_option("--features", simulate_opts.features,
                           "feature count for the built-in truth");
  simulate_cmd->add_option("--separation", simulate_opts.separation,
                           "patient/control mean separation in control sd");
  simulate_cmd->add_option("--n", simulate_opts.n, "number of individuals");
  simulate_cmd->add_option("--schedule", simulate_opts.schedule,
                           "visit times in months, comma separated");
  simulate_cmd->add_option("--missing", simulate_opts.missing, "per-cell missingness fraction");
  simulate_cmd->add_option("--out", simulate_opts.out_path, "output cohort CSV/JSON");
  simulate_cmd->add_option("--format", simulate_opts.format, "cohort format")
      ->check(CLI::IsMember({"csv", "json", "auto"}));
  simulate_cmd->add_option("--truth-out", simulate_opts.truth_out, "truth sidecar path");
  simulate_cmd->add_option("--stages-out", simulate_opts.stages_out, "true-stage CSV path");

  EvaluateOpts evaluate_opts;
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "cross-validated conversion prediction accuracy");
  add_common(evaluate_cmd, evaluate_opts.common);
  evaluate_cmd->add_option("--cohort", evaluate_opts.cohort_path, "cohort CSV/JSON")->required();
  evaluate_cmd->add_option("--format", evaluate_opts.format, "cohort format")
      ->check(CLI::IsMember({"csv", "json", "auto"}));
  evaluate_cmd->add_option("--model-kind", evaluate_opts.model_kind, "ebhmm, cthmm, or both")
      ->check(CLI::IsMember({"ebhmm", "cthmm", "both"}));
  evaluate_cmd->add_option("--data-mode", evaluate_opts.data_mode, "full, subset, or both")
      ->check(CLI::IsMember({"full", "subset", "both"}));
  evaluate_cmd->add_option("--out", evaluate_opts.out_path, "write JSON report here");

  AblateOpts ablate_opts;
  auto* ablate_cmd = app.add_subcommand("ablate", "evaluate under increasing missingness");
  add_common(ablate_cmd, ablate_opts.common);
  ablate_cmd->add_option("--cohort", ablate_opts.cohort_path, "cohort CSV/JSON")->required();
  ablate_cmd->add_option("--format", ablate_opts.format, "cohort format")
      ->check(CLI::IsMember({"csv", "json", "auto"}));
  ablate_cmd->add_option("--model-kind", ablate_opts.model_kind, "ebhmm or cthmm")
      ->check(CLI::IsMember({"ebhmm", "cthmm"}));
  ablate_cmd->add_option("--fractions", ablate_opts.fractions,
                         "additional missingness fractions, comma separated");
  ablate_cmd->add_option("--out", ablate_opts.out_path, "write JSON report here");

  try {
    CLI11_PARSE(app, argc, argv);
    if (fit_cmd->parsed()) run_fit(fit_opts);
    if (stage_cmd->parsed()) run_stage(stage_opts);
    if (predict_cmd->parsed()) run_predict(predict_opts);
    if (timeline_cmd->parsed()) run_timeline(timeline_opts);
    if (simulate_cmd->parsed()) run_simulate(simulate_opts);
    if (evaluate_cmd->parsed()) run_evaluate(evaluate_opts);
    if (ablate_cmd->parsed()) run_ablate(ablate_opts);
  } catch (const Error& e) {
    emit_error(e.kind(), e.what(), e.exit_code());
    return e.exit_code();
  } catch (const std::exception& e) {
    emit_error("internal", e.what(), 1);
    return 1;
  }
  return 0;
}
