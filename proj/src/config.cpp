#include "ebhmm/config.hpp"

#include <fstream>
#include <sstream>

#include "ebhmm/errors.hpp"
#include "ebhmm/text.hpp"

namespace ebhmm::config {

namespace {

void check(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

void apply_key_value(RunConfig& rc, const std::string& key, const std::string& value,
                     const std::string& locus) {
  const std::string at = locus + " key '" + key + "'";
  if (key == "base_interval_months") {
    rc.base_interval_months = text::parse_double(value, at);
  } else if (key == "band_width") {
    rc.band_width = static_cast<int>(text::parse_long(value, at));
  } else if (key == "max_outer_iter") {
    rc.max_outer_iter = static_cast<int>(text::parse_long(value, at));
  } else if (key == "random_restarts") {
    rc.random_restarts = static_cast<int>(text::parse_long(value, at));
  } else if (key == "seed") {
    rc.seed = text::parse_uint64(value, at);
  } else if (key == "threads") {
    rc.threads = static_cast<int>(text::parse_long(value, at));
  } else if (key == "mixture_max_iter") {
    rc.mixture_max_iter = static_cast<int>(text::parse_long(value, at));
  } else if (key == "mixture_tol") {
    rc.mixture_tol = text::parse_double(value, at);
  } else if (key == "mixture_mean_drift_sds") {
    rc.mixture_mean_drift_sds = text::parse_double(value, at);
  } else if (key == "mixture_min_group_size") {
    rc.mixture_min_group_size = static_cast<int>(text::parse_long(value, at));
  } else if (key == "cthmm_states") {
    rc.cthmm_states = static_cast<int>(text::parse_long(value, at));
  } else if (key == "cthmm_covariance") {
    baseline::covariance_kind_from_string(value);  // reject unknown values early
    rc.cthmm_covariance = value;
  } else if (key == "cthmm_tol") {
    rc.cthmm_tol = text::parse_double(value, at);
  } else if (key == "cthmm_max_iter") {
    rc.cthmm_max_iter = static_cast<int>(text::parse_long(value, at));
  } else if (key == "horizon_months") {
    rc.horizon_months = text::parse_double(value, at);
  } else if (key == "k_folds") {
    rc.k_folds = static_cast<int>(text::parse_long(value, at));
  } else if (key == "data_mode") {
    eval::data_mode_from_string(value);
    rc.data_mode = value;
  } else if (key == "stratify_folds") {
    if (value == "true") {
      rc.stratify_folds = true;
    } else if (value == "false") {
      rc.stratify_folds = false;
    } else {
      throw FormatError("expected true or false at " + at);
    }
  } else if (key == "patient_label") {
    diagnosis_from_string(value);
    rc.patient_label = value;
  } else if (key == "control_label") {
    diagnosis_from_string(value);
    rc.control_label = value;
  } else {
    throw SchemaError("unknown configuration key '" + key + "' at " + locus);
  }
}

void apply_config_file(RunConfig& rc, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = text::trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const auto eq = stripped.find('=');
    const std::string locus = path + ":" + std::to_string(line_no);
    if (eq == std::string::npos) {
      throw FormatError("expected key=value at " + locus);
    }
    apply_key_value(rc, text::trim(stripped.substr(0, eq)), text::trim(stripped.substr(eq + 1)),
                    locus);
  }
}

void validate(const RunConfig& rc) {
  check(rc.base_interval_months > 0.0, "base_interval_months must be positive");
  check(rc.band_width >= 1, "band_width must be at least 1");
  check(rc.max_outer_iter >= 1, "max_outer_iter must be at least 1");
  check(rc.random_restarts >= 1, "random_restarts must be at least 1");
  check(rc.threads >= 0, "threads must be nonnegative");
  check(rc.mixture_max_iter >= 1, "mixture_max_iter must be at least 1");
  check(rc.mixture_tol > 0.0, "mixture_tol must be positive");
  check(rc.mixture_mean_drift_sds > 0.0, "mixture_mean_drift_sds must be positive");
  check(rc.mixture_min_group_size >= 2, "mixture_min_group_size must be at least 2");
  check(rc.cthmm_states == 0 || rc.cthmm_states >= 2,
        "cthmm_states must be 0 (automatic) or at least 2");
  check(rc.cthmm_tol > 0.0, "cthmm_tol must be positive");
  check(rc.cthmm_max_iter >= 1, "cthmm_max_iter must be at least 1");
  check(rc.horizon_months > 0.0, "horizon_months must be positive");
  check(rc.k_folds >= 2, "k_folds must be at least 2");
  check(rc.patient_label != rc.control_label,
        "patient_label and control_label must differ");
}

std::string canonical_string(const RunConfig& rc) {
  std::ostringstream out;
  out << "base_interval_months=" << text::format_double(rc.base_interval_months) << '\n'
      << "band_width=" << rc.band_width << '\n'
      << "max_outer_iter=" << rc.max_outer_iter << '\n'
      << "random_restarts=" << rc.random_restarts << '\n'
      << "seed=" << rc.seed << '\n'
      << "threads=" << rc.threads << '\n'
      << "mixture_max_iter=" << rc.mixture_max_iter << '\n'
      << "mixture_tol=" << text::format_double(rc.mixture_tol) << '\n'
      << "mixture_mean_drift_sds=" << text::format_double(rc.mixture_mean_drift_sds) << '\n'
      << "mixture_min_group_size=" << rc.mixture_min_group_size << '\n'
      << "cthmm_states=" << rc.cthmm_states << '\n'
      << "cthmm_covariance=" << rc.cthmm_covariance << '\n'
      << "cthmm_tol=" << text::format_double(rc.cthmm_tol) << '\n'
      << "cthmm_max_iter=" << rc.cthmm_max_iter << '\n'
      << "horizon_months=" << text::format_double(rc.horizon_months) << '\n'
      << "k_folds=" << rc.k_folds << '\n'
      << "data_mode=" << rc.data_mode << '\n'
      << "stratify_folds=" << (rc.stratify_folds ? "true" : "false") << '\n'
      << "patient_label=" << rc.patient_label << '\n'
      << "control_label=" << rc.control_label << '\n';
  return out.str();
}

std::uint64_t hash(const RunConfig& rc) { return text::fnv1a(canonical_string(rc)); }

inference::FitConfig fit_config(const RunConfig& rc) {
  inference::FitConfig fc;
  fc.base_interval_months = rc.base_interval_months;
  fc.band_width = rc.band_width;
  fc.max_outer_iter = rc.max_outer_iter;
  fc.random_restarts = rc.random_restarts;
  fc.seed = rc.seed;
  fc.threads = rc.threads;
  fc.patient_label = diagnosis_from_string(rc.patient_label);
  return fc;
}

mixture::MixtureConfig mixture_config(const RunConfig& rc) {
  mixture::MixtureConfig mc;
  mc.max_iter = rc.mixture_max_iter;
  mc.tol = rc.mixture_tol;
  mc.mean_drift_limit_sds = rc.mixture_mean_drift_sds;
  mc.min_group_size = rc.mixture_min_group_size;
  return mc;
}

baseline::CthmmConfig cthmm_config(const RunConfig& rc) {
  baseline::CthmmConfig cc;
  cc.n_states = rc.cthmm_states;
  cc.cov_kind = baseline::covariance_kind_from_string(rc.cthmm_covariance);
  cc.conv_tol = rc.cthmm_tol;
  cc.max_iter = rc.cthmm_max_iter;
  cc.seed = rc.seed;
  cc.base_interval_months = rc.base_interval_months;
  cc.band_width = rc.band_width;
  cc.threads = rc.threads;
  return cc;
}

eval::EvalConfig eval_config(const RunConfig& rc) {
  eval::EvalConfig ec;
  ec.data_mode = eval::data_mode_from_string(rc.data_mode);
  ec.k_folds = rc.k_folds;
  ec.horizon_months = rc.horizon_months;
  ec.seed = rc.seed;
  ec.threads = rc.threads;
  ec.stratify_folds = rc.stratify_folds;
  ec.patient_label = diagnosis_from_string(rc.patient_label);
  ec.control_label = diagnosis_from_string(rc.control_label);
  ec.fit = fit_config(rc);
  ec.mixture = mixture_config(rc);
  ec.cthmm = cthmm_config(rc);
  return ec;
}

}  // namespace ebhmm::config
