#include "ebhmm/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "ebhmm/errors.hpp"
#include "ebhmm/inference.hpp"
#include "ebhmm/markov.hpp"
#include "ebhmm/parallel.hpp"
#include "ebhmm/random.hpp"

namespace ebhmm::baseline {

namespace {

constexpr Scalar kLog2Pi = 1.8378770664093453;

using Mask = std::uint64_t;

Mask mask_of(const Observation& obs) {
  Mask m = 0;
  for (Index i = 0; i < obs.missing.size(); ++i) {
    if (!obs.missing[i]) m |= Mask{1} << i;
  }
  return m;
}

std::vector<Index> mask_indices(Mask m, Index n) {
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i) {
    if (m & (Mask{1} << i)) out.push_back(i);
  }
  return out;
}

// Cached per-missingness-pattern factorisation of the shared covariance:
// everything needed for marginal densities and conditional expectations.
struct PatternCache {
  std::vector<Index> observed;
  std::vector<Index> missing;
  Eigen::LLT<Matrix> llt;      // of cov(observed, observed)
  Scalar log_det = 0.0;
  Matrix gain;                 // cov(missing, observed) * cov(obs,obs)^-1
  Matrix cond_cov;             // missing-block conditional covariance
};

std::map<Mask, PatternCache> build_pattern_caches(const std::vector<Mask>& masks,
                                                  const Matrix& cov) {
  const Index n = cov.rows();
  std::map<Mask, PatternCache> caches;
  for (Mask m : masks) {
    if (caches.count(m)) continue;
    PatternCache cache;
    cache.observed = mask_indices(m, n);
    cache.missing = mask_indices(~m, n);
    const auto o = static_cast<Index>(cache.observed.size());
    const auto mi = static_cast<Index>(cache.missing.size());
    if (o > 0) {
      Matrix coo(o, o);
      for (Index a = 0; a < o; ++a) {
        for (Index b = 0; b < o; ++b) {
          coo(a, b) = cov(cache.observed[static_cast<std::size_t>(a)],
                          cache.observed[static_cast<std::size_t>(b)]);
        }
      }
      cache.llt.compute(coo);
      if (cache.llt.info() != Eigen::Success) {
        throw NumericalError("shared covariance is not positive-definite on an observed block");
      }
      cache.log_det = 2.0 * cache.llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
      if (mi > 0) {
        Matrix cmo(mi, o);
        for (Index a = 0; a < mi; ++a) {
          for (Index b = 0; b < o; ++b) {
            cmo(a, b) = cov(cache.missing[static_cast<std::size_t>(a)],
                            cache.observed[static_cast<std::size_t>(b)]);
          }
        }
        cache.gain = cmo * cache.llt.solve(Matrix::Identity(o, o));
        Matrix cmm(mi, mi);
        for (Index a = 0; a < mi; ++a) {
          for (Index b = 0; b < mi; ++b) {
            cmm(a, b) = cov(cache.missing[static_cast<std::size_t>(a)],
                            cache.missing[static_cast<std::size_t>(b)]);
          }
        }
        cache.cond_cov = cmm - cache.gain * cmo.transpose();
      }
    } else {
      cache.gain = Matrix::Zero(mi, 0);
      cache.cond_cov = cov;
    }
    caches.emplace(m, std::move(cache));
  }
  return caches;
}

Scalar marginal_log_density(const Observation& obs, const Vector& mean,
                            const PatternCache& cache) {
  const auto o = static_cast<Index>(cache.observed.size());
  if (o == 0) return 0.0;
  Vector r(o);
  for (Index a = 0; a < o; ++a) {
    const Index d = cache.observed[static_cast<std::size_t>(a)];
    r[a] = obs.values[d] - mean[d];
  }
  const Scalar quad = r.dot(cache.llt.solve(r));
  return -0.5 * (static_cast<Scalar>(o) * kLog2Pi + cache.log_det + quad);
}

Scalar diag_log_density(const Observation& obs, const Vector& mean, const Vector& variances) {
  Scalar ll = 0.0;
  for (Index d = 0; d < obs.values.size(); ++d) {
    if (obs.missing[d]) continue;
    const Scalar v = variances[d];
    const Scalar r = obs.values[d] - mean[d];
    ll += -0.5 * (kLog2Pi + std::log(v) + r * r / v);
  }
  return ll;
}

Matrix log_emissions_for(const std::vector<Observation>& visits, const CthmmModel& model,
                         const std::map<Mask, PatternCache>& caches) {
  const Index n_states = model.n_states();
  Matrix out(static_cast<Index>(visits.size()), n_states);
  for (std::size_t t = 0; t < visits.size(); ++t) {
    for (Index s = 0; s < n_states; ++s) {
      const Vector mean = model.emission_means.row(s).transpose();
      if (model.cov_kind == CovarianceKind::SharedFull) {
        out(static_cast<Index>(t), s) =
            marginal_log_density(visits[t], mean, caches.at(mask_of(visits[t])));
      } else {
        out(static_cast<Index>(t), s) =
            diag_log_density(visits[t], mean, model.state_variances.row(s).transpose());
      }
    }
  }
  return out;
}

// ---- k-means -----------------------------------------------------------

Matrix impute_by_feature_mean(const Cohort& cohort, std::vector<Observation>* all_visits) {
  const Index n = cohort.n_features();
  Vector sums = Vector::Zero(n);
  Vector counts = Vector::Zero(n);
  for (const auto& ind : cohort.individuals) {
    for (const auto& obs : ind.observations) {
      all_visits->push_back(obs);
      for (Index i = 0; i < n; ++i) {
        if (!obs.missing[i]) {
          sums[i] += obs.values[i];
          counts[i] += 1.0;
        }
      }
    }
  }
  Vector means(n);
  for (Index i = 0; i < n; ++i) means[i] = counts[i] > 0.0 ? sums[i] / counts[i] : 0.0;

  Matrix data(static_cast<Index>(all_visits->size()), n);
  for (std::size_t v = 0; v < all_visits->size(); ++v) {
    for (Index i = 0; i < n; ++i) {
      data(static_cast<Index>(v), i) =
          (*all_visits)[v].missing[i] ? means[i] : (*all_visits)[v].values[i];
    }
  }
  return data;
}

struct KmeansResult {
  Matrix centroids;
  std::vector<int> assignment;
};

KmeansResult kmeans(const Matrix& data, int k, int max_iter, int reseeds, rng::Engine& engine) {
  const Index rows = data.rows();
  const Index cols = data.cols();
  if (rows < static_cast<Index>(k)) {
    throw FitError("k-means: fewer data points than states");
  }

  for (int attempt = 0; attempt <= reseeds; ++attempt) {
    // k-means++ seeding
    Matrix centroids(k, cols);
    centroids.row(0) = data.row(static_cast<Index>(rng::uniform_index(engine, rows)));
    Vector dist2 = (data.rowwise() - centroids.row(0)).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
      const Scalar total = dist2.sum();
      Index pick;
      if (total <= 0.0) {
        pick = static_cast<Index>(rng::uniform_index(engine, rows));
      } else {
        pick = rng::discrete(engine, dist2);
      }
      centroids.row(c) = data.row(pick);
      dist2 = dist2.cwiseMin((data.rowwise() - centroids.row(c)).rowwise().squaredNorm());
    }

    std::vector<int> assignment(static_cast<std::size_t>(rows), -1);
    bool empty_cluster = false;
    for (int iter = 0; iter < max_iter; ++iter) {
      bool moved = false;
      for (Index v = 0; v < rows; ++v) {
        Index best = 0;
        Scalar best_d = (data.row(v) - centroids.row(0)).squaredNorm();
        for (int c = 1; c < k; ++c) {
          const Scalar d = (data.row(v) - centroids.row(c)).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = c;
          }
        }
        if (assignment[static_cast<std::size_t>(v)] != static_cast<int>(best)) {
          assignment[static_cast<std::size_t>(v)] = static_cast<int>(best);
          moved = true;
        }
      }
      Matrix sums = Matrix::Zero(k, cols);
      Vector counts = Vector::Zero(k);
      for (Index v = 0; v < rows; ++v) {
        sums.row(assignment[static_cast<std::size_t>(v)]) += data.row(v);
        counts[assignment[static_cast<std::size_t>(v)]] += 1.0;
      }
      empty_cluster = false;
      for (int c = 0; c < k; ++c) {
        if (counts[c] == 0.0) {
          empty_cluster = true;
          break;
        }
        centroids.row(c) = sums.row(c) / counts[c];
      }
      if (empty_cluster || !moved) break;
    }
    if (!empty_cluster) return {std::move(centroids), std::move(assignment)};
  }
  throw FitError("k-means: empty cluster persisted after " + std::to_string(reseeds) +
                 " re-seeds");
}

// Severity axis for ordering states: patient mean minus control mean, or the
// leading principal component oriented from first to last visits when labels
// are absent.
Vector severity_axis(const Cohort& cohort, const Matrix& imputed) {
  const Index n = imputed.cols();
  Vector cn_sum = Vector::Zero(n), ad_sum = Vector::Zero(n);
  Scalar cn_count = 0.0, ad_count = 0.0;
  Index row = 0;
  Vector first_sum = Vector::Zero(n), last_sum = Vector::Zero(n);
  Scalar first_count = 0.0, last_count = 0.0;
  for (const auto& ind : cohort.individuals) {
    for (std::size_t t = 0; t < ind.observations.size(); ++t, ++row) {
      if (ind.diagnoses[t] == Diagnosis::CN) {
        cn_sum += imputed.row(row).transpose();
        cn_count += 1.0;
      } else if (ind.diagnoses[t] == Diagnosis::AD) {
        ad_sum += imputed.row(row).transpose();
        ad_count += 1.0;
      }
      if (t == 0) {
        first_sum += imputed.row(row).transpose();
        first_count += 1.0;
      }
      if (t + 1 == ind.observations.size()) {
        last_sum += imputed.row(row).transpose();
        last_count += 1.0;
      }
    }
  }
  if (cn_count > 0.0 && ad_count > 0.0) {
    Vector axis = ad_sum / ad_count - cn_sum / cn_count;
    if (axis.norm() > 0.0) return axis.normalized();
  }
  // Fallback: leading eigenvector of the data covariance, oriented so that
  // late visits project higher than baselines.
  const Matrix centered = imputed.rowwise() - imputed.colwise().mean();
  const Matrix cov = centered.transpose() * centered / std::max<Scalar>(1.0, imputed.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  Vector axis = es.eigenvectors().col(n - 1);
  const Scalar drift = (last_sum / std::max(last_count, 1.0) -
                        first_sum / std::max(first_count, 1.0))
                           .dot(axis);
  if (drift < 0.0) axis = -axis;
  return axis;
}

Matrix banded_transition_init(Index n_states, int band_width, bool monotone) {
  Matrix trans = Matrix::Zero(n_states, n_states);
  for (Index s = 0; s < n_states; ++s) {
    const Index lo = monotone ? s : std::max<Index>(0, s - band_width);
    const Index hi = std::min(n_states - 1, s + band_width);
    const Index neighbours = hi - lo;  // excluding self
    trans(s, s) = neighbours == 0 ? 1.0 : 0.8;
    for (Index b = lo; b <= hi; ++b) {
      if (b != s) trans(s, b) = 0.2 / static_cast<Scalar>(neighbours);
    }
  }
  return trans;
}

struct ExpandedIndividual {
  std::vector<Observation> visits;  // pseudo-visits are completely missing
  std::vector<Index> observed_rows;
};

ExpandedIndividual expand_to_grid(const Individual& ind, Scalar base_interval) {
  ExpandedIndividual out;
  const Index n = ind.observations.front().values.size();
  Observation blank;
  blank.values = Vector::Zero(n);
  blank.missing = ArrayXb::Constant(n, true);

  Index grid = 0;
  out.visits.push_back(ind.observations.front());
  out.observed_rows.push_back(0);
  for (const Scalar gap : inference::visit_gaps(ind)) {
    const auto steps = std::max<long>(1, std::lround(gap / base_interval));
    for (long s = 1; s < steps; ++s) out.visits.push_back(blank);
    grid += steps;
    out.visits.push_back(ind.observations[out.observed_rows.size()]);
    out.observed_rows.push_back(grid);
  }
  return out;
}

}  // namespace

std::string to_string(CovarianceKind k) {
  return k == CovarianceKind::SharedFull ? "shared_full" : "per_state_diagonal";
}

CovarianceKind covariance_kind_from_string(const std::string& s) {
  if (s == "shared_full") return CovarianceKind::SharedFull;
  if (s == "per_state_diagonal") return CovarianceKind::PerStateDiagonal;
  throw FormatError("unknown covariance kind '" + s + "'");
}

Matrix cthmm_log_emission_matrix(const Individual& individual, const CthmmModel& model) {
  std::map<Mask, PatternCache> caches;
  if (model.cov_kind == CovarianceKind::SharedFull) {
    std::vector<Mask> masks;
    for (const auto& obs : individual.observations) masks.push_back(mask_of(obs));
    caches = build_pattern_caches(masks, model.shared_cov);
  }
  return log_emissions_for(individual.observations, model, caches);
}

CthmmModel fit_cthmm(const Cohort& cohort, int n_states, const CthmmConfig& config) {
  const Index n = cohort.n_features();
  if (n_states == 0) n_states = config.n_states;
  if (n_states == 0) n_states = static_cast<int>(n) + 1;
  if (n_states < 2) throw ArgumentError("fit_cthmm: need at least 2 states");
  if (cohort.individuals.empty()) throw ArgumentError("fit_cthmm: cohort is empty");
  if (n > 64) throw ArgumentError("fit_cthmm: at most 64 features supported");

  std::vector<Observation> all_visits;
  const Matrix imputed = impute_by_feature_mean(cohort, &all_visits);

  auto engine = rng::derived_engine(config.seed, 0x637468 /* "cth" */);
  KmeansResult km = kmeans(imputed, n_states, config.kmeans_max_iter, config.kmeans_reseeds, engine);

  // Order states along the severity axis.
  const Vector axis = severity_axis(cohort, imputed);
  std::vector<Index> order(static_cast<std::size_t>(n_states));
  std::iota(order.begin(), order.end(), 0);
  const Vector projections = km.centroids * axis;
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return projections[a] < projections[b]; });

  CthmmModel model;
  model.cov_kind = config.cov_kind;
  model.base_interval_months = config.base_interval_months;
  model.band_width = config.band_width;
  model.monotone = false;
  model.emission_means = Matrix(n_states, n);
  for (int s = 0; s < n_states; ++s) {
    model.emission_means.row(s) = km.centroids.row(order[static_cast<std::size_t>(s)]);
  }

  const Matrix centered = imputed.rowwise() - imputed.colwise().mean();
  Matrix data_cov = centered.transpose() * centered / std::max<Scalar>(1.0, imputed.rows() - 1);
  for (Index d = 0; d < n; ++d) {
    data_cov(d, d) = std::max(data_cov(d, d), 1e-8);
  }
  model.shared_cov = data_cov;
  model.state_variances = data_cov.diagonal().transpose().replicate(n_states, 1);

  // pi from baseline-visit cluster occupancy, add-one smoothed.
  Vector pi_counts = Vector::Ones(n_states);
  Index row = 0;
  for (const auto& ind : cohort.individuals) {
    for (std::size_t t = 0; t < ind.observations.size(); ++t, ++row) {
      if (t == 0) {
        const int cluster = km.assignment[static_cast<std::size_t>(row)];
        for (int s = 0; s < n_states; ++s) {
          if (order[static_cast<std::size_t>(s)] == cluster) {
            pi_counts[s] += 1.0;
            break;
          }
        }
      }
    }
  }
  model.pi = pi_counts / pi_counts.sum();
  model.trans = banded_transition_init(n_states, config.band_width, false);

  // Bucket visit gaps onto the base-interval grid once.
  std::vector<ExpandedIndividual> expanded;
  expanded.reserve(cohort.individuals.size());
  for (const auto& ind : cohort.individuals) {
    expanded.push_back(expand_to_grid(ind, config.base_interval_months));
  }
  std::vector<Mask> all_masks;
  for (const auto& e : expanded) {
    for (const auto& v : e.visits) all_masks.push_back(mask_of(v));
  }

  Scalar prev_ll = -std::numeric_limits<Scalar>::infinity();
  for (int iter = 0; iter < config.max_iter; ++iter) {
    std::map<Mask, PatternCache> caches;
    if (model.cov_kind == CovarianceKind::SharedFull) {
      caches = build_pattern_caches(all_masks, model.shared_cov);
    }

    // E-step
    std::vector<inference::PosteriorTables> tables(expanded.size());
    markov::TransitionModel dyn{model.pi, model.trans, model.base_interval_months};
    parallel_for(expanded.size(), config.threads, [&](std::size_t j) {
      const Matrix log_emis = log_emissions_for(expanded[j].visits, model, caches);
      const std::vector<Scalar> gaps(expanded[j].visits.size() - 1,
                                     model.base_interval_months);
      tables[j] = inference::forward_backward(log_emis, gaps, dyn);
    });

    Scalar ll = 0.0;
    for (const auto& t : tables) ll += t.log_likelihood;
    model.diagnostics.log_likelihood_trace.push_back(ll);
    if (ll + 1e-7 * (1.0 + std::abs(ll)) < prev_ll) {
      throw NumericalError("CT-HMM EM log likelihood decreased from " + std::to_string(prev_ll) +
                           " to " + std::to_string(ll));
    }
    if (std::abs(ll - prev_ll) < config.conv_tol) {
      model.diagnostics.converged = true;
      model.diagnostics.iterations = iter + 1;
      break;
    }
    prev_ll = ll;
    model.diagnostics.iterations = iter + 1;

    // M-step: pi and transition counts
    inference::TransitionUpdate update =
        inference::update_transition(tables, model.trans, config.band_width, false);
    model.pi = update.pi;
    model.trans = update.trans;
    for (const auto& note : update.notes) model.diagnostics.notes.push_back(note);

    // M-step: emission means and covariance with exact conditional
    // expectations for missing dimensions.
    Matrix mean_num = Matrix::Zero(n_states, n);
    Vector weight = Vector::Zero(n_states);
    std::vector<Matrix> filled_per_state(static_cast<std::size_t>(n_states));

    // First pass: accumulate filled-value sums for the new means.
    std::size_t visit_cursor = 0;
    std::vector<Vector> filled_values;  // per (visit, state), flattened
    filled_values.reserve(all_masks.size() * static_cast<std::size_t>(n_states));
    for (std::size_t j = 0; j < expanded.size(); ++j) {
      for (std::size_t t = 0; t < expanded[j].visits.size(); ++t, ++visit_cursor) {
        const Observation& obs = expanded[j].visits[t];
        const Mask m = all_masks[visit_cursor];
        for (Index s = 0; s < n_states; ++s) {
          const Scalar g = tables[j].gamma(static_cast<Index>(t), s);
          Vector filled = model.emission_means.row(s).transpose();
          if (model.cov_kind == CovarianceKind::SharedFull) {
            const PatternCache& cache = caches.at(m);
            if (!cache.observed.empty() && !cache.missing.empty()) {
              Vector r(static_cast<Index>(cache.observed.size()));
              for (std::size_t a = 0; a < cache.observed.size(); ++a) {
                r[static_cast<Index>(a)] =
                    obs.values[cache.observed[a]] - filled[cache.observed[a]];
              }
              const Vector cond = cache.gain * r;
              for (std::size_t a = 0; a < cache.missing.size(); ++a) {
                filled[cache.missing[a]] += cond[static_cast<Index>(a)];
              }
            }
          }
          for (Index d = 0; d < n; ++d) {
            if (!obs.missing[d]) filled[d] = obs.values[d];
          }
          mean_num.row(s) += g * filled.transpose();
          weight[s] += g;
          filled_values.push_back(std::move(filled));
        }
      }
    }

    Matrix new_means(n_states, n);
    for (Index s = 0; s < n_states; ++s) {
      if (weight[s] > 1e-10) {
        new_means.row(s) = mean_num.row(s) / weight[s];
      } else {
        new_means.row(s) = model.emission_means.row(s);
        model.diagnostics.notes.push_back("state " + std::to_string(s) +
                                          " had no posterior mass; mean kept");
      }
    }

    // Second pass: scatter around the new means plus conditional covariance.
    if (model.cov_kind == CovarianceKind::SharedFull) {
      Matrix scatter = Matrix::Zero(n, n);
      Scalar total_weight = 0.0;
      visit_cursor = 0;
      std::size_t flat = 0;
      for (std::size_t j = 0; j < expanded.size(); ++j) {
        for (std::size_t t = 0; t < expanded[j].visits.size(); ++t, ++visit_cursor) {
          const Mask m = all_masks[visit_cursor];
          const PatternCache& cache = caches.at(m);
          for (Index s = 0; s < n_states; ++s, ++flat) {
            const Scalar g = tables[j].gamma(static_cast<Index>(t), s);
            const Vector r = filled_values[flat] - new_means.row(s).transpose();
            scatter.noalias() += g * r * r.transpose();
            if (!cache.missing.empty()) {
              for (std::size_t a = 0; a < cache.missing.size(); ++a) {
                for (std::size_t b = 0; b < cache.missing.size(); ++b) {
                  scatter(cache.missing[a], cache.missing[b]) +=
                      g * cache.cond_cov(static_cast<Index>(a), static_cast<Index>(b));
                }
              }
            }
            total_weight += g;
          }
        }
      }
      Matrix cov = scatter / total_weight;
      cov = 0.5 * (cov + cov.transpose());
      Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
      const Scalar floor = 1e-8 * std::max<Scalar>(1.0, es.eigenvalues().maxCoeff());
      if (es.eigenvalues().minCoeff() < floor) {
        const Vector clamped = es.eigenvalues().cwiseMax(floor);
        cov = es.eigenvectors() * clamped.asDiagonal() * es.eigenvectors().transpose();
        model.diagnostics.notes.push_back("covariance eigenvalues floored");
      }
      model.shared_cov = cov;
    } else {
      Matrix var_num = Matrix::Zero(n_states, n);
      visit_cursor = 0;
      std::size_t flat = 0;
      for (std::size_t j = 0; j < expanded.size(); ++j) {
        for (std::size_t t = 0; t < expanded[j].visits.size(); ++t, ++visit_cursor) {
          const Observation& obs = expanded[j].visits[t];
          for (Index s = 0; s < n_states; ++s, ++flat) {
            const Scalar g = tables[j].gamma(static_cast<Index>(t), s);
            for (Index d = 0; d < n; ++d) {
              const Scalar r = filled_values[flat][d] - new_means(s, d);
              Scalar contrib = r * r;
              if (obs.missing[d]) contrib += model.state_variances(s, d);
              var_num(s, d) += g * contrib;
            }
          }
        }
      }
      for (Index s = 0; s < n_states; ++s) {
        if (weight[s] > 1e-10) {
          model.state_variances.row(s) =
              (var_num.row(s) / weight[s]).cwiseMax(1e-8);
        }
      }
    }
    model.emission_means = new_means;
  }

  if (!model.diagnostics.converged) {
    model.diagnostics.notes.push_back("EM stopped at max_iter before reaching the tolerance");
  }
  return model;
}

staging::StagePath stage_cthmm(const Individual& individual, const CthmmModel& model) {
  const Matrix log_emis = cthmm_log_emission_matrix(individual, model);
  const std::vector<Scalar> gaps = inference::visit_gaps(individual);
  markov::TransitionModel dyn{model.pi, model.trans, model.base_interval_months};

  std::vector<Matrix> log_trans;
  log_trans.reserve(gaps.size());
  for (Scalar gap : gaps) {
    log_trans.push_back(
        markov::transition_over_interval(dyn, gap).array().max(0.0).log().matrix());
  }
  auto [path, log_prob] =
      staging::viterbi_path(model.pi.array().max(0.0).log().matrix(), log_trans, log_emis);

  staging::StagePath out;
  out.stages = std::move(path);
  out.log_prob = log_prob;
  out.posterior_by_visit = inference::forward_backward(log_emis, gaps, dyn).gamma;
  return out;
}

Scalar cthmm_log_likelihood(const Cohort& cohort, const CthmmModel& model, int threads) {
  std::vector<Scalar> lls(cohort.individuals.size());
  markov::TransitionModel dyn{model.pi, model.trans, model.base_interval_months};
  parallel_for(cohort.individuals.size(), threads, [&](std::size_t j) {
    const Individual& ind = cohort.individuals[j];
    lls[j] = inference::log_likelihood_forward(cthmm_log_emission_matrix(ind, model),
                                               inference::visit_gaps(ind), dyn);
  });
  return std::accumulate(lls.begin(), lls.end(), 0.0);
}

}  // namespace ebhmm::baseline
