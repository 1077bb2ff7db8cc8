#include "ebhmm/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ebhmm/parallel.hpp"
#include "ebhmm/random.hpp"

namespace ebhmm::inference {

namespace {

std::vector<Matrix> gap_transition_matrices(const std::vector<Scalar>& gap_months,
                                            const markov::TransitionModel& model) {
  std::vector<Matrix> mats;
  mats.reserve(gap_months.size());
  for (Scalar gap : gap_months) {
    if (std::abs(gap - model.base_interval_months) < 1e-9) {
      mats.push_back(model.trans);
    } else {
      mats.push_back(markov::transition_over_interval(model, gap));
    }
  }
  return mats;
}

// Shift each log-emission row by its max so exp() stays in range; the shifts
// are added back into the log likelihood.
Vector row_shifts(const Matrix& log_emissions) {
  Vector shifts(log_emissions.rows());
  for (Index t = 0; t < log_emissions.rows(); ++t) {
    const Scalar m = log_emissions.row(t).maxCoeff();
    if (!std::isfinite(m)) {
      throw NumericalError("visit " + std::to_string(t) + " has all-zero emissions");
    }
    shifts[t] = m;
  }
  return shifts;
}

}  // namespace

std::vector<Scalar> visit_gaps(const Individual& individual) {
  std::vector<Scalar> gaps;
  for (std::size_t t = 1; t < individual.observations.size(); ++t) {
    gaps.push_back(individual.observations[t].visit_time -
                   individual.observations[t - 1].visit_time);
  }
  return gaps;
}

PosteriorTables forward_backward(const Matrix& log_emissions,
                                 const std::vector<Scalar>& gap_months,
                                 const markov::TransitionModel& model) {
  const Index t_count = log_emissions.rows();
  const Index n = model.n_stages();
  if (log_emissions.cols() != n) {
    throw ArgumentError("forward_backward: emission columns do not match stage count");
  }
  if (static_cast<Index>(gap_months.size()) + 1 != t_count) {
    throw ArgumentError("forward_backward: need one gap per consecutive visit pair");
  }

  const std::vector<Matrix> trans = gap_transition_matrices(gap_months, model);
  const Vector shifts = row_shifts(log_emissions);
  Matrix emis(t_count, n);
  for (Index t = 0; t < t_count; ++t) {
    emis.row(t) = (log_emissions.row(t).array() - shifts[t]).exp();
  }

  // Scaled forward recursion
  Matrix alpha(t_count, n);
  Vector scale(t_count);
  Vector a = model.pi.cwiseProduct(emis.row(0).transpose());
  scale[0] = a.sum();
  if (scale[0] <= 0.0) throw NumericalError("visit 0: prior and emissions have no common support");
  alpha.row(0) = a / scale[0];
  for (Index t = 1; t < t_count; ++t) {
    a = (trans[static_cast<std::size_t>(t - 1)].transpose() * alpha.row(t - 1).transpose())
            .cwiseProduct(emis.row(t).transpose());
    scale[t] = a.sum();
    if (scale[t] <= 0.0) {
      throw NumericalError("visit " + std::to_string(t) + ": forward mass vanished");
    }
    alpha.row(t) = a / scale[t];
  }

  // Scaled backward recursion
  Matrix beta(t_count, n);
  beta.row(t_count - 1).setOnes();
  for (Index t = t_count - 2; t >= 0; --t) {
    beta.row(t) = (trans[static_cast<std::size_t>(t)] *
                   emis.row(t + 1).cwiseProduct(beta.row(t + 1)).transpose())
                      .transpose() /
                  scale[t + 1];
  }

  PosteriorTables out;
  out.gamma = alpha.cwiseProduct(beta);
  for (Index t = 0; t < t_count; ++t) {
    out.gamma.row(t) /= out.gamma.row(t).sum();
  }
  out.xi.reserve(static_cast<std::size_t>(t_count - 1));
  for (Index t = 0; t + 1 < t_count; ++t) {
    Matrix slice = (alpha.row(t).transpose() *
                    emis.row(t + 1).cwiseProduct(beta.row(t + 1)))
                       .cwiseProduct(trans[static_cast<std::size_t>(t)]) /
                   scale[t + 1];
    slice /= slice.sum();
    out.xi.push_back(std::move(slice));
  }
  out.log_likelihood = scale.array().log().sum() + shifts.sum();
  return out;
}

Scalar log_likelihood_forward(const Matrix& log_emissions,
                              const std::vector<Scalar>& gap_months,
                              const markov::TransitionModel& model) {
  const Index t_count = log_emissions.rows();
  const std::vector<Matrix> trans = gap_transition_matrices(gap_months, model);
  const Vector shifts = row_shifts(log_emissions);

  Vector a = model.pi.cwiseProduct((log_emissions.row(0).array() - shifts[0]).exp().matrix().transpose());
  Scalar ll = 0.0;
  Scalar s = a.sum();
  if (s <= 0.0) throw NumericalError("visit 0: prior and emissions have no common support");
  ll += std::log(s) + shifts[0];
  a /= s;
  for (Index t = 1; t < t_count; ++t) {
    a = (trans[static_cast<std::size_t>(t - 1)].transpose() * a)
            .cwiseProduct((log_emissions.row(t).array() - shifts[t]).exp().matrix().transpose());
    s = a.sum();
    if (s <= 0.0) throw NumericalError("visit " + std::to_string(t) + ": forward mass vanished");
    ll += std::log(s) + shifts[t];
    a /= s;
  }
  return ll;
}

TransitionUpdate update_transition(const std::vector<PosteriorTables>& posteriors,
                                   const Matrix& init_trans, int band_width,
                                   bool monotone) {
  if (posteriors.empty()) throw ArgumentError("update_transition: no posteriors");
  const Index n = posteriors.front().gamma.cols();

  TransitionUpdate out;
  out.pi = Vector::Zero(n);
  for (const auto& p : posteriors) out.pi += p.gamma.row(0).transpose();
  out.pi /= static_cast<Scalar>(posteriors.size());

  Matrix numer = Matrix::Zero(n, n);
  Vector denom = Vector::Zero(n);
  bool any_gap = false;
  for (const auto& p : posteriors) {
    for (std::size_t t = 0; t < p.xi.size(); ++t) {
      numer += p.xi[t];
      denom += p.gamma.row(static_cast<Index>(t)).transpose();
      any_gap = true;
    }
  }
  if (!any_gap) {
    out.trans = init_trans;
    out.notes.push_back("no visit pairs observed; transition matrix left at its initialisation");
    return out;
  }

  Matrix raw = Matrix::Zero(n, n);
  for (Index s = 0; s < n; ++s) {
    if (denom[s] > 1e-12) {
      raw.row(s) = numer.row(s) / denom[s];
    } else {
      raw(s, s) = 1.0;
      out.notes.push_back("stage " + std::to_string(s) +
                          " never visited; row set to self-transition");
    }
  }
  out.trans = markov::apply_structure_prior(raw, band_width, monotone);
  return out;
}

Matrix default_transition_init(Index n_stages, int band_width) {
  Matrix trans = Matrix::Zero(n_stages, n_stages);
  for (Index s = 0; s < n_stages; ++s) {
    const Index last = std::min(n_stages - 1, s + band_width);
    const Index forward_count = last - s;
    if (forward_count == 0) {
      trans(s, s) = 1.0;
    } else {
      trans(s, s) = 0.9;
      for (Index b = s + 1; b <= last; ++b) {
        trans(s, b) = 0.1 / static_cast<Scalar>(forward_count);
      }
    }
  }
  return trans;
}

namespace {

constexpr int kRefineMaxIter = 200;
constexpr Scalar kRefineTol = 1e-8;

// Per-visit cached log densities: emission at stage k under any sequence is
// control_sum + sum of patient/control log ratios of the first k events.
struct EmissionCache {
  Matrix delta;       // T x I, log p_patient - log p_control (0 where missing)
  Vector control_sum;  // T
};

EmissionCache build_cache(const Individual& ind,
                          const std::vector<mixture::MixturePair>& mixtures) {
  const auto t_count = ind.n_visits();
  const auto n = static_cast<Index>(mixtures.size());
  EmissionCache cache;
  cache.delta = Matrix::Zero(t_count, n);
  cache.control_sum = Vector::Zero(t_count);
  for (Index t = 0; t < t_count; ++t) {
    const Observation& obs = ind.observations[static_cast<std::size_t>(t)];
    for (Index i = 0; i < n; ++i) {
      if (obs.missing[i]) continue;
      const auto& pair = mixtures[static_cast<std::size_t>(i)];
      const Scalar lp = mixture::log_gaussian(obs.values[i], pair.patient);
      const Scalar lc = mixture::log_gaussian(obs.values[i], pair.control);
      cache.delta(t, i) = lp - lc;
      cache.control_sum[t] += lc;
    }
  }
  return cache;
}

// Grid row index of each visit when gaps are bucketed to whole base
// intervals; intermediate rows act as completely missing pseudo-visits.
std::vector<Index> grid_positions(const Individual& ind, Scalar base_interval) {
  std::vector<Index> grid{0};
  for (const Scalar gap : visit_gaps(ind)) {
    const auto steps = std::max<long>(1, std::lround(gap / base_interval));
    grid.push_back(grid.back() + steps);
  }
  return grid;
}

Matrix expanded_log_emissions(const EmissionCache& cache, const std::vector<Index>& grid,
                              const EventSequence& sequence) {
  const Index n = cache.delta.cols();
  Matrix out = Matrix::Zero(grid.back() + 1, n + 1);
  for (std::size_t t = 0; t < grid.size(); ++t) {
    Scalar acc = cache.control_sum[static_cast<Index>(t)];
    out(grid[t], 0) = acc;
    for (int k = 1; k <= n; ++k) {
      acc += cache.delta(static_cast<Index>(t), sequence.feature_at(k - 1));
      out(grid[t], k) = acc;
    }
  }
  return out;
}

struct CandidateScore {
  Scalar log_likelihood = -std::numeric_limits<Scalar>::infinity();
  Vector pi;
  Matrix trans;
  std::vector<std::string> notes;
};

class SequenceScorer {
 public:
  SequenceScorer(const Cohort& cohort, const std::vector<mixture::MixturePair>& mixtures,
                 const FitConfig& config)
      : config_(config), n_stages_(cohort.n_features() + 1) {
    const Scalar base = config.base_interval_months;
    for (const auto& ind : cohort.individuals) {
      caches_.push_back(build_cache(ind, mixtures));
      grids_.push_back(grid_positions(ind, base));
    }
    init_model_.pi = Vector::Constant(n_stages_, 1.0 / static_cast<Scalar>(n_stages_));
    init_model_.trans = default_transition_init(n_stages_, config.band_width);
    init_model_.base_interval_months = base;
  }

  // Cheap surrogate used to rank candidate sequences: a single transition
  // update from the weakly-informative start.
  CandidateScore score(const EventSequence& sequence) const {
    return one_step(sequence, init_model_);
  }

  // EM on (pi, trans) with the sequence held fixed, continuing from `start`.
  // Appends one trace entry per iteration.
  CandidateScore refine(const EventSequence& sequence, CandidateScore start,
                        std::vector<Scalar>& trace, std::vector<std::string>& notes) const {
    CandidateScore current = std::move(start);
    for (int it = 0; it < kRefineMaxIter; ++it) {
      const markov::TransitionModel model{current.pi, current.trans,
                                          config_.base_interval_months};
      CandidateScore next = one_step(sequence, model);
      const Scalar gain = next.log_likelihood - current.log_likelihood;
      current = std::move(next);
      trace.push_back(current.log_likelihood);
      if (std::abs(gain) <= kRefineTol * (1.0 + std::abs(current.log_likelihood))) {
        return current;
      }
    }
    notes.push_back("transition refinement stopped at its iteration cap");
    return current;
  }

 private:
  CandidateScore one_step(const EventSequence& sequence,
                          const markov::TransitionModel& start) const {
    const std::size_t j_count = caches_.size();
    std::vector<PosteriorTables> tables(j_count);
    parallel_for(j_count, config_.threads, [&](std::size_t j) {
      const Matrix emis = expanded_log_emissions(caches_[j], grids_[j], sequence);
      const std::vector<Scalar> gaps(static_cast<std::size_t>(emis.rows()) - 1,
                                     config_.base_interval_months);
      tables[j] = forward_backward(emis, gaps, start);
    });

    TransitionUpdate update = update_transition(tables, start.trans, config_.band_width, true);

    markov::TransitionModel updated{update.pi, update.trans, config_.base_interval_months};
    std::vector<Scalar> lls(j_count);
    parallel_for(j_count, config_.threads, [&](std::size_t j) {
      const Matrix emis = expanded_log_emissions(caches_[j], grids_[j], sequence);
      const std::vector<Scalar> gaps(static_cast<std::size_t>(emis.rows()) - 1,
                                     config_.base_interval_months);
      lls[j] = log_likelihood_forward(emis, gaps, updated);
    });

    CandidateScore out;
    out.log_likelihood = std::accumulate(lls.begin(), lls.end(), 0.0);
    out.pi = std::move(update.pi);
    out.trans = std::move(update.trans);
    out.notes = std::move(update.notes);
    return out;
  }

  FitConfig config_;
  Index n_stages_;
  std::vector<EmissionCache> caches_;
  std::vector<std::vector<Index>> grids_;
  markov::TransitionModel init_model_;
};

// Rank events by how many patient-labelled values already look abnormal
// (patient component beats control component).
EventSequence initial_sequence(const Cohort& cohort,
                               const std::vector<mixture::MixturePair>& mixtures,
                               Diagnosis patient_label) {
  const Index n = cohort.n_features();
  std::vector<std::pair<double, int>> ranked;  // (-abnormal fraction, feature)
  for (Index i = 0; i < n; ++i) {
    int abnormal = 0, total = 0, abnormal_any = 0, total_any = 0;
    for (const auto& ind : cohort.individuals) {
      for (std::size_t t = 0; t < ind.observations.size(); ++t) {
        const Observation& obs = ind.observations[t];
        if (obs.missing[i]) continue;
        const auto& pair = mixtures[static_cast<std::size_t>(i)];
        const bool is_abnormal = mixture::log_gaussian(obs.values[i], pair.patient) >
                                 mixture::log_gaussian(obs.values[i], pair.control);
        if (ind.diagnoses[t] == patient_label) {
          abnormal += is_abnormal;
          ++total;
        }
        if (ind.diagnoses[t] != Diagnosis::NA) {
          abnormal_any += is_abnormal;
          ++total_any;
        }
      }
    }
    double frac = 0.5;
    if (total > 0) {
      frac = static_cast<double>(abnormal) / total;
    } else if (total_any > 0) {
      frac = static_cast<double>(abnormal_any) / total_any;
    }
    ranked.emplace_back(-frac, static_cast<int>(i));
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<int> order;
  order.reserve(ranked.size());
  for (const auto& [neg_frac, feature] : ranked) order.push_back(feature);
  return EventSequence(std::move(order));
}

struct RestartResult {
  EventSequence sequence;
  CandidateScore score;
  FitDiagnostics diagnostics;
};

RestartResult run_restart(const SequenceScorer& scorer, EventSequence sequence,
                          int max_outer_iter) {
  const int n = sequence.size();
  CandidateScore current = scorer.score(sequence);

  FitDiagnostics diag;
  bool degenerate = true;
  int sweep = 0;
  for (; sweep < max_outer_iter; ++sweep) {
    bool changed = false;
    for (int feature = 0; feature < n; ++feature) {
      EventSequence best_seq = sequence;
      CandidateScore best = current;
      for (int pos = 0; pos < n; ++pos) {
        if (pos == sequence.position_of(feature)) continue;
        EventSequence cand = sequence.with_feature_at(feature, pos);
        CandidateScore cand_score = scorer.score(cand);
        if (sweep == 0 &&
            std::abs(cand_score.log_likelihood - current.log_likelihood) >
                1e-12 * std::max(1.0, std::abs(current.log_likelihood))) {
          degenerate = false;
        }
        // Ties keep the incumbent position.
        if (cand_score.log_likelihood > best.log_likelihood) {
          best_seq = std::move(cand);
          best = std::move(cand_score);
        }
      }
      if (best_seq != sequence) {
        sequence = std::move(best_seq);
        current = std::move(best);
        changed = true;
      }
    }
    diag.log_likelihood_trace.push_back(current.log_likelihood);
    if (!changed) {
      diag.converged = true;
      ++sweep;
      break;
    }
  }
  diag.iterations = std::min(sweep, max_outer_iter);
  if (!diag.converged) {
    diag.notes.push_back("sequence search stopped at max_outer_iter without a fixed point");
  }
  if (degenerate) {
    diag.notes.push_back(
        "all candidate sequences scored identically; sequence is not identifiable from these data");
  }
  current = scorer.refine(sequence, std::move(current), diag.log_likelihood_trace, diag.notes);
  for (const auto& note : current.notes) diag.notes.push_back(note);
  return {std::move(sequence), std::move(current), std::move(diag)};
}

}  // namespace

FittedModel fit(const Cohort& cohort, const std::vector<mixture::MixturePair>& mixtures,
                const FitConfig& config) {
  if (cohort.individuals.empty()) throw ArgumentError("fit: cohort is empty");
  if (static_cast<Index>(mixtures.size()) != cohort.n_features()) {
    throw ArgumentError("fit: need one fitted mixture per feature");
  }

  const SequenceScorer scorer(cohort, mixtures, config);
  const EventSequence base_init = initial_sequence(cohort, mixtures, config.patient_label);

  RestartResult best = run_restart(scorer, base_init, config.max_outer_iter);
  for (int r = 1; r < config.random_restarts; ++r) {
    std::vector<int> order = base_init.order();
    auto engine = rng::derived_engine(config.seed, static_cast<std::uint64_t>(r));
    rng::shuffle(order, engine);
    RestartResult candidate =
        run_restart(scorer, EventSequence(std::move(order)), config.max_outer_iter);
    if (candidate.score.log_likelihood > best.score.log_likelihood) {
      best = std::move(candidate);
    }
  }

  FittedModel model{
      std::move(best.sequence),
      markov::TransitionModel{std::move(best.score.pi), std::move(best.score.trans),
                              config.base_interval_months},
      mixtures,
      std::move(best.diagnostics)};
  markov::validate_transition_model(model.transition, config.band_width, true);
  return model;
}

Scalar total_log_likelihood(const Cohort& cohort, const FittedModel& model, int threads) {
  if (static_cast<Index>(model.mixtures.size()) != cohort.n_features()) {
    throw ArgumentError("total_log_likelihood: model does not match cohort features");
  }
  const std::size_t j_count = cohort.individuals.size();
  std::vector<Scalar> lls(j_count);
  parallel_for(j_count, threads, [&](std::size_t j) {
    const Individual& ind = cohort.individuals[j];
    const Matrix emis = mixture::log_emission_matrix(ind, model.sequence, model.mixtures);
    lls[j] = log_likelihood_forward(emis, visit_gaps(ind), model.transition);
  });
  return std::accumulate(lls.begin(), lls.end(), 0.0);
}

}  // namespace ebhmm::inference
