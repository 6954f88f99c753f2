#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <vector>

#include "eblab/mixture.hpp"
#include "eblab/pop.hpp"
#include "eblab/prior.hpp"
#include "eblab/rng.hpp"

namespace eb {

/// Observation models the hierarchical Bayes machinery is generic over:
/// a prior type, an observation type, and the induced mixture marginal
/// and posterior mean under one candidate prior.
struct PoissonObsModel {
  using Prior = DiscretePrior;
  using Obs = int;
  static constexpr bool kTabulated = true;
  static double log_marginal(const Prior& g, int x) { return eb::log_marginal(g, x); }
  static double posterior_mean(const Prior& g, int x) {
    return bayes_posterior_mean(g, x);
  }
  static void check_obs(int x) {
    if (x < 0) throw std::invalid_argument("observations must be >= 0");
  }
};

struct GaussianObsModel {
  using Prior = GaussianPrior;
  using Obs = double;
  static constexpr bool kTabulated = false;
  static double log_marginal(const Prior& g, double x);   // gaussian.cpp
  static double posterior_mean(const Prior& g, double x);  // gaussian.cpp
  static void check_obs(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("observation not finite");
  }
};

/// Immutable candidate-prior set {G_j} shared by every state derived from
/// it. For the Poisson model the per-candidate marginal log-pmfs and
/// posterior means are tabulated once over {0, ..., x_max}; observations
/// beyond the table fall back to direct evaluation.
template <class Model>
struct CandidateSetT {
  std::vector<typename Model::Prior> priors;
  double support_bound = 0.0;
  int x_max = -1;
  std::vector<std::vector<double>> logf_table;   // [j][0 .. x_max + 1]
  std::vector<std::vector<double>> theta_table;  // [j][0 .. x_max], NaN if undefined

  double log_f(std::size_t j, typename Model::Obs x) const {
    if constexpr (Model::kTabulated) {
      if (x <= x_max + 1) return logf_table[j][x];
    }
    return Model::log_marginal(priors[j], x);
  }

  double theta(std::size_t j, typename Model::Obs x) const {
    if constexpr (Model::kTabulated) {
      if (x <= x_max) return theta_table[j][x];
    }
    return Model::posterior_mean(priors[j], x);
  }
};

/// The computational posterior Pi^alpha(. | data): candidate priors with
/// normalized log-weights. States are immutable; updates return new states
/// sharing the candidate set.
template <class Model>
struct PosteriorStateT {
  std::shared_ptr<const CandidateSetT<Model>> candidates;
  std::vector<double> log_weights;
  double alpha = 1.0;
  int train_n = 1;

  std::size_t size() const { return candidates->priors.size(); }
};

using PosteriorState = PosteriorStateT<PoissonObsModel>;
using GaussianPosteriorState = PosteriorStateT<GaussianObsModel>;

namespace detail {

template <class Model>
std::map<typename Model::Obs, int> count_observations(
    const std::vector<typename Model::Obs>& xs) {
  std::map<typename Model::Obs, int> counts;
  for (const auto& x : xs) {
    Model::check_obs(x);
    ++counts[x];
  }
  return counts;
}

inline void normalize_log_weights(std::vector<double>& lw) {
  const double total = log_sum_exp(lw);
  if (total == -std::numeric_limits<double>::infinity())
    throw std::domain_error(
        "posterior update: every candidate prior assigns zero likelihood");
  for (double& w : lw) w -= total;
}

template <class Model>
PosteriorStateT<Model> posterior_update_t(const PosteriorStateT<Model>& state,
                                          const std::vector<typename Model::Obs>& xs,
                                          double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("posterior update: alpha must be in (0, 1]");
  const auto counts = count_observations<Model>(xs);
  PosteriorStateT<Model> out = state;
  out.alpha = alpha;
  for (std::size_t j = 0; j < state.size(); ++j) {
    double s = 0.0;
    for (const auto& [x, c] : counts) s += c * state.candidates->log_f(j, x);
    out.log_weights[j] = state.log_weights[j] + alpha * s;
  }
  normalize_log_weights(out.log_weights);
  return out;
}

// sum_j p_j theta_{G_j}(x) per distinct observation, under the state's
// current weights. Candidates whose weight underflows to zero are dropped
// up front; after conditioning on long sequences only a handful survive.
template <class Model>
std::vector<double> mixture_posterior_mean_t(
    const PosteriorStateT<Model>& state,
    const std::vector<typename Model::Obs>& xs) {
  const auto counts = count_observations<Model>(xs);
  std::vector<std::pair<std::size_t, double>> support;
  for (std::size_t j = 0; j < state.size(); ++j) {
    const double p = std::exp(state.log_weights[j]);
    if (p > 0.0) support.emplace_back(j, p);
  }
  std::map<typename Model::Obs, double> value;
  for (const auto& [x, c] : counts) {
    double acc = 0.0;
    for (const auto& [j, p] : support) acc += p * state.candidates->theta(j, x);
    value[x] = acc;
  }
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(value.at(x));
  return out;
}

template <class Model>
std::vector<double> hb_estimate_t(const PosteriorStateT<Model>& state,
                                  const std::vector<typename Model::Obs>& xs) {
  return mixture_posterior_mean_t(posterior_update_t(state, xs, 1.0), xs);
}

// Leave-one-out form theta_{G_i}(X_i) with G_i the posterior-mean prior
// given X without index i; per-index reweighting of the full posterior.
template <class Model>
std::vector<double> hb_estimate_loo_t(const PosteriorStateT<Model>& state,
                                      const std::vector<typename Model::Obs>& xs) {
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  const auto counts = count_observations<Model>(xs);
  const std::size_t m = state.size();

  // unnormalized full-likelihood exponents
  std::vector<double> full(m);
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (const auto& [x, c] : counts) s += c * state.candidates->log_f(j, x);
    full[j] = state.log_weights[j] + s;
  }

  std::map<typename Model::Obs, double> value;
  std::vector<double> lw(m), logf_hold(m), logf_next(m);
  for (const auto& [xi, c] : counts) {
    for (std::size_t j = 0; j < m; ++j) {
      const double lf = state.candidates->log_f(j, xi);
      if (lf == kNegInf) {
        // the held-out term was itself -inf; rebuild the sum without it
        double s = 0.0;
        for (const auto& [x, cnt] : counts) {
          const int eff = x == xi ? cnt - 1 : cnt;
          if (eff > 0) s += eff * state.candidates->log_f(j, x);
        }
        lw[j] = state.log_weights[j] + s;
      } else {
        lw[j] = full[j] - lf;
      }
      logf_hold[j] = lw[j] + lf;
      logf_next[j] = lw[j] + state.candidates->log_f(j, xi + 1);
    }
    if constexpr (Model::kTabulated) {
      // theta_{G_i}(x) = (x + 1) f_{G_i}(x + 1) / f_{G_i}(x) for the
      // weight-averaged prior G_i
      const double den = log_sum_exp(logf_hold);
      if (den == kNegInf)
        throw std::domain_error(
            "posterior update: every candidate prior assigns zero likelihood");
      value[xi] = (xi + 1.0) * std::exp(log_sum_exp(logf_next) - den);
    } else {
      // continuous models have no ratio identity on a lattice; use
      // E[theta_G(x) f_G(x)] / E[f_G(x)] over the leave-one-out weights
      const double shift = log_sum_exp(logf_hold);
      if (shift == kNegInf)
        throw std::domain_error(
            "posterior update: every candidate prior assigns zero likelihood");
      double num = 0.0, den = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double pj = std::exp(logf_hold[j] - shift);
        num += pj * state.candidates->theta(j, xi);
        den += pj;
      }
      value[xi] = num / den;
    }
  }

  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(value.at(x));
  return out;
}

// f_{Pi,n}(X_i, mu): candidate weights proportional to
// exp(train_n * sum_x mu(x) log f_{G_j}(x)) with mu the empirical
// distribution of xs; identical to the alpha-posterior at
// alpha = train_n / |xs|.
template <class Model>
std::vector<double> lengen_estimate_t(const PosteriorStateT<Model>& state,
                                      const std::vector<typename Model::Obs>& xs) {
  if (xs.empty()) throw std::invalid_argument("lengen: empty observation list");
  if (static_cast<int>(xs.size()) < state.train_n)
    throw std::invalid_argument("lengen: n_test below train_n (alpha > 1)");
  const auto counts = count_observations<Model>(xs);
  const double n_test = static_cast<double>(xs.size());

  PosteriorStateT<Model> tempered = state;
  tempered.alpha = state.train_n / n_test;
  for (std::size_t j = 0; j < state.size(); ++j) {
    double s = 0.0;
    for (const auto& [x, c] : counts)
      s += (c / n_test) * state.candidates->log_f(j, x);
    tempered.log_weights[j] = state.log_weights[j] + state.train_n * s;
  }
  normalize_log_weights(tempered.log_weights);
  return mixture_posterior_mean_t(tempered, xs);
}

}  // namespace detail

/// Finite representation of Pi for the Poisson model: the components of a
/// Finite PoP (exact), otherwise mc_draws i.i.d. samples with uniform
/// weights. train_n is recorded for length generalization.
PosteriorState init_state(const PoPSpec& spec, int mc_draws, Rng& rng,
                          int train_n = 1);

/// State over an explicit candidate list with uniform weights.
PosteriorState make_state(std::vector<DiscretePrior> priors, int train_n = 1);

PosteriorState posterior_update(const PosteriorState& state,
                                const std::vector<int>& xs, double alpha);

/// Posterior-mean estimate using the state's current weights (the state
/// must already be conditioned on xs).
std::vector<double> mixture_posterior_mean(const PosteriorState& state,
                                           const std::vector<int>& xs);

/// E_Pi[theta_i | X^n]: runs the alpha = 1 update on the given (prior)
/// state internally, then averages candidate posterior means.
std::vector<double> hb_estimate(const PosteriorState& state,
                                const std::vector<int>& xs);

/// Equivalent leave-one-out characterization theta_{G_i}(X_i); agrees with
/// hb_estimate up to floating-point error.
std::vector<double> hb_estimate_loo(const PosteriorState& state,
                                    const std::vector<int>& xs);

/// Length-generalization map applied to a sequence of any length
/// >= train_n; equals the alpha-posterior estimate at alpha = train_n / n_test.
std::vector<double> lengen_estimate(const PosteriorState& state,
                                    const std::vector<int>& xs);

}  // namespace eb
