#include "eblab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "eblab/parallel.hpp"

namespace eb {

namespace {
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log sqrt(2 pi)
}

double gaussian_log_marginal(const GaussianPrior& g, double x) {
  std::vector<double> terms(g.atoms.size(),
                            -std::numeric_limits<double>::infinity());
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    if (g.weights[j] <= 0.0) continue;
    const double d = x - g.atoms[j];
    terms[j] = std::log(g.weights[j]) - 0.5 * d * d - kLogSqrt2Pi;
  }
  return log_sum_exp(terms);
}

double gaussian_marginal(const GaussianPrior& g, double x) {
  return std::exp(gaussian_log_marginal(g, x));
}

namespace {

// max-shifted sums over atoms: returns (num, den) for
// num = sum w_j h_j exp(t_j), den = sum w_j exp(t_j) with t_j the
// per-atom log-likelihood minus a common shift.
template <class F>
double atom_ratio(const GaussianPrior& g, double x, F&& h) {
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> t(g.atoms.size(), m);
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    if (g.weights[j] <= 0.0) continue;
    const double d = x - g.atoms[j];
    t[j] = std::log(g.weights[j]) - 0.5 * d * d;
    m = std::max(m, t[j]);
  }
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    if (t[j] == -std::numeric_limits<double>::infinity()) continue;
    const double e = std::exp(t[j] - m);
    num += h(g.atoms[j]) * e;
    den += e;
  }
  return num / den;
}

}  // namespace

double gaussian_bayes(const GaussianPrior& g, double x) {
  return atom_ratio(g, x, [](double a) { return a; });
}

double gaussian_bayes_tweedie(const GaussianPrior& g, double x) {
  // f'(x)/f(x) = sum_j w_j (a_j - x) phi(x - a_j) / f(x)
  return x + atom_ratio(g, x, [x](double a) { return a - x; });
}

double gaussian_bayes_reg(const GaussianPrior& g, double x, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("gaussian_bayes_reg: rho < 0");
  if (rho == 0.0) return gaussian_bayes(g, x);
  const double f = gaussian_marginal(g, x);
  if (f >= rho) return gaussian_bayes(g, x);
  double deriv = 0.0;  // f'(x), materialized: underflow is harmless here
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    const double d = x - g.atoms[j];
    deriv += g.weights[j] * (g.atoms[j] - x) *
             std::exp(-0.5 * d * d - kLogSqrt2Pi);
  }
  return x + deriv / rho;
}

GaussianPrior sample_gaussian_prior(const PoPSpec& spec, Rng& rng) {
  validate(spec);
  if (spec.kind != PopKind::UniformDirichlet)
    throw std::invalid_argument(
        "sample_gaussian_prior: only uniform_dirichlet is defined for the "
        "normal-means model");
  GaussianPrior g;
  g.support_bound = spec.A;
  g.atoms.resize(spec.k);
  for (double& a : g.atoms) a = rng.uniform(-spec.A, spec.A);
  g.weights.resize(spec.k);
  double sum = 0.0;
  for (double& w : g.weights) {
    w = rng.exponential();
    sum += w;
  }
  for (double& w : g.weights) w /= sum;
  return g;
}

double sample_gaussian_atom(const GaussianPrior& g, Rng& rng) {
  const double u = rng.uniform();
  double cdf = 0.0;
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    cdf += g.weights[j];
    if (u < cdf) return g.atoms[j];
  }
  return g.atoms.back();
}

std::vector<double> sample_gaussian_sequence(const GaussianPrior& g, int n, Rng& rng) {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = sample_gaussian_atom(g, rng) + rng.normal();
  return x;
}

double GaussianObsModel::log_marginal(const GaussianPrior& g, double x) {
  return gaussian_log_marginal(g, x);
}

double GaussianObsModel::posterior_mean(const GaussianPrior& g, double x) {
  return gaussian_bayes(g, x);
}

GaussianPosteriorState make_gaussian_state(std::vector<GaussianPrior> priors,
                                           int train_n) {
  if (priors.empty())
    throw std::invalid_argument("make_gaussian_state: no candidate priors");
  if (train_n < 1)
    throw std::invalid_argument("make_gaussian_state: train_n must be >= 1");
  auto cs = std::make_shared<CandidateSetT<GaussianObsModel>>();
  cs->priors = std::move(priors);
  for (const auto& g : cs->priors) {
    validate(g);
    cs->support_bound = std::max(cs->support_bound, g.support_bound);
  }
  GaussianPosteriorState state;
  state.candidates = std::move(cs);
  state.log_weights.assign(state.candidates->priors.size(),
                           -std::log(static_cast<double>(state.candidates->priors.size())));
  state.alpha = 1.0;
  state.train_n = train_n;
  return state;
}

GaussianPosteriorState init_gaussian_state(const PoPSpec& spec, int mc_draws,
                                           Rng& rng, int train_n) {
  if (mc_draws < 1)
    throw std::invalid_argument("init_gaussian_state: mc_draws must be >= 1");
  std::vector<GaussianPrior> priors;
  priors.reserve(mc_draws);
  for (int d = 0; d < mc_draws; ++d) priors.push_back(sample_gaussian_prior(spec, rng));
  return make_gaussian_state(std::move(priors), train_n);
}

GaussianPosteriorState posterior_update(const GaussianPosteriorState& state,
                                        const std::vector<double>& xs, double alpha) {
  return detail::posterior_update_t(state, xs, alpha);
}

std::vector<double> mixture_posterior_mean(const GaussianPosteriorState& state,
                                           const std::vector<double>& xs) {
  return detail::mixture_posterior_mean_t(state, xs);
}

std::vector<double> hb_estimate(const GaussianPosteriorState& state,
                                const std::vector<double>& xs) {
  return detail::hb_estimate_t(state, xs);
}

std::vector<double> hb_estimate_loo(const GaussianPosteriorState& state,
                                    const std::vector<double>& xs) {
  return detail::hb_estimate_loo_t(state, xs);
}

std::vector<double> lengen_estimate(const GaussianPosteriorState& state,
                                    const std::vector<double>& xs) {
  return detail::lengen_estimate_t(state, xs);
}

RegretReport gaussian_regret_eval(const GaussianEstimator& estimator,
                                  const std::string& name, const GaussianPrior& g0,
                                  int n, int reps, std::uint64_t seed, int workers) {
  validate(g0);
  if (reps < 2) throw std::invalid_argument("gaussian_regret_eval: reps must be >= 2");
  std::vector<double> per_rep(reps, std::numeric_limits<double>::quiet_NaN());
  std::atomic<int> failures{0};
  parallel_for(reps, workers, [&](int r) {
    Rng rng(derive_seed(seed, "gaussian_regret_eval", r));
    const auto xs = sample_gaussian_sequence(g0, n, rng);
    try {
      const auto est = estimator(xs);
      if (est.size() != xs.size())
        throw std::runtime_error("estimator returned wrong length");
      double acc = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = est[i] - gaussian_bayes(g0, xs[i]);
        acc += d * d;
      }
      per_rep[r] = acc / n;
    } catch (const std::exception&) {
      failures.fetch_add(1);
    }
  });
  if (failures.load() > 0) {
    std::cerr << "gaussian_regret_eval: estimator '" << name << "' failed on "
              << failures.load() << "/" << reps << " reps; excluded from mean\n";
    per_rep.erase(std::remove_if(per_rep.begin(), per_rep.end(),
                                 [](double v) { return std::isnan(v); }),
                  per_rep.end());
  }
  double mean = std::accumulate(per_rep.begin(), per_rep.end(), 0.0) /
                std::max<std::size_t>(per_rep.size(), 1);
  double se = 0.0;
  if (per_rep.size() > 1) {
    double ss = 0.0;
    for (double v : per_rep) ss += (v - mean) * (v - mean);
    se = std::sqrt(ss / (per_rep.size() - 1) / per_rep.size());
  }
  return RegretReport{name, n,  n, static_cast<int>(per_rep.size()),
                      mean, se, ""};
}

}  // namespace eb
