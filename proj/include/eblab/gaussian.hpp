#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "eblab/bench.hpp"
#include "eblab/hb.hpp"
#include "eblab/pop.hpp"
#include "eblab/prior.hpp"

namespace eb {

/// Mixture density f_G(x) = sum_j w_j phi(x - atom_j) with phi the standard
/// normal density; log-domain internally.
double gaussian_marginal(const GaussianPrior& g, double x);
double gaussian_log_marginal(const GaussianPrior& g, double x);

/// Posterior mean under G, as the direct sum over atoms.
double gaussian_bayes(const GaussianPrior& g, double x);

/// Tweedie form x + f_G'(x) / f_G(x) with the analytic derivative; agrees
/// with gaussian_bayes up to floating-point error.
double gaussian_bayes_tweedie(const GaussianPrior& g, double x);

/// Regularized Bayes estimator x + f_G'(x) / max(f_G(x), rho); rho = 0
/// reproduces gaussian_bayes.
double gaussian_bayes_reg(const GaussianPrior& g, double x, double rho);

/// UniformDirichlet draw with atoms Unif[-A, A] (the normal-means variant
/// of the Poisson sampler); other kinds are not defined for this model.
GaussianPrior sample_gaussian_prior(const PoPSpec& spec, Rng& rng);

/// theta draw and a full observation sequence X_i ~ N(theta_i, 1).
double sample_gaussian_atom(const GaussianPrior& g, Rng& rng);
std::vector<double> sample_gaussian_sequence(const GaussianPrior& g, int n, Rng& rng);

/// Candidate states for the Gaussian model; the hierarchical Bayes
/// machinery is shared with the Poisson case.
GaussianPosteriorState make_gaussian_state(std::vector<GaussianPrior> priors,
                                           int train_n = 1);
GaussianPosteriorState init_gaussian_state(const PoPSpec& spec, int mc_draws,
                                           Rng& rng, int train_n = 1);

GaussianPosteriorState posterior_update(const GaussianPosteriorState& state,
                                        const std::vector<double>& xs, double alpha);
std::vector<double> mixture_posterior_mean(const GaussianPosteriorState& state,
                                           const std::vector<double>& xs);
std::vector<double> hb_estimate(const GaussianPosteriorState& state,
                                const std::vector<double>& xs);
std::vector<double> hb_estimate_loo(const GaussianPosteriorState& state,
                                    const std::vector<double>& xs);
std::vector<double> lengen_estimate(const GaussianPosteriorState& state,
                                    const std::vector<double>& xs);

using GaussianEstimator =
    std::function<std::vector<double>(const std::vector<double>&)>;

/// Monte-Carlo regret against the Bayes rule, mirroring regret_eval with
/// X_i ~ N(theta_i, 1).
RegretReport gaussian_regret_eval(const GaussianEstimator& estimator,
                                  const std::string& name, const GaussianPrior& g0,
                                  int n, int reps, std::uint64_t seed,
                                  int workers = 0);

}  // namespace eb
