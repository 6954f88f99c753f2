#pragma once

#include <span>
#include <vector>

#include "eblab/prior.hpp"

namespace eb {

/// log Poi(x; lambda). Poi(.; 0) is the point mass at 0, so the result is
/// 0 for x = 0 and -infinity otherwise.
double poisson_logpmf(int x, double lambda);

/// Truncation level such that the Poisson tail beyond it is < 1e-12 for
/// every rate <= support_bound.
int default_x_max(double support_bound);

/// Marginal pmf of a Poisson mixture, materialized on {0, ..., x_max}.
/// tail_mass_bound carries whatever mass the truncation dropped, so the
/// values plus the tail always account for the full distribution.
struct TruncatedPmf {
  std::vector<double> values;
  int x_max = 0;
  double tail_mass_bound = 0.0;
};

TruncatedPmf marginal_pmf(const DiscretePrior& g, int x_max);
TruncatedPmf marginal_pmf(const DiscretePrior& g);  // default_x_max(A)

/// log f_G(x), computed by log-sum-exp over the atoms.
double log_marginal(const DiscretePrior& g, int x);

/// Posterior mean E_G[theta | X = x], the Bayes estimator under squared
/// loss, as the direct sum over atoms. Throws std::domain_error when
/// f_G(x) = 0 (only possible for G = delta_0 and x > 0).
double bayes_posterior_mean(const DiscretePrior& g, int x);

/// The same quantity via the ratio identity (x+1) f_G(x+1) / f_G(x).
double bayes_posterior_mean_ratio(const DiscretePrior& g, int x);

/// E_G[theta^p | X = x] for integer p >= 1.
double posterior_moment(const DiscretePrior& g, int x, int p);

enum class Divergence { TV, H2, KL, CHI2 };

/// Standard discrete divergences over the common support {0, ..., x_max}.
/// KL and CHI2 use the 0^2/0 = 0 convention and return +infinity when
/// Q(x) = 0 < P(x). Throws std::invalid_argument on mismatched supports.
double divergence(const TruncatedPmf& p, const TruncatedPmf& q, Divergence kind);

/// Exact TV(Poi(mu), Poi(nu)) by truncated summation.
double poisson_tv(double mu, double nu);

/// chi^2(Poi(lambda) || Poi(lambda')) in closed form,
/// exp((lambda - lambda')^2 / lambda') - 1. Infinite when lambda' = 0 and
/// lambda > 0; zero when both rates are 0.
double poisson_chi2(double lambda, double lambda_prime);

struct MixtureDivergenceBounds {
  double tv_bound = 0.0;
  double chi2_bound = 0.0;
};

/// Index-paired upper bounds on TV(f_G1, f_G2) and chi^2(f_G1 || f_G2):
///   tv   <= sum_j |w_j - w'_j| + max_j TV(Poi(l_j), Poi(l'_j))
///   chi2 <= (1 + chi2(w || w')) (1 + max_j chi2(Poi(l_j) || Poi(l'_j))) - 1
/// Requires equal atom counts.
MixtureDivergenceBounds mixture_divergence_bounds(const DiscretePrior& g1,
                                                  const DiscretePrior& g2);

/// Raw moments E_G[theta^r] for r = 0..highest.
std::vector<double> raw_moments(const DiscretePrior& g, int highest);

/// Reduce G to a quadrature measure with at most ceil((L+1)/2) atoms whose
/// first L moments match G's. Built by the three-term-recurrence /
/// Jacobi-matrix construction on the discrete measure. If G already has no
/// more atoms than that, or the construction degenerates numerically
/// (G effectively supported on fewer points), G is returned unchanged.
DiscretePrior moment_match(const DiscretePrior& g, int L);

/// Numerically stable log(sum(exp(v))) over a span; -infinity for empty
/// input or all--infinity entries.
double log_sum_exp(std::span<const double> v);

}  // namespace eb
