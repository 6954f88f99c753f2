#pragma once

#include <vector>

#include "eblab/prior.hpp"
#include "eblab/rng.hpp"

namespace eb {

enum class PopKind { UniformDirichlet, GridMultinomial, Neural, Finite };

/// Specification of a prior-on-priors: a distribution over mixing
/// distributions G on [0, A]. The training data generator, the
/// hierarchical Bayes candidate sets, and the test-prior generators all
/// draw from one of these.
struct PoPSpec {
  PopKind kind = PopKind::UniformDirichlet;
  double A = 1.0;
  int k = 1;                  // atom count (UniformDirichlet)
  double grid_step = 0.1;     // GridMultinomial
  std::vector<DiscretePrior> components;  // Finite
  int neural_mixture_count = 4;
  int neural_hidden_dim = 8;
  int neural_grid_points = 512;
  bool neural_scale_to_support = true;
};

void validate(const PoPSpec& spec);

/// One draw G ~ Pi.
///   UniformDirichlet: k atoms ~ Unif[0, A], weights ~ Dir(1, ..., 1).
///   GridMultinomial: atoms fixed at {grid_step * j}, weights ~ Dir(1, ..., 1).
///   Finite:          uniformly one of the components.
///   Neural:          see neural_prior.
DiscretePrior sample_prior(const PoPSpec& spec, Rng& rng);

enum class Activation { Gelu, Relu, Selu, Celu, Silu, Tanh, TanhShrink };

double apply_activation(Activation act, double x);

/// Pushforward of a uniform grid on [0, A] through
/// x -> sigmoid(10 * w2 . act(w1 * x)); base outputs live in [0, 1] and are
/// rescaled to [0, A] when scale_to_support is set. Exposed separately so
/// fixed weight matrices can be pushed through (w2 = 0 collapses the
/// output to a point mass at 1/2 of the support).
DiscretePrior neural_pushforward(const std::vector<double>& w1,
                                 const std::vector<double>& w2, Activation act,
                                 double A, int grid_points,
                                 bool scale_to_support);

/// Mixture of `mixture_count` random two-layer pushforwards with uniform
/// mixture weights; random N(0,1) weight matrices and a random activation
/// per component.
DiscretePrior neural_prior(Rng& rng, double A, int hidden_dim, int grid_points,
                           int mixture_count = 4, bool scale_to_support = true);

/// Condition G on [0, cutoff]: drop atoms above the cutoff and renormalize.
/// Throws std::domain_error when no mass survives.
DiscretePrior truncate_prior(const DiscretePrior& g, double cutoff);

/// Monte-Carlo estimate of Pi{G' : chi2(f_target || f_G') <= eps}. Finite
/// specs are enumerated exactly. A relaxed-threshold diagnostic: mass at
/// the tiny radii appearing in theory is not measurable by sampling.
double pop_mass_estimate(const PoPSpec& spec, const DiscretePrior& target,
                         double eps, int draws, Rng& rng);

/// theta draw from a discrete prior (inverse-CDF over the weights).
double sample_atom(const DiscretePrior& g, Rng& rng);

/// X^n ~ f_G^{otimes n}: per coordinate theta ~ G then X ~ Poi(theta).
std::vector<int> sample_poisson_sequence(const DiscretePrior& g, int n, Rng& rng);

}  // namespace eb
