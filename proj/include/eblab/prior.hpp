#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace eb {

/// A finitely supported mixing distribution G = sum_j w_j delta_{atom_j}
/// on [0, support_bound]. Atoms are Poisson rates.
struct DiscretePrior {
  std::vector<double> atoms;
  std::vector<double> weights;
  double support_bound = 0.0;
};

/// Same shape for the normal-means model; atoms live in
/// [-support_bound, support_bound].
struct GaussianPrior {
  std::vector<double> atoms;
  std::vector<double> weights;
  double support_bound = 0.0;
};

inline constexpr double kWeightSumTol = 1e-12;

namespace detail {

inline void check_weights(const std::vector<double>& atoms,
                          const std::vector<double>& weights,
                          const char* what) {
  if (atoms.empty() || atoms.size() != weights.size())
    throw std::invalid_argument(std::string(what) +
                                ": atoms/weights must be nonempty and of equal length");
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0))
      throw std::invalid_argument(std::string(what) + ": negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kWeightSumTol)
    throw std::invalid_argument(std::string(what) + ": weights sum to " +
                                std::to_string(sum) + ", expected 1");
}

}  // namespace detail

inline void validate(const DiscretePrior& g) {
  detail::check_weights(g.atoms, g.weights, "DiscretePrior");
  if (!(g.support_bound > 0.0))
    throw std::invalid_argument("DiscretePrior: support_bound must be > 0");
  for (double a : g.atoms)
    if (!(a >= 0.0) || a > g.support_bound * (1.0 + 1e-12))
      throw std::invalid_argument("DiscretePrior: atom outside [0, support_bound]");
}

inline void validate(const GaussianPrior& g) {
  detail::check_weights(g.atoms, g.weights, "GaussianPrior");
  if (!(g.support_bound > 0.0))
    throw std::invalid_argument("GaussianPrior: support_bound must be > 0");
  for (double a : g.atoms)
    if (std::abs(a) > g.support_bound * (1.0 + 1e-12))
      throw std::invalid_argument("GaussianPrior: atom outside [-A, A]");
}

/// Point mass at lambda.
inline DiscretePrior delta_prior(double lambda, double support_bound) {
  DiscretePrior g{{lambda}, {1.0}, support_bound};
  validate(g);
  return g;
}

inline DiscretePrior make_prior(std::vector<double> atoms, std::vector<double> weights,
                                double support_bound) {
  DiscretePrior g{std::move(atoms), std::move(weights), support_bound};
  validate(g);
  return g;
}

inline GaussianPrior make_gaussian_prior(std::vector<double> atoms,
                                         std::vector<double> weights,
                                         double support_bound) {
  GaussianPrior g{std::move(atoms), std::move(weights), support_bound};
  validate(g);
  return g;
}

}  // namespace eb
