#pragma once

#include <optional>
#include <vector>

#include "eblab/prior.hpp"

namespace eb {

struct Dataset;  // bench.hpp

/// Bayes rule under a known prior, applied coordinatewise.
std::vector<double> oracle_bayes(const DiscretePrior& g0, const std::vector<int>& xs);

/// Robbins's f-modeling rule (x+1) N(x+1) / max(N(x), 1) from the empirical
/// counts of the sequence itself, clipped to [0, clip_bound]. Without an
/// explicit bound the clip is max(X) + 1.
std::vector<double> robbins(const std::vector<int>& xs,
                            std::optional<double> clip_bound = std::nullopt);

struct NpmleConfig {
  double grid_step = 0.0;  // 0 means 0.025 * A
  int max_iters = 2000;
  double tol = 1e-9;      // relative log-likelihood improvement
  double kkt_tol = 1e-3;  // first-order certificate: residual <= 1 + kkt_tol
};

struct NpmleResult {
  DiscretePrior prior;
  std::vector<double> log_likelihood_path;  // objective after each iteration
  double kkt_residual = 0.0;  // max_l (1/n) sum_i Poi(X_i; l) / f(X_i)
  int iterations = 0;
};

/// Fixed-grid nonparametric MLE of the mixing distribution by EM over the
/// atom grid {0, grid_step, ..., A}.
NpmleResult npmle_grid(const std::vector<int>& xs, const NpmleConfig& cfg, double A);

/// The closed-form permutation-invariant ERM: average the type-aligned
/// theta vectors of every training batch whose multiset of observations
/// equals that of xs, clipped to [0, A]; with no matching batch, the
/// pooled mean of all training thetas in every coordinate.
std::vector<double> erm_type_match(const Dataset& train, const std::vector<int>& xs);

}  // namespace eb
