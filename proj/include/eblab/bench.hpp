#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "eblab/hb.hpp"
#include "eblab/pop.hpp"
#include "eblab/prior.hpp"

namespace eb {

/// One training batch: latents and observations of common length n.
struct Batch {
  std::vector<double> theta;
  std::vector<int> x;
};

/// Hierarchically generated training data plus its generation metadata.
struct Dataset {
  std::vector<Batch> batches;
  int n = 0;
  PoPSpec pop;
  std::uint64_t root_seed = 0;
};

struct RegretReport {
  std::string estimator_name;
  int n = 0;
  int n_test = 0;
  int reps = 0;
  double mean_regret = 0.0;
  double std_error = 0.0;
  std::string config_hash;
};

using PoissonEstimator = std::function<std::vector<double>(const std::vector<int>&)>;

/// Algorithm-1 generation: per batch G ~ Pi, theta ~ G^{otimes n},
/// X_i ~ Poi(theta_i). Batches use independent derived streams, so the
/// result is a pure function of (spec, n, M, seed).
Dataset gen_dataset(const PoPSpec& spec, int n, int M, std::uint64_t seed);

/// Monte-Carlo regret of an estimator against the Bayes rule theta_{G0}:
/// mean over reps of (1/n) || est(X) - theta_{G0}(X) ||^2 with
/// X ~ f_{G0}^{otimes n}. Estimator failures are counted, reported on
/// stderr, and excluded from the average.
RegretReport regret_eval(const PoissonEstimator& estimator,
                         const std::string& name, const DiscretePrior& g0,
                         int n, int reps, std::uint64_t seed, int workers = 0);

/// Regret of the length-generalization estimate of `state` across test
/// lengths, against theta_{G0}.
std::vector<RegretReport> length_gen_sweep(const PosteriorState& state,
                                           const DiscretePrior& g0,
                                           const std::vector<int>& n_test_list,
                                           int reps, std::uint64_t seed,
                                           int workers = 0);

struct AlphaFitResult {
  double alpha_star = 0.0;
  std::vector<std::pair<double, double>> curve;  // (alpha, msd)
};

/// Mean squared distance between a reference estimator and the
/// alpha-posterior estimate across an alpha grid, on sequences of length
/// n_test drawn from the state's own PoP marginal. Empty reference means
/// the state's length-generalization estimate.
AlphaFitResult alpha_fit(const PosteriorState& state, int n_test,
                         const std::vector<double>& alpha_grid, int reps,
                         std::uint64_t seed,
                         const PoissonEstimator& reference = nullptr,
                         int workers = 0);

struct ContractionRow {
  int n = 0;
  double median_h2 = 0.0;
  double q90_h2 = 0.0;
  int reps = 0;
};

/// Posterior-contraction diagnostic: squared Hellinger distance between
/// f_{G0} and the predictive pmf sum_j p_j f_{G_j} after conditioning on
/// X^{n-1} ~ f_{G0}; median and 90th percentile over reps, per n.
std::vector<ContractionRow> contraction_diag(const PosteriorState& state,
                                             const DiscretePrior& g0,
                                             const std::vector<int>& n_list,
                                             int reps, std::uint64_t seed,
                                             int workers = 0);

/// CSV emission (header row, LF endings, 17 significant digits) and the
/// matching readers.
void write_report(const std::vector<RegretReport>& reports,
                  const std::filesystem::path& path);
std::vector<RegretReport> read_report(const std::filesystem::path& path);

void write_alpha_csv(const std::vector<std::pair<int, AlphaFitResult>>& per_n_test,
                     int n, int reps, const std::string& config_hash,
                     const std::filesystem::path& path);
void write_contraction_csv(const std::vector<ContractionRow>& rows,
                           const std::string& config_hash,
                           const std::filesystem::path& path);

/// Framed binary dataset file ("EBDS", version byte, length-prefixed
/// little-endian arrays).
void write_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);

/// CSV export of a dataset for inspection: batch,index,theta,x rows.
void write_dataset_csv(const Dataset& ds, const std::filesystem::path& path);

/// Format a double with 17 significant digits (shortest round-trip wins
/// are not needed; the schema pins the digit count).
std::string format_real(double v);

}  // namespace eb
