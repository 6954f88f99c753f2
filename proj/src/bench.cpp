#include "eblab/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <numeric>

#include "eblab/baselines.hpp"
#include "eblab/mixture.hpp"
#include "eblab/parallel.hpp"

namespace eb {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Dataset gen_dataset(const PoPSpec& spec, int n, int M, std::uint64_t seed) {
  validate(spec);
  if (n < 1 || M < 1) throw std::invalid_argument("gen_dataset: n, M must be >= 1");
  Dataset ds;
  ds.n = n;
  ds.pop = spec;
  ds.root_seed = seed;
  ds.batches.resize(M);
  for (int m = 0; m < M; ++m) {
    Rng rng(derive_seed(seed, "gen_dataset", m));
    const DiscretePrior g = sample_prior(spec, rng);
    Batch& b = ds.batches[m];
    b.theta.resize(n);
    b.x.resize(n);
    for (int i = 0; i < n; ++i) {
      b.theta[i] = sample_atom(g, rng);
      b.x[i] = rng.poisson(b.theta[i]);
    }
  }
  return ds;
}

namespace {

struct MeanStderr {
  double mean = 0.0;
  double std_error = 0.0;
};

MeanStderr summarize(const std::vector<double>& v) {
  MeanStderr out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std_error = std::sqrt(ss / (v.size() - 1) / v.size());
  }
  return out;
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - lo;
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

double mean_sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc / a.size();
}

}  // namespace

RegretReport regret_eval(const PoissonEstimator& estimator, const std::string& name,
                         const DiscretePrior& g0, int n, int reps,
                         std::uint64_t seed, int workers) {
  validate(g0);
  if (reps < 2) throw std::invalid_argument("regret_eval: reps must be >= 2");
  std::vector<double> per_rep(reps, std::numeric_limits<double>::quiet_NaN());
  std::atomic<int> failures{0};
  parallel_for(reps, workers, [&](int r) {
    Rng rng(derive_seed(seed, "regret_eval", r));
    const auto xs = sample_poisson_sequence(g0, n, rng);
    const auto bayes = oracle_bayes(g0, xs);
    try {
      const auto est = estimator(xs);
      if (est.size() != xs.size())
        throw std::runtime_error("estimator returned wrong length");
      per_rep[r] = mean_sq_distance(est, bayes);
    } catch (const std::exception& e) {
      failures.fetch_add(1);
    }
  });
  if (failures.load() > 0) {
    std::cerr << "regret_eval: estimator '" << name << "' failed on "
              << failures.load() << "/" << reps << " reps; excluded from mean\n";
    per_rep.erase(std::remove_if(per_rep.begin(), per_rep.end(),
                                 [](double v) { return std::isnan(v); }),
                  per_rep.end());
  }
  const auto s = summarize(per_rep);
  return RegretReport{name, n, n, static_cast<int>(per_rep.size()),
                      s.mean, s.std_error, ""};
}

std::vector<RegretReport> length_gen_sweep(const PosteriorState& state,
                                           const DiscretePrior& g0,
                                           const std::vector<int>& n_test_list,
                                           int reps, std::uint64_t seed,
                                           int workers) {
  if (n_test_list.empty())
    throw std::invalid_argument("length_gen_sweep: empty n_test list");
  std::vector<RegretReport> out;
  for (int n_test : n_test_list) {
    std::vector<double> per_rep(reps);
    parallel_for(reps, workers, [&](int r) {
      Rng rng(derive_seed(seed, "length_gen", static_cast<std::uint64_t>(n_test) * 1000003ULL + r));
      const auto xs = sample_poisson_sequence(g0, n_test, rng);
      const auto est = lengen_estimate(state, xs);
      per_rep[r] = mean_sq_distance(est, oracle_bayes(g0, xs));
    });
    const auto s = summarize(per_rep);
    out.push_back(RegretReport{"hb_lengen", state.train_n, n_test, reps, s.mean,
                               s.std_error, ""});
  }
  return out;
}

AlphaFitResult alpha_fit(const PosteriorState& state, int n_test,
                         const std::vector<double>& alpha_grid, int reps,
                         std::uint64_t seed, const PoissonEstimator& reference,
                         int workers) {
  if (alpha_grid.empty()) throw std::invalid_argument("alpha_fit: empty alpha grid");
  for (double a : alpha_grid)
    if (!(a > 0.0) || a > 1.0)
      throw std::invalid_argument("alpha_fit: alpha grid must lie in (0, 1]");
  if (reps < 1) throw std::invalid_argument("alpha_fit: reps must be >= 1");

  const PoissonEstimator ref =
      reference ? reference
                : PoissonEstimator([&state](const std::vector<int>& xs) {
                    return lengen_estimate(state, xs);
                  });

  std::vector<std::vector<double>> msd(reps, std::vector<double>(alpha_grid.size()));
  parallel_for(reps, workers, [&](int r) {
    Rng rng(derive_seed(seed, "alpha_fit", r));
    // X ~ Pi-marginal: one candidate by the state's weights, then f_G
    const double u = rng.uniform();
    double cdf = 0.0;
    std::size_t pick = state.size() - 1;
    for (std::size_t j = 0; j < state.size(); ++j) {
      cdf += std::exp(state.log_weights[j]);
      if (u < cdf) {
        pick = j;
        break;
      }
    }
    const auto xs =
        sample_poisson_sequence(state.candidates->priors[pick], n_test, rng);
    const auto want = ref(xs);
    for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
      const auto tempered = posterior_update(state, xs, alpha_grid[a]);
      msd[r][a] = mean_sq_distance(mixture_posterior_mean(tempered, xs), want);
    }
  });

  AlphaFitResult out;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < alpha_grid.size(); ++a) {
    double m = 0.0;
    for (int r = 0; r < reps; ++r) m += msd[r][a];
    m /= reps;
    out.curve.emplace_back(alpha_grid[a], m);
    if (m < best) {
      best = m;
      out.alpha_star = alpha_grid[a];
    }
  }
  return out;
}

std::vector<ContractionRow> contraction_diag(const PosteriorState& state,
                                             const DiscretePrior& g0,
                                             const std::vector<int>& n_list,
                                             int reps, std::uint64_t seed,
                                             int workers) {
  if (n_list.empty()) throw std::invalid_argument("contraction_diag: empty n list");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (n_list[i] <= n_list[i - 1])
      throw std::invalid_argument("contraction_diag: n list must be increasing");

  const auto& cs = *state.candidates;
  const int x_max = std::max(cs.x_max, default_x_max(g0.support_bound));
  const auto truth = marginal_pmf(g0, x_max);

  // candidate pmfs in the linear domain, shared read-only across reps
  std::vector<std::vector<double>> pmf(cs.priors.size());
  for (std::size_t j = 0; j < cs.priors.size(); ++j) {
    pmf[j].resize(x_max + 1);
    for (int x = 0; x <= x_max; ++x) pmf[j][x] = std::exp(cs.log_f(j, x));
  }

  std::vector<ContractionRow> out;
  for (int n : n_list) {
    if (n < 1) throw std::invalid_argument("contraction_diag: n must be >= 1");
    std::vector<double> h2(reps);
    parallel_for(reps, workers, [&](int r) {
      Rng rng(derive_seed(seed, "contraction", static_cast<std::uint64_t>(n) * 1000003ULL + r));
      const auto xs = sample_poisson_sequence(g0, n - 1, rng);
      const auto post = posterior_update(state, xs, 1.0);
      // predictive pmf under the posterior over candidates
      TruncatedPmf pred;
      pred.x_max = x_max;
      pred.values.assign(x_max + 1, 0.0);
      double total = 0.0;
      for (std::size_t j = 0; j < post.size(); ++j) {
        const double p = std::exp(post.log_weights[j]);
        if (p <= 0.0) continue;
        for (int x = 0; x <= x_max; ++x) pred.values[x] += p * pmf[j][x];
      }
      for (double v : pred.values) total += v;
      pred.tail_mass_bound = std::max(0.0, 1.0 - total);
      h2[r] = divergence(truth, pred, Divergence::H2);
    });
    out.push_back(ContractionRow{n, quantile(h2, 0.5), quantile(h2, 0.9), reps});
  }
  return out;
}

}  // namespace eb
