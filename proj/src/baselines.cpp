#include "eblab/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "eblab/bench.hpp"
#include "eblab/mixture.hpp"

namespace eb {

std::vector<double> oracle_bayes(const DiscretePrior& g0, const std::vector<int>& xs) {
  std::map<int, double> cache;
  std::vector<double> out;
  out.reserve(xs.size());
  for (int x : xs) {
    auto it = cache.find(x);
    if (it == cache.end()) it = cache.emplace(x, bayes_posterior_mean(g0, x)).first;
    out.push_back(it->second);
  }
  return out;
}

std::vector<double> robbins(const std::vector<int>& xs,
                            std::optional<double> clip_bound) {
  std::map<int, int> counts;
  int max_x = 0;
  for (int x : xs) {
    if (x < 0) throw std::invalid_argument("robbins: negative observation");
    ++counts[x];
    max_x = std::max(max_x, x);
  }
  const double clip = clip_bound.value_or(max_x + 1.0);
  auto count_of = [&](int x) {
    auto it = counts.find(x);
    return it == counts.end() ? 0 : it->second;
  };
  std::vector<double> out;
  out.reserve(xs.size());
  for (int x : xs) {
    const double raw =
        (x + 1.0) * count_of(x + 1) / std::max(count_of(x), 1);
    out.push_back(std::clamp(raw, 0.0, clip));
  }
  return out;
}

NpmleResult npmle_grid(const std::vector<int>& xs, const NpmleConfig& cfg, double A) {
  if (xs.empty()) throw std::invalid_argument("npmle_grid: empty sample");
  if (!(A > 0.0)) throw std::invalid_argument("npmle_grid: A must be > 0");
  if (cfg.max_iters < 1 || !(cfg.tol > 0.0))
    throw std::invalid_argument("npmle_grid: bad config");
  const double step = cfg.grid_step > 0.0 ? cfg.grid_step : 0.025 * A;
  if (step > A) throw std::invalid_argument("npmle_grid: grid_step > A");

  std::vector<double> grid;
  const int top = static_cast<int>(std::floor(A / step + 1e-9));
  for (int j = 0; j <= top; ++j) grid.push_back(std::min(j * step, A));
  const int L = static_cast<int>(grid.size());

  // distinct observed values with counts
  std::map<int, int> counts;
  for (int x : xs) {
    if (x < 0) throw std::invalid_argument("npmle_grid: negative observation");
    ++counts[x];
  }
  const int D = static_cast<int>(counts.size());
  const double n = static_cast<double>(xs.size());

  std::vector<double> logpmf(D * L);
  std::vector<int> values;
  std::vector<double> cnt;
  values.reserve(D);
  cnt.reserve(D);
  for (const auto& [x, c] : counts) {
    values.push_back(x);
    cnt.push_back(c);
  }
  for (int d = 0; d < D; ++d)
    for (int l = 0; l < L; ++l) logpmf[d * L + l] = poisson_logpmf(values[d], grid[l]);

  std::vector<double> w(L, 1.0 / L);
  NpmleResult res;
  std::vector<double> resp(L);

  // one EM pass: fills w_next with the updated weights, returns the
  // log-likelihood of w_in, and reports the KKT residual of w_in over its
  // positive-weight atoms (avg[l]/w[l] is the gradient sum for atom l)
  auto em_pass = [&](const std::vector<double>& w_in, std::vector<double>& w_next,
                     double& kkt_out) {
    std::fill(w_next.begin(), w_next.end(), 0.0);
    double ll = 0.0;
    for (int d = 0; d < D; ++d) {
      double m = -std::numeric_limits<double>::infinity();
      for (int l = 0; l < L; ++l) {
        resp[l] = w_in[l] > 0.0 ? std::log(w_in[l]) + logpmf[d * L + l]
                                : -std::numeric_limits<double>::infinity();
        m = std::max(m, resp[l]);
      }
      double norm = 0.0;
      for (int l = 0; l < L; ++l) {
        resp[l] = std::exp(resp[l] - m);
        norm += resp[l];
      }
      ll += cnt[d] * (m + std::log(norm));
      for (int l = 0; l < L; ++l) w_next[l] += cnt[d] * resp[l] / norm;
    }
    kkt_out = 0.0;
    for (int l = 0; l < L; ++l) {
      if (w_in[l] > 0.0) kkt_out = std::max(kkt_out, w_next[l] / (w_in[l] * n));
      w_next[l] /= n;
    }
    return ll;
  };

  // Plain EM approaches the fixed-grid optimum sublinearly (it needs
  // ~10^4 steps to reach the KKT certificate on n ~ 10^3 samples), so the
  // multiplicative update is raised to an adaptive power s:
  //   w' propto w * g^s, g_l = (1/n) sum_i Poi(X_i; l) / f(X_i),
  // accepted only when the objective does not decrease (s = 1 is exactly
  // one EM step, so the recorded path stays monotone). Powers keep every
  // weight strictly positive; a zeroed atom could never re-enter.
  std::vector<double> w_em(L), w_pow(L), scratch(L);
  double prev_ll = -std::numeric_limits<double>::infinity();
  int em_steps = 0;
  double power = 1.0;
  constexpr double kMaxPower = 256.0;
  double kkt = 0.0, kkt_scratch = 0.0;
  while (em_steps < cfg.max_iters) {
    const double ll = em_pass(w, w_em, kkt);
    ++em_steps;
    res.log_likelihood_path.push_back(ll);
    if (ll - prev_ll < cfg.tol * std::abs(prev_ll) && kkt <= 1.0 + cfg.kkt_tol)
      break;
    prev_ll = ll;
    if (em_steps >= cfg.max_iters) {
      w = w_em;
      break;
    }

    if (power > 1.0) {
      // w_em[l] = w[l] * g_l, so w * g^s = w * (w_em / w)^s
      double mass = 0.0;
      for (int l = 0; l < L; ++l) {
        w_pow[l] = w[l] > 0.0
                       ? w[l] * std::pow(w_em[l] / w[l], power)
                       : 0.0;
        mass += w_pow[l];
      }
      if (mass > 0.0 && std::isfinite(mass)) {
        for (double& v : w_pow) v /= mass;
        const double ll_pow = em_pass(w_pow, scratch, kkt_scratch);
        ++em_steps;
        if (ll_pow >= ll) {
          res.log_likelihood_path.push_back(ll_pow);
          w = scratch;  // the EM step from the accepted iterate
          prev_ll = ll_pow;
          power = std::min(2.0 * power, kMaxPower);
          continue;
        }
      }
      power = 1.0;  // overshoot: fall back to the plain step
    } else {
      power = 2.0;
    }
    w = w_em;
  }
  res.iterations = em_steps;

  // normalize exactly and compute the KKT certificate over every grid atom
  double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& v : w) v /= wsum;
  res.prior = DiscretePrior{grid, w, A};

  double kkt_full = 0.0;
  std::vector<double> logf(D);
  for (int d = 0; d < D; ++d) logf[d] = log_marginal(res.prior, values[d]);
  for (int l = 0; l < L; ++l) {
    double s = 0.0;
    for (int d = 0; d < D; ++d)
      s += cnt[d] * std::exp(logpmf[d * L + l] - logf[d]);
    kkt_full = std::max(kkt_full, s / n);
  }
  res.kkt_residual = kkt_full;
  return res;
}

namespace {

struct VectorHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::size_t h = 1469598103934665603ULL;
    for (int x : v) {
      h ^= static_cast<std::size_t>(x) + 0x9e3779b9;
      h *= 1099511628211ULL;
    }
    return h;
  }
};

// stable argsort by value, ties broken by original index
std::vector<int> stable_order(const std::vector<int>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return v[a] < v[b]; });
  return idx;
}

}  // namespace

std::vector<double> erm_type_match(const Dataset& train, const std::vector<int>& xs) {
  const int n = static_cast<int>(xs.size());
  if (train.n != n)
    throw std::invalid_argument("erm_type_match: training batch length != |X|");

  std::unordered_map<std::vector<int>, std::vector<int>, VectorHash> index;
  for (std::size_t m = 0; m < train.batches.size(); ++m) {
    std::vector<int> key = train.batches[m].x;
    std::sort(key.begin(), key.end());
    index[std::move(key)].push_back(static_cast<int>(m));
  }

  std::vector<int> key = xs;
  std::sort(key.begin(), key.end());
  const auto hit = index.find(key);
  if (hit == index.end()) {
    // empty S(X): deterministic fallback at the pooled mean of all thetas
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& b : train.batches) {
      for (double t : b.theta) sum += t;
      count += b.theta.size();
    }
    const double mean = count > 0 ? sum / count : 0.0;
    return std::vector<double>(n, std::clamp(mean, 0.0, train.pop.A));
  }

  const auto order_x = stable_order(xs);
  std::vector<double> avg(n, 0.0);
  for (int m : hit->second) {
    const auto& batch = train.batches[m];
    const auto order_b = stable_order(batch.x);
    for (int r = 0; r < n; ++r) avg[order_x[r]] += batch.theta[order_b[r]];
  }

  // a permutation-invariant function must assign equal outputs to tied
  // inputs, so the minimizer is constant on each tie group: average the
  // aligned sums within groups of equal observation value
  std::map<int, std::pair<double, int>> group;  // value -> (sum, count)
  for (int i = 0; i < n; ++i) {
    auto& [sum, count] = group[xs[i]];
    sum += avg[i];
    ++count;
  }
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    const auto& [sum, count] = group[xs[i]];
    out[i] = std::clamp(sum / (count * hit->second.size()), 0.0, train.pop.A);
  }
  return out;
}

}  // namespace eb
