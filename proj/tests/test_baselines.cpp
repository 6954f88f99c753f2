#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eblab/baselines.hpp"
#include "eblab/bench.hpp"
#include "eblab/hb.hpp"
#include "eblab/mixture.hpp"
#include "oracles.hpp"

using namespace eb;

TEST_CASE("oracle_bayes delegates to the posterior mean") {
  const auto g = make_prior({1.0, 3.0}, {0.5, 0.5}, 5.0);
  const std::vector<int> xs{0, 2, 5, 1};
  const auto est = oracle_bayes(g, xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(est[i] == bayes_posterior_mean(g, xs[i]));

  const auto flat = oracle_bayes(delta_prior(2.0, 5.0), xs);
  for (double v : flat) CHECK(v == doctest::Approx(2.0));
}

TEST_CASE("robbins count arithmetic") {
  CHECK(robbins({0, 1}) == std::vector<double>{1.0, 0.0});
  // constant sequence: numerator count is empty
  CHECK(robbins({4, 4, 4}) == std::vector<double>{0.0, 0.0, 0.0});

  // permutation invariance of the multiset map
  Rng rng(3);
  std::vector<int> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(rng.poisson(3.0));
  auto est = robbins(xs);
  std::vector<int> perm(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) perm[i] = static_cast<int>(i);
  for (std::size_t i = perm.size() - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.below(i + 1)]);
  std::vector<int> xs2;
  for (int i : perm) xs2.push_back(xs[i]);
  const auto est2 = robbins(xs2);
  for (std::size_t i = 0; i < perm.size(); ++i)
    CHECK(est2[i] == est[perm[i]]);

  // clipping keeps outputs within [0, bound]
  const auto clipped = robbins(xs, 2.0);
  for (double v : clipped) {
    CHECK(v >= 0.0);
    CHECK(v <= 2.0);
  }

  // default clip bound is max(X) + 1
  const auto spiky = robbins({5, 6, 6, 6});  // raw estimate at 5 is 18
  CHECK(spiky[0] == doctest::Approx(7.0));
}

TEST_CASE("npmle on all-zero data concentrates at zero") {
  NpmleConfig cfg;
  const auto res = npmle_grid(std::vector<int>(50, 0), cfg, 5.0);
  CHECK(res.prior.atoms[0] == 0.0);
  CHECK(res.prior.weights[0] > 0.99);
  CHECK(res.log_likelihood_path.back() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("npmle EM is monotone and satisfies the KKT certificate") {
  Rng rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const auto g0 = oracle::random_prior(rng, 3, 5.0);
    const auto xs = sample_poisson_sequence(g0, 400, rng);
    NpmleConfig cfg;
    const auto res = npmle_grid(xs, cfg, 5.0);
    for (std::size_t t = 1; t < res.log_likelihood_path.size(); ++t)
      CHECK(res.log_likelihood_path[t] >= res.log_likelihood_path[t - 1] - 1e-9);
    CHECK(res.kkt_residual <= 1.0 + 1e-3);
    validate(res.prior);
  }
}

TEST_CASE("npmle recovers the marginal at n = 2000") {
  const auto g0 = make_prior({1.0, 4.0}, {0.5, 0.5}, 5.0);
  Rng rng(2024);
  const auto xs = sample_poisson_sequence(g0, 2000, rng);
  const auto res = npmle_grid(xs, NpmleConfig{}, 5.0);
  const double tv = divergence(marginal_pmf(res.prior), marginal_pmf(g0),
                               Divergence::TV);
  CHECK(tv <= 0.05);
}

TEST_CASE("erm_type_match aligns matching types") {
  Dataset train;
  train.n = 3;
  train.pop.A = 6.0;
  // one batch whose x multiset matches the query
  train.batches.push_back(Batch{{1.0, 2.0, 3.0}, {5, 0, 2}});
  train.batches.push_back(Batch{{4.0, 4.0, 4.0}, {9, 9, 9}});

  // query is a permutation of batch 0: outputs follow the alignment
  const std::vector<int> xs{0, 2, 5};
  const auto est = erm_type_match(train, xs);
  CHECK(est == std::vector<double>{2.0, 3.0, 1.0});

  // no matching type: pooled-mean fallback
  const auto fallback = erm_type_match(train, {7, 7, 7});
  const double pooled = (1.0 + 2.0 + 3.0 + 4.0 * 3) / 6.0;
  for (double v : fallback) CHECK(v == doctest::Approx(pooled));

  CHECK_THROWS_AS(erm_type_match(train, {1, 2}), std::invalid_argument);
}

TEST_CASE("erm averages all matching batches with clipping") {
  Dataset train;
  train.n = 2;
  train.pop.A = 3.0;
  train.batches.push_back(Batch{{0.0, 2.0}, {1, 4}});
  train.batches.push_back(Batch{{8.0, 1.0}, {4, 1}});  // theta 8 clips to 3
  const auto est = erm_type_match(train, {1, 4});
  CHECK(est[0] == doctest::Approx((0.0 + 1.0) / 2.0));
  CHECK(est[1] == doctest::Approx(3.0));  // (2 + 8)/2 = 5 -> clip at A = 3
  // clipping applies coordinatewise after averaging, in query order
  const auto est2 = erm_type_match(train, {4, 1});
  CHECK(est2[0] == doctest::Approx(3.0));
  CHECK(est2[1] == doctest::Approx(0.5));
}

TEST_CASE("erm is permutation-equivariant") {
  PoPSpec pop;
  pop.kind = PopKind::Finite;
  pop.A = 5.0;
  pop.components = {make_prior({1.0, 4.0}, {0.5, 0.5}, 5.0)};
  const int n = 6;
  const auto train = gen_dataset(pop, n, 2000, 55);
  Rng rng(56);
  for (int trial = 0; trial < 20; ++trial) {
    const auto xs = sample_poisson_sequence(pop.components[0], n, rng);
    const auto est = erm_type_match(train, xs);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = n - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.below(i + 1)]);
    std::vector<int> xs_perm(n);
    for (int i = 0; i < n; ++i) xs_perm[i] = xs[perm[i]];
    const auto est_perm = erm_type_match(train, xs_perm);
    for (int i = 0; i < n; ++i)
      CHECK(est_perm[i] == doctest::Approx(est[perm[i]]).epsilon(1e-12));
  }
}

TEST_CASE("erm approaches the hierarchical Bayes estimate as M grows") {
  PoPSpec pop;
  pop.kind = PopKind::Finite;
  pop.A = 5.0;
  pop.components = {make_prior({0.5, 1.5}, {0.5, 0.5}, 5.0),
                    make_prior({3.0, 4.5}, {0.5, 0.5}, 5.0)};
  const int n = 4;
  const auto state = make_state(pop.components, n);

  Rng rng(77);
  double msd_small = 0.0, msd_large = 0.0;
  const auto small = gen_dataset(pop, n, 100, 1001);
  const auto large = gen_dataset(pop, n, 10000, 1002);
  const int queries = 200;
  for (int q = 0; q < queries; ++q) {
    const auto& g = pop.components[rng.below(2)];
    const auto xs = sample_poisson_sequence(g, n, rng);
    const auto want = hb_estimate(state, xs);
    const auto a = erm_type_match(small, xs);
    const auto b = erm_type_match(large, xs);
    for (int i = 0; i < n; ++i) {
      msd_small += (a[i] - want[i]) * (a[i] - want[i]);
      msd_large += (b[i] - want[i]) * (b[i] - want[i]);
    }
  }
  CHECK(msd_large < msd_small);
}
