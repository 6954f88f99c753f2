#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "eblab/hb.hpp"
#include "eblab/mixture.hpp"
#include "oracles.hpp"

using namespace eb;

namespace {

PosteriorState two_prior_state(int train_n = 1) {
  return make_state({delta_prior(1.0, 6.0), delta_prior(5.0, 6.0)}, train_n);
}

PosteriorState random_state(Rng& rng, int m, double bound, int train_n = 1) {
  std::vector<DiscretePrior> priors;
  for (int j = 0; j < m; ++j)
    priors.push_back(oracle::random_prior(rng, 2 + static_cast<int>(rng.below(3)), bound));
  return make_state(std::move(priors), train_n);
}

}  // namespace

TEST_CASE("init_state shapes") {
  PoPSpec finite;
  finite.kind = PopKind::Finite;
  finite.A = 6.0;
  finite.components = {delta_prior(1.0, 6.0), delta_prior(5.0, 6.0)};
  Rng rng(1);
  const auto s2 = init_state(finite, 0, rng);
  CHECK(s2.size() == 2);
  CHECK(std::exp(s2.log_weights[0]) == doctest::Approx(0.5).epsilon(1e-12));

  finite.components.resize(1);
  const auto s1 = init_state(finite, 0, rng);
  CHECK(s1.size() == 1);
  CHECK(s1.log_weights[0] == doctest::Approx(0.0));

  PoPSpec ud;
  ud.kind = PopKind::UniformDirichlet;
  ud.A = 2.0;
  ud.k = 3;
  const auto s = init_state(ud, 4096, rng);
  CHECK(s.size() == 4096);
  const double lse = log_sum_exp(s.log_weights);
  CHECK(std::abs(lse) <= 1e-9);
}

TEST_CASE("posterior_update two-candidate closed form") {
  const auto state = two_prior_state();
  const std::vector<int> xs{1, 1, 1};
  const auto post = posterior_update(state, xs, 1.0);
  // L_j = prod_i Poi(x_i; lambda_j)
  const double l1 = std::pow(oracle::poisson_pmf_recursive(1, 1.0), 3);
  const double l2 = std::pow(oracle::poisson_pmf_recursive(1, 5.0), 3);
  CHECK(std::exp(post.log_weights[0]) ==
        doctest::Approx(l1 / (l1 + l2)).epsilon(1e-12));
  CHECK(std::exp(post.log_weights[0]) ==
        doctest::Approx(0.9992325628679224).epsilon(1e-12));

  // single-prior state: weights pinned at 1
  const auto single = make_state({delta_prior(2.0, 6.0)});
  const auto post1 = posterior_update(single, xs, 1.0);
  CHECK(post1.log_weights[0] == doctest::Approx(0.0));

  CHECK_THROWS_AS(posterior_update(state, xs, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(posterior_update(state, xs, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(posterior_update(state, {1, -2}, 1.0), std::invalid_argument);

  // all candidates at zero likelihood: delta_0 candidates, positive obs
  const auto zeros = make_state({delta_prior(0.0, 1.0)});
  CHECK_THROWS_AS(posterior_update(zeros, {3}, 1.0), std::domain_error);
}

TEST_CASE("posterior weights are exchangeable and alpha -> 0 recovers the PoP") {
  Rng rng(5);
  const auto state = random_state(rng, 4, 5.0);
  std::vector<int> xs{0, 3, 1, 4, 2, 1};
  const auto a = posterior_update(state, xs, 0.7);
  std::vector<int> perm{4, 0, 5, 2, 1, 3};
  std::vector<int> xs_perm;
  for (int i : perm) xs_perm.push_back(xs[i]);
  const auto b = posterior_update(state, xs_perm, 0.7);
  for (std::size_t j = 0; j < state.size(); ++j)
    CHECK(a.log_weights[j] == doctest::Approx(b.log_weights[j]).epsilon(1e-13));

  const auto tiny = posterior_update(state, xs, 1e-8);
  for (std::size_t j = 0; j < state.size(); ++j)
    CHECK(std::abs(tiny.log_weights[j] - state.log_weights[j]) <= 1e-6);
}

TEST_CASE("hb_estimate collapses to the Bayes rule for a single prior") {
  const auto g = make_prior({0.5, 2.0, 4.0}, {0.3, 0.4, 0.3}, 6.0);
  const auto state = make_state({g});
  const std::vector<int> xs{0, 1, 2, 5, 3, 0};
  const auto est = hb_estimate(state, xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(est[i] == doctest::Approx(bayes_posterior_mean(g, xs[i])).epsilon(1e-14));
}

TEST_CASE("hb_estimate is permutation-equivariant and bounded by [0, A]") {
  Rng rng(9);
  const auto state = random_state(rng, 5, 5.0);
  std::vector<int> xs{2, 0, 7, 1, 1, 3};
  const auto est = hb_estimate(state, xs);
  for (double v : est) {
    CHECK(v >= 0.0);
    CHECK(v <= 5.0);
  }
  std::vector<int> perm{3, 1, 4, 0, 5, 2};
  std::vector<int> xs_perm;
  for (int i : perm) xs_perm.push_back(xs[i]);
  const auto est_perm = hb_estimate(state, xs_perm);
  for (std::size_t i = 0; i < perm.size(); ++i)
    CHECK(est_perm[i] == doctest::Approx(est[perm[i]]).epsilon(1e-13));
}

TEST_CASE("hb_estimate equals the leave-one-out characterization") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const auto state = random_state(rng, 5, 4.0);
    std::vector<int> xs;
    const int n = 3 + static_cast<int>(rng.below(6));
    const auto& g = state.candidates->priors[rng.below(state.size())];
    for (int i = 0; i < n; ++i) xs.push_back(rng.poisson(sample_atom(g, rng)));
    const auto direct = hb_estimate(state, xs);
    const auto loo = hb_estimate_loo(state, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
      CHECK(std::abs(direct[i] - loo[i]) <= 1e-9);
  }
}

TEST_CASE("leave-one-out with n = 1 is the Bayes rule of the mean mixture") {
  const auto g1 = make_prior({1.0, 2.0}, {0.6, 0.4}, 6.0);
  const auto g2 = make_prior({4.0, 5.0}, {0.5, 0.5}, 6.0);
  const auto state = make_state({g1, g2});
  // the conditioning set is empty, so G_1 is the uniform mixture of g1, g2
  const auto mix = make_prior({1.0, 2.0, 4.0, 5.0}, {0.3, 0.2, 0.25, 0.25}, 6.0);
  for (int x : {0, 1, 3, 6}) {
    const auto loo = hb_estimate_loo(state, {x});
    CHECK(loo[0] == doctest::Approx(bayes_posterior_mean(mix, x)).epsilon(1e-12));
  }
  // and a single-prior state reduces to theta_G
  const auto single = make_state({g1});
  const auto loo = hb_estimate_loo(single, {2, 4});
  CHECK(loo[0] == doctest::Approx(bayes_posterior_mean(g1, 2)).epsilon(1e-12));
  CHECK(loo[1] == doctest::Approx(bayes_posterior_mean(g1, 4)).epsilon(1e-12));
}

TEST_CASE("hb_estimate_loo survives a candidate with a likelihood hole") {
  // delta_0 candidate assigns zero likelihood to any positive obs
  const auto state = make_state({delta_prior(0.0, 6.0), delta_prior(2.0, 6.0)});
  const std::vector<int> xs{3, 0, 1};
  const auto direct = hb_estimate(state, xs);
  const auto loo = hb_estimate_loo(state, xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(std::abs(direct[i] - loo[i]) <= 1e-9);
}

TEST_CASE("lengen equals the alpha-posterior estimate") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 10 + static_cast<int>(rng.below(20));
    const int n_test = n * (1 + static_cast<int>(rng.below(4)));
    const auto state = random_state(rng, 4, 5.0, n);
    const auto& g = state.candidates->priors[rng.below(state.size())];
    const auto xs = sample_poisson_sequence(g, n_test, rng);
    const auto len = lengen_estimate(state, xs);
    const auto tempered =
        posterior_update(state, xs, static_cast<double>(n) / n_test);
    const auto alpha_form = mixture_posterior_mean(tempered, xs);
    for (std::size_t i = 0; i < xs.size(); ++i)
      CHECK(std::abs(len[i] - alpha_form[i]) <= 1e-10);
  }
}

TEST_CASE("lengen at n_test = train_n matches hb_estimate") {
  Rng rng(23);
  const int n = 16;
  const auto state = random_state(rng, 3, 5.0, n);
  const auto& g = state.candidates->priors[0];
  const auto xs = sample_poisson_sequence(g, n, rng);
  const auto a = lengen_estimate(state, xs);
  const auto b = hb_estimate(state, xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(std::abs(a[i] - b[i]) <= 1e-10);
}

TEST_CASE("lengen is exactly invariant under input duplication") {
  Rng rng(29);
  const int n = 8;
  const auto state = random_state(rng, 3, 4.0, n);
  const auto xs = sample_poisson_sequence(state.candidates->priors[0], n, rng);
  const auto once = lengen_estimate(state, xs);
  for (int r : {2, 3}) {
    std::vector<int> dup;
    for (int rep = 0; rep < r; ++rep) dup.insert(dup.end(), xs.begin(), xs.end());
    const auto many = lengen_estimate(state, dup);
    for (int rep = 0; rep < r; ++rep)
      for (int i = 0; i < n; ++i) CHECK(many[rep * n + i] == once[i]);
  }
}

TEST_CASE("observations beyond the table range fall back to direct evaluation") {
  // support bound 1 gives x_max = 80; an observation of 130 must take the
  // untabulated path in every estimator
  const auto g1 = make_prior({0.3, 0.9}, {0.5, 0.5}, 1.0);
  const auto g2 = make_prior({0.1, 0.6}, {0.4, 0.6}, 1.0);
  const auto state = make_state({g1, g2}, 3);
  REQUIRE(state.candidates->x_max < 130);
  const std::vector<int> xs{0, 1, 130};

  const auto dir = hb_estimate(state, xs);
  const auto loo = hb_estimate_loo(state, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(std::isfinite(dir[i]));
    CHECK(dir[i] >= 0.0);
    CHECK(dir[i] <= 1.0);
    CHECK(std::abs(dir[i] - loo[i]) <= 1e-9);
  }

  const auto len = lengen_estimate(state, xs);
  const auto alpha_form =
      mixture_posterior_mean(posterior_update(state, xs, 1.0), xs);
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(std::abs(len[i] - alpha_form[i]) <= 1e-10);
}

TEST_CASE("monte-carlo state reproduces the exact finite computation") {
  // finite PoP embedded as a uniform-over-components sampler
  PoPSpec finite;
  finite.kind = PopKind::Finite;
  finite.A = 6.0;
  finite.components = {make_prior({1.0, 2.0}, {0.5, 0.5}, 6.0),
                       make_prior({4.0, 5.0}, {0.5, 0.5}, 6.0)};
  const auto exact_state = make_state(finite.components);
  Rng rng(31);
  const std::vector<int> xs{1, 2, 4, 0, 3};
  const auto exact = hb_estimate(exact_state, xs);

  // batch the draws to get a spread estimate for the MC version
  const int batches = 32, per_batch = 128;
  std::vector<std::vector<double>> batch_est(batches);
  for (int b = 0; b < batches; ++b) {
    std::vector<DiscretePrior> draws;
    for (int d = 0; d < per_batch; ++d) draws.push_back(sample_prior(finite, rng));
    batch_est[b] = hb_estimate(make_state(std::move(draws)), xs);
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double mean = 0.0, ss = 0.0;
    for (int b = 0; b < batches; ++b) mean += batch_est[b][i];
    mean /= batches;
    for (int b = 0; b < batches; ++b)
      ss += (batch_est[b][i] - mean) * (batch_est[b][i] - mean);
    const double se = std::sqrt(ss / (batches - 1) / batches);
    CHECK(std::abs(mean - exact[i]) <= 3.0 * se + 1e-6);
  }
}

TEST_CASE("hb_estimate minimizes posterior-expected squared loss") {
  // direct posterior expectation over components: for any perturbation v,
  // E[||theta - (est + v)||^2 | X] - E[||theta - est||^2 | X]
  //   = sum_i (2 v_i (est_i - E[theta_i|X]) + v_i^2) >= 0 at est = E[theta|X]
  Rng rng(37);
  const auto state = two_prior_state();
  const std::vector<int> xs{1, 4, 2};
  const auto post = posterior_update(state, xs, 1.0);
  const auto est = mixture_posterior_mean(post, xs);

  auto posterior_sq_loss = [&](const std::vector<double>& a) {
    // sum over candidates of p_j * E_{G_j}[||theta - a||^2 | X]
    double acc = 0.0;
    for (std::size_t j = 0; j < post.size(); ++j) {
      const double pj = std::exp(post.log_weights[j]);
      const auto& g = post.candidates->priors[j];
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double m1 = bayes_posterior_mean(g, xs[i]);
        const double m2 = posterior_moment(g, xs[i], 2);
        acc += pj * (m2 - 2.0 * a[i] * m1 + a[i] * a[i]);
      }
    }
    return acc;
  };

  const double base = posterior_sq_loss(est);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> perturbed = est;
    double norm = 0.0;
    std::vector<double> v(xs.size());
    for (auto& vi : v) {
      vi = rng.uniform(-1.0, 1.0);
      norm += vi * vi;
    }
    const double scale = rng.uniform(0.0, 0.1) / std::sqrt(norm);
    for (std::size_t i = 0; i < xs.size(); ++i) perturbed[i] += v[i] * scale;
    CHECK(posterior_sq_loss(perturbed) >= base - 1e-12);
  }
}
