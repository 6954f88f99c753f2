#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "eblab/mixture.hpp"
#include "eblab/pop.hpp"
#include "oracles.hpp"

using namespace eb;

TEST_CASE("uniform-dirichlet draws satisfy the prior invariants") {
  PoPSpec spec;
  spec.kind = PopKind::UniformDirichlet;
  spec.A = 50.0;
  spec.k = 10;
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto g = sample_prior(spec, rng);
    CHECK(g.atoms.size() == 10);
    validate(g);  // throws on any violated invariant
    for (double a : g.atoms) {
      CHECK(a >= 0.0);
      CHECK(a <= 50.0);
    }
  }
}

TEST_CASE("sampling is deterministic in the seed") {
  PoPSpec spec;
  spec.kind = PopKind::UniformDirichlet;
  spec.A = 5.0;
  spec.k = 4;
  Rng a(99), b(99);
  const auto g1 = sample_prior(spec, a);
  const auto g2 = sample_prior(spec, b);
  CHECK(g1.atoms == g2.atoms);
  CHECK(g1.weights == g2.weights);
  Rng c(100);
  CHECK(sample_prior(spec, c).atoms != g1.atoms);
}

TEST_CASE("dirichlet weights have mean 1/k") {
  PoPSpec spec;
  spec.kind = PopKind::UniformDirichlet;
  spec.A = 1.0;
  spec.k = 3;
  Rng rng(7);
  const int draws = 100000;
  double sum0 = 0.0, sumsq0 = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto g = sample_prior(spec, rng);
    sum0 += g.weights[0];
    sumsq0 += g.weights[0] * g.weights[0];
  }
  const double mean = sum0 / draws;
  const double sd = std::sqrt(sumsq0 / draws - mean * mean);
  CHECK(std::abs(mean - 1.0 / 3.0) <= 3.0 * sd / std::sqrt(draws));
}

TEST_CASE("grid multinomial uses the fixed grid") {
  PoPSpec spec;
  spec.kind = PopKind::GridMultinomial;
  spec.A = 2.0;
  spec.grid_step = 0.1;
  Rng rng(3);
  const auto g = sample_prior(spec, rng);
  CHECK(g.atoms.size() == 20);
  CHECK(g.atoms.front() == doctest::Approx(0.1));
  CHECK(g.atoms.back() == doctest::Approx(2.0));
  validate(g);
}

TEST_CASE("finite PoP with one component is that component") {
  PoPSpec spec;
  spec.kind = PopKind::Finite;
  spec.A = 5.0;
  spec.components = {make_prior({1.0, 3.0}, {0.5, 0.5}, 5.0)};
  Rng rng(8);
  for (int i = 0; i < 5; ++i) {
    const auto g = sample_prior(spec, rng);
    CHECK(g.atoms == spec.components[0].atoms);
  }
}

TEST_CASE("neural pushforward stays inside the support") {
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    const auto g = neural_prior(rng, 50.0, 8, 64);
    validate(g);
    CHECK(g.atoms.size() == 4 * 64);
    for (double a : g.atoms) {
      CHECK(a >= 0.0);
      CHECK(a <= 50.0);
    }
  }
  // unscaled mode keeps base samples in [0, 1]
  const auto base = neural_prior(rng, 50.0, 8, 64, 4, false);
  for (double a : base.atoms) CHECK(a <= 1.0);

  // and the PoPSpec-driven path
  PoPSpec spec;
  spec.kind = PopKind::Neural;
  spec.A = 10.0;
  spec.neural_grid_points = 32;
  const auto g = sample_prior(spec, rng);
  validate(g);
  CHECK(g.atoms.size() == 4 * 32);
}

TEST_CASE("neural pushforward with w2 = 0 collapses to A/2") {
  const std::vector<double> w1{0.3, -1.2}, w2{0.0, 0.0};
  const auto g = neural_pushforward(w1, w2, Activation::Tanh, 6.0, 32, true);
  for (double a : g.atoms) CHECK(a == doctest::Approx(3.0).epsilon(1e-12));
  double wsum = 0.0;
  for (double w : g.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("truncate_prior") {
  const auto g = make_prior({1.0, 9.0}, {0.5, 0.5}, 10.0);
  const auto t = truncate_prior(g, 5.0);
  CHECK(t.atoms == std::vector<double>{1.0});
  CHECK(t.weights == std::vector<double>{1.0});

  const auto full = truncate_prior(g, 9.5);
  CHECK(full.atoms == g.atoms);
  CHECK(full.weights == g.weights);

  CHECK_THROWS_AS(truncate_prior(delta_prior(9.0, 10.0), 5.0), std::domain_error);

  // surviving weights keep their ratios
  const auto g3 = make_prior({0.5, 2.0, 8.0}, {0.2, 0.3, 0.5}, 10.0);
  const auto t3 = truncate_prior(g3, 4.0);
  CHECK(t3.weights[1] / t3.weights[0] ==
        doctest::Approx(0.3 / 0.2).epsilon(1e-12));
}

TEST_CASE("pop_mass_estimate") {
  const auto g1 = make_prior({1.0, 2.0}, {0.5, 0.5}, 5.0);
  const auto g2 = make_prior({1.01, 2.0}, {0.5, 0.5}, 5.0);
  const auto g3 = make_prior({4.0, 4.5}, {0.5, 0.5}, 5.0);
  PoPSpec finite;
  finite.kind = PopKind::Finite;
  finite.A = 5.0;
  finite.components = {g1, g2, g3};

  Rng rng(4);
  CHECK(pop_mass_estimate(finite, g1,
                          std::numeric_limits<double>::infinity(), 1, rng) == 1.0);
  // g1 and g2 are within a loose chi2 ball of g1; g3 is far
  const double est = pop_mass_estimate(finite, g1, 0.05, 1, rng);
  CHECK(est == doctest::Approx(2.0 / 3.0));

  PoPSpec ud;
  ud.kind = PopKind::UniformDirichlet;
  ud.A = 2.0;
  ud.k = 2;
  Rng rng2(5);
  const auto target = sample_prior(ud, rng2);
  const double mass = pop_mass_estimate(ud, target, 0.1, 10000, rng2);
  CHECK(mass > 0.0);
}
