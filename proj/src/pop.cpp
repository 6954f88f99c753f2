#include "eblab/pop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "eblab/mixture.hpp"

namespace eb {

void validate(const PoPSpec& spec) {
  if (!(spec.A > 0.0)) throw std::invalid_argument("PoPSpec: A must be > 0");
  switch (spec.kind) {
    case PopKind::UniformDirichlet:
      if (spec.k < 1) throw std::invalid_argument("PoPSpec: k must be >= 1");
      break;
    case PopKind::GridMultinomial:
      if (!(spec.grid_step > 0.0) || spec.grid_step > spec.A)
        throw std::invalid_argument("PoPSpec: grid_step must be in (0, A]");
      break;
    case PopKind::Finite:
      if (spec.components.empty())
        throw std::invalid_argument("PoPSpec: finite PoP needs >= 1 component");
      for (const auto& g : spec.components) validate(g);
      break;
    case PopKind::Neural:
      if (spec.neural_hidden_dim < 1 || spec.neural_grid_points < 2 ||
          spec.neural_mixture_count < 1)
        throw std::invalid_argument("PoPSpec: bad neural parameters");
      break;
  }
}

namespace {

std::vector<double> dirichlet_flat(int k, Rng& rng) {
  std::vector<double> w(k);
  double sum = 0.0;
  for (double& x : w) {
    x = rng.exponential();  // Gamma(1, 1)
    sum += x;
  }
  for (double& x : w) x /= sum;
  return w;
}

}  // namespace

DiscretePrior sample_prior(const PoPSpec& spec, Rng& rng) {
  validate(spec);
  switch (spec.kind) {
    case PopKind::UniformDirichlet: {
      DiscretePrior g;
      g.support_bound = spec.A;
      g.atoms.resize(spec.k);
      for (double& a : g.atoms) a = rng.uniform(0.0, spec.A);
      g.weights = dirichlet_flat(spec.k, rng);
      return g;
    }
    case PopKind::GridMultinomial: {
      DiscretePrior g;
      g.support_bound = spec.A;
      const int m = static_cast<int>(std::floor(spec.A / spec.grid_step + 1e-9));
      for (int j = 1; j <= m; ++j) g.atoms.push_back(spec.grid_step * j);
      g.weights = dirichlet_flat(m, rng);
      return g;
    }
    case PopKind::Finite:
      return spec.components[rng.below(spec.components.size())];
    case PopKind::Neural:
      return neural_prior(rng, spec.A, spec.neural_hidden_dim,
                          spec.neural_grid_points, spec.neural_mixture_count,
                          spec.neural_scale_to_support);
  }
  throw std::logic_error("sample_prior: unreachable");
}

double apply_activation(Activation act, double x) {
  switch (act) {
    case Activation::Gelu:
      return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Selu: {
      constexpr double scale = 1.0507009873554805;
      constexpr double alpha = 1.6732632423543772;
      return x > 0.0 ? scale * x : scale * alpha * std::expm1(x);
    }
    case Activation::Celu:
      return x > 0.0 ? x : std::expm1(x);
    case Activation::Silu:
      return x / (1.0 + std::exp(-x));
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::TanhShrink:
      return x - std::tanh(x);
  }
  throw std::logic_error("apply_activation: unreachable");
}

DiscretePrior neural_pushforward(const std::vector<double>& w1,
                                 const std::vector<double>& w2, Activation act,
                                 double A, int grid_points,
                                 bool scale_to_support) {
  if (w1.size() != w2.size() || w1.empty())
    throw std::invalid_argument("neural_pushforward: w1/w2 size mismatch");
  if (grid_points < 2)
    throw std::invalid_argument("neural_pushforward: grid_points must be >= 2");
  DiscretePrior g;
  g.support_bound = A;
  g.atoms.reserve(grid_points);
  for (int t = 0; t < grid_points; ++t) {
    const double x = A * t / (grid_points - 1.0);
    double z = 0.0;
    for (std::size_t h = 0; h < w1.size(); ++h)
      z += w2[h] * apply_activation(act, w1[h] * x);
    const double base = 1.0 / (1.0 + std::exp(-10.0 * z));  // in [0, 1]
    g.atoms.push_back(scale_to_support ? base * A : base);
  }
  g.weights.assign(grid_points, 1.0 / grid_points);
  return g;
}

DiscretePrior neural_prior(Rng& rng, double A, int hidden_dim, int grid_points,
                           int mixture_count, bool scale_to_support) {
  if (hidden_dim < 1) throw std::invalid_argument("neural_prior: hidden_dim < 1");
  DiscretePrior out;
  out.support_bound = A;
  constexpr Activation kActs[] = {
      Activation::Gelu, Activation::Relu,       Activation::Selu,
      Activation::Celu, Activation::Silu,       Activation::Tanh,
      Activation::TanhShrink};
  for (int c = 0; c < mixture_count; ++c) {
    std::vector<double> w1(hidden_dim), w2(hidden_dim);
    for (double& v : w1) v = rng.normal();
    for (double& v : w2) v = rng.normal();
    const Activation act = kActs[rng.below(std::size(kActs))];
    const auto comp = neural_pushforward(w1, w2, act, A, grid_points, scale_to_support);
    for (std::size_t i = 0; i < comp.atoms.size(); ++i) {
      out.atoms.push_back(comp.atoms[i]);
      out.weights.push_back(comp.weights[i] / mixture_count);
    }
  }
  return out;
}

DiscretePrior truncate_prior(const DiscretePrior& g, double cutoff) {
  validate(g);
  DiscretePrior out;
  out.support_bound = g.support_bound;
  double mass = 0.0;
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    if (g.atoms[j] <= cutoff) {
      out.atoms.push_back(g.atoms[j]);
      out.weights.push_back(g.weights[j]);
      mass += g.weights[j];
    }
  }
  if (out.atoms.empty() || mass <= 0.0)
    throw std::domain_error("truncate_prior: no mass at or below cutoff");
  for (double& w : out.weights) w /= mass;
  return out;
}

double pop_mass_estimate(const PoPSpec& spec, const DiscretePrior& target,
                         double eps, int draws, Rng& rng) {
  validate(spec);
  if (!(eps > 0.0)) throw std::invalid_argument("pop_mass_estimate: eps <= 0");
  if (std::isinf(eps)) return 1.0;
  const int x_max = default_x_max(std::max(spec.A, target.support_bound));
  const auto f_target = marginal_pmf(target, x_max);
  auto within = [&](const DiscretePrior& g) {
    const auto f = marginal_pmf(g, x_max);
    return divergence(f_target, f, Divergence::CHI2) <= eps;
  };
  if (spec.kind == PopKind::Finite) {
    int hits = 0;
    for (const auto& g : spec.components) hits += within(g) ? 1 : 0;
    return static_cast<double>(hits) / spec.components.size();
  }
  if (draws < 1) throw std::invalid_argument("pop_mass_estimate: draws < 1");
  int hits = 0;
  for (int d = 0; d < draws; ++d) hits += within(sample_prior(spec, rng)) ? 1 : 0;
  return static_cast<double>(hits) / draws;
}

double sample_atom(const DiscretePrior& g, Rng& rng) {
  const double u = rng.uniform();
  double cdf = 0.0;
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    cdf += g.weights[j];
    if (u < cdf) return g.atoms[j];
  }
  return g.atoms.back();
}

std::vector<int> sample_poisson_sequence(const DiscretePrior& g, int n, Rng& rng) {
  std::vector<int> x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.poisson(sample_atom(g, rng));
  return x;
}

}  // namespace eb
