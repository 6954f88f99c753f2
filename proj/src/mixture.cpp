#include "eblab/mixture.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eb {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

double log_sum_exp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf || !std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double poisson_logpmf(int x, double lambda) {
  if (x < 0) throw std::invalid_argument("poisson_logpmf: x < 0");
  if (!(lambda >= 0.0)) throw std::invalid_argument("poisson_logpmf: lambda < 0");
  if (lambda == 0.0) return x == 0 ? 0.0 : kNegInf;
  return x * std::log(lambda) - lambda - std::lgamma(x + 1.0);
}

int default_x_max(double support_bound) {
  return static_cast<int>(
      std::ceil(support_bound + 20.0 * std::sqrt(support_bound + 1.0) + 50.0));
}

double log_marginal(const DiscretePrior& g, int x) {
  std::vector<double> terms(g.atoms.size(), kNegInf);
  for (std::size_t j = 0; j < g.atoms.size(); ++j)
    if (g.weights[j] > 0.0)
      terms[j] = std::log(g.weights[j]) + poisson_logpmf(x, g.atoms[j]);
  return log_sum_exp(terms);
}

TruncatedPmf marginal_pmf(const DiscretePrior& g, int x_max) {
  validate(g);
  if (x_max < 0) throw std::invalid_argument("marginal_pmf: x_max < 0");
  TruncatedPmf out;
  out.x_max = x_max;
  out.values.resize(x_max + 1);
  double total = 0.0;
  for (int x = 0; x <= x_max; ++x) {
    out.values[x] = std::exp(log_marginal(g, x));
    total += out.values[x];
  }
  out.tail_mass_bound = std::max(0.0, 1.0 - total);
  return out;
}

TruncatedPmf marginal_pmf(const DiscretePrior& g) {
  return marginal_pmf(g, default_x_max(g.support_bound));
}

namespace {

// Weighted posterior sums: returns (log f_G(x), sum_j w_j h(lambda_j) Poi(x; lambda_j))
// with the numerator accumulated in a max-shifted linear domain.
template <class F>
double posterior_functional(const DiscretePrior& g, int x, F&& h) {
  std::vector<double> logs(g.atoms.size(), kNegInf);
  double m = kNegInf;
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    if (g.weights[j] <= 0.0) continue;
    logs[j] = std::log(g.weights[j]) + poisson_logpmf(x, g.atoms[j]);
    m = std::max(m, logs[j]);
  }
  if (m == kNegInf)
    throw std::domain_error("posterior mean undefined: f_G(x) = 0 at x = " +
                            std::to_string(x));
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    if (logs[j] == kNegInf) continue;
    const double e = std::exp(logs[j] - m);
    num += h(g.atoms[j]) * e;
    den += e;
  }
  return num / den;
}

}  // namespace

double bayes_posterior_mean(const DiscretePrior& g, int x) {
  return posterior_functional(g, x, [](double a) { return a; });
}

double bayes_posterior_mean_ratio(const DiscretePrior& g, int x) {
  const double lf0 = log_marginal(g, x);
  if (lf0 == kNegInf)
    throw std::domain_error("posterior mean undefined: f_G(x) = 0 at x = " +
                            std::to_string(x));
  const double lf1 = log_marginal(g, x + 1);
  return (x + 1.0) * std::exp(lf1 - lf0);
}

double posterior_moment(const DiscretePrior& g, int x, int p) {
  if (p < 1) throw std::invalid_argument("posterior_moment: p must be >= 1");
  return posterior_functional(g, x, [p](double a) { return std::pow(a, p); });
}

double divergence(const TruncatedPmf& p, const TruncatedPmf& q, Divergence kind) {
  if (p.x_max != q.x_max || p.values.size() != q.values.size())
    throw std::invalid_argument("divergence: mismatched supports");
  double acc = 0.0;
  for (std::size_t x = 0; x < p.values.size(); ++x) {
    const double a = p.values[x], b = q.values[x];
    switch (kind) {
      case Divergence::TV:
        acc += 0.5 * std::abs(a - b);
        break;
      case Divergence::H2: {
        const double d = std::sqrt(a) - std::sqrt(b);
        acc += d * d;
        break;
      }
      case Divergence::KL:
        if (a > 0.0) {
          if (b == 0.0) return kInf;
          acc += a * std::log(a / b);
        }
        break;
      case Divergence::CHI2:
        if (a > 0.0) {
          if (b == 0.0) return kInf;
          acc += a * a / b;
        }
        break;
    }
  }
  if (kind == Divergence::CHI2) {
    // chi^2 = sum p^2/q - 1; the truncated tail of q contributes >= 0
    acc -= 1.0;
    acc = std::max(acc, 0.0);
  }
  return acc;
}

double poisson_tv(double mu, double nu) {
  const int xm = default_x_max(std::max(mu, nu));
  double acc = 0.0;
  for (int x = 0; x <= xm; ++x) {
    const double a = std::exp(poisson_logpmf(x, mu));
    const double b = std::exp(poisson_logpmf(x, nu));
    acc += 0.5 * std::abs(a - b);
  }
  return acc;
}

double poisson_chi2(double lambda, double lambda_prime) {
  if (lambda_prime == 0.0) return lambda == 0.0 ? 0.0 : kInf;
  const double d = lambda - lambda_prime;
  return std::expm1(d * d / lambda_prime);
}

MixtureDivergenceBounds mixture_divergence_bounds(const DiscretePrior& g1,
                                                  const DiscretePrior& g2) {
  validate(g1);
  validate(g2);
  if (g1.atoms.size() != g2.atoms.size())
    throw std::invalid_argument("mixture_divergence_bounds: unequal atom counts");
  MixtureDivergenceBounds out;
  double max_tv = 0.0, max_chi2 = 0.0, weight_l1 = 0.0, weight_chi2 = 0.0;
  for (std::size_t j = 0; j < g1.atoms.size(); ++j) {
    weight_l1 += std::abs(g1.weights[j] - g2.weights[j]);
    max_tv = std::max(max_tv, poisson_tv(g1.atoms[j], g2.atoms[j]));
    max_chi2 = std::max(max_chi2, poisson_chi2(g1.atoms[j], g2.atoms[j]));
    if (g2.weights[j] == 0.0) {
      if (g1.weights[j] > 0.0) weight_chi2 = kInf;
    } else {
      weight_chi2 += g1.weights[j] * g1.weights[j] / g2.weights[j];
    }
  }
  if (std::isfinite(weight_chi2)) weight_chi2 = std::max(0.0, weight_chi2 - 1.0);
  out.tv_bound = weight_l1 + max_tv;
  out.chi2_bound = (1.0 + weight_chi2) * (1.0 + max_chi2) - 1.0;
  return out;
}

std::vector<double> raw_moments(const DiscretePrior& g, int highest) {
  std::vector<double> m(highest + 1, 0.0);
  for (std::size_t j = 0; j < g.atoms.size(); ++j) {
    double pw = g.weights[j];
    for (int r = 0; r <= highest; ++r) {
      m[r] += pw;
      pw *= g.atoms[j];
    }
  }
  return m;
}

DiscretePrior moment_match(const DiscretePrior& g, int L) {
  validate(g);
  if (L < 1) throw std::invalid_argument("moment_match: L must be >= 1");
  const int nodes = (L + 2) / 2;  // ceil((L+1)/2)

  std::vector<double> support;
  for (std::size_t j = 0; j < g.atoms.size(); ++j)
    if (g.weights[j] > 0.0) support.push_back(g.atoms[j]);
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  if (static_cast<int>(support.size()) <= nodes) return g;

  // Stieltjes recurrence for the orthogonal polynomials of the discrete
  // measure; alpha/beta fill the Jacobi matrix.
  const std::size_t k = g.atoms.size();
  std::vector<double> p_prev(k, 0.0), p_cur(k, 1.0);
  std::vector<double> alpha(nodes), beta(nodes);  // beta[0] = total mass
  double norm_prev = 1.0;
  for (int r = 0; r < nodes; ++r) {
    double norm = 0.0, xnorm = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double t = g.weights[j] * p_cur[j] * p_cur[j];
      norm += t;
      xnorm += t * g.atoms[j];
    }
    if (!(norm > 1e-250 * norm_prev) || !std::isfinite(norm))
      return g;  // measure degenerate at this order; nothing to reduce
    alpha[r] = xnorm / norm;
    beta[r] = r == 0 ? norm : norm / norm_prev;
    norm_prev = norm;
    for (std::size_t j = 0; j < k; ++j) {
      const double next = (g.atoms[j] - alpha[r]) * p_cur[j] - beta[r] * p_prev[j];
      p_prev[j] = p_cur[j];
      p_cur[j] = next;
    }
  }

  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int r = 0; r < nodes; ++r) {
    jacobi(r, r) = alpha[r];
    if (r + 1 < nodes) {
      const double b = std::sqrt(beta[r + 1]);
      jacobi(r, r + 1) = b;
      jacobi(r + 1, r) = b;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  if (es.info() != Eigen::Success) return g;

  DiscretePrior out;
  out.support_bound = g.support_bound;
  double wsum = 0.0;
  for (int r = 0; r < nodes; ++r) {
    const double w = es.eigenvectors()(0, r) * es.eigenvectors()(0, r);
    const double node = std::clamp(es.eigenvalues()(r), 0.0, g.support_bound);
    out.atoms.push_back(node);
    out.weights.push_back(w);
    wsum += w;
  }
  for (double& w : out.weights) w /= wsum;
  return out;
}

}  // namespace eb
