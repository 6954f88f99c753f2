#include "eblab/hb.hpp"

#include <cmath>
#include <limits>

namespace eb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::shared_ptr<const CandidateSetT<PoissonObsModel>> build_candidates(
    std::vector<DiscretePrior> priors) {
  auto cs = std::make_shared<CandidateSetT<PoissonObsModel>>();
  cs->priors = std::move(priors);
  for (const auto& g : cs->priors) {
    validate(g);
    cs->support_bound = std::max(cs->support_bound, g.support_bound);
  }
  cs->x_max = default_x_max(cs->support_bound);
  cs->logf_table.resize(cs->priors.size());
  cs->theta_table.resize(cs->priors.size());
  for (std::size_t j = 0; j < cs->priors.size(); ++j) {
    const auto& g = cs->priors[j];
    auto& lf = cs->logf_table[j];
    auto& th = cs->theta_table[j];
    lf.resize(cs->x_max + 2);
    th.resize(cs->x_max + 1);
    for (int x = 0; x <= cs->x_max + 1; ++x) lf[x] = log_marginal(g, x);
    for (int x = 0; x <= cs->x_max; ++x)
      th[x] = lf[x] == kNegInf ? std::numeric_limits<double>::quiet_NaN()
                               : bayes_posterior_mean(g, x);
  }
  return cs;
}

}  // namespace

PosteriorState make_state(std::vector<DiscretePrior> priors, int train_n) {
  if (priors.empty()) throw std::invalid_argument("make_state: no candidate priors");
  if (train_n < 1) throw std::invalid_argument("make_state: train_n must be >= 1");
  PosteriorState state;
  state.candidates = build_candidates(std::move(priors));
  state.log_weights.assign(state.candidates->priors.size(),
                           -std::log(static_cast<double>(state.candidates->priors.size())));
  state.alpha = 1.0;
  state.train_n = train_n;
  return state;
}

PosteriorState init_state(const PoPSpec& spec, int mc_draws, Rng& rng, int train_n) {
  validate(spec);
  if (spec.kind == PopKind::Finite) return make_state(spec.components, train_n);
  if (mc_draws < 1)
    throw std::invalid_argument("init_state: mc_draws must be >= 1 for sampled PoPs");
  std::vector<DiscretePrior> priors;
  priors.reserve(mc_draws);
  for (int d = 0; d < mc_draws; ++d) priors.push_back(sample_prior(spec, rng));
  return make_state(std::move(priors), train_n);
}

PosteriorState posterior_update(const PosteriorState& state,
                                const std::vector<int>& xs, double alpha) {
  return detail::posterior_update_t(state, xs, alpha);
}

std::vector<double> mixture_posterior_mean(const PosteriorState& state,
                                           const std::vector<int>& xs) {
  return detail::mixture_posterior_mean_t(state, xs);
}

std::vector<double> hb_estimate(const PosteriorState& state,
                                const std::vector<int>& xs) {
  return detail::hb_estimate_t(state, xs);
}

std::vector<double> hb_estimate_loo(const PosteriorState& state,
                                    const std::vector<int>& xs) {
  return detail::hb_estimate_loo_t(state, xs);
}

std::vector<double> lengen_estimate(const PosteriorState& state,
                                    const std::vector<int>& xs) {
  return detail::lengen_estimate_t(state, xs);
}

}  // namespace eb
