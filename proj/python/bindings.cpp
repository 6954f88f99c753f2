// Python bindings for the core operations: priors and Poisson mixture
// arithmetic, PoP samplers, the hierarchical Bayes estimators, classical
// baselines, the Gaussian counterpart, and the experiment drivers.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "eblab/baselines.hpp"
#include "eblab/bench.hpp"
#include "eblab/config.hpp"
#include "eblab/gaussian.hpp"
#include "eblab/hb.hpp"
#include "eblab/mixture.hpp"
#include "eblab/pop.hpp"
#include "eblab/prior.hpp"
#include "eblab/rng.hpp"

namespace py = pybind11;
using namespace eb;

namespace {

// Python callables must run on the calling thread: the worker pool never
// takes the GIL.
PoissonEstimator wrap_poisson(const py::function& f) {
  return [f](const std::vector<int>& xs) {
    return f(xs).cast<std::vector<double>>();
  };
}

GaussianEstimator wrap_gaussian(const py::function& f) {
  return [f](const std::vector<double>& xs) {
    return f(xs).cast<std::vector<double>>();
  };
}

}  // namespace

PYBIND11_MODULE(_eblab, m) {
  m.doc() = "empirical Bayes for Poisson and normal-means mixtures";

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", py::overload_cast<>(&Rng::uniform))
      .def("normal", &Rng::normal)
      .def("poisson", &Rng::poisson, py::arg("rate"));
  m.def("derive_seed", &derive_seed, py::arg("root"), py::arg("tag"),
        py::arg("index") = 0);

  py::class_<DiscretePrior>(m, "DiscretePrior")
      .def(py::init([](std::vector<double> atoms, std::vector<double> weights,
                       double support_bound) {
             return make_prior(std::move(atoms), std::move(weights), support_bound);
           }),
           py::arg("atoms"), py::arg("weights"), py::arg("support_bound"))
      .def_readonly("atoms", &DiscretePrior::atoms)
      .def_readonly("weights", &DiscretePrior::weights)
      .def_readonly("support_bound", &DiscretePrior::support_bound);
  m.def("delta_prior", &delta_prior, py::arg("rate"), py::arg("support_bound"));

  py::class_<TruncatedPmf>(m, "TruncatedPmf")
      .def_readonly("values", &TruncatedPmf::values)
      .def_readonly("x_max", &TruncatedPmf::x_max)
      .def_readonly("tail_mass_bound", &TruncatedPmf::tail_mass_bound);

  m.def("poisson_logpmf", &poisson_logpmf, py::arg("x"), py::arg("rate"));
  m.def("default_x_max", &default_x_max, py::arg("support_bound"));
  m.def("marginal_pmf",
        py::overload_cast<const DiscretePrior&, int>(&marginal_pmf),
        py::arg("prior"), py::arg("x_max"));
  m.def("marginal_pmf", py::overload_cast<const DiscretePrior&>(&marginal_pmf),
        py::arg("prior"));
  m.def("log_marginal", &log_marginal, py::arg("prior"), py::arg("x"));
  m.def("bayes_posterior_mean", &bayes_posterior_mean, py::arg("prior"),
        py::arg("x"));
  m.def("bayes_posterior_mean_ratio", &bayes_posterior_mean_ratio,
        py::arg("prior"), py::arg("x"));
  m.def("posterior_moment", &posterior_moment, py::arg("prior"), py::arg("x"),
        py::arg("p"));

  py::enum_<Divergence>(m, "Divergence")
      .value("TV", Divergence::TV)
      .value("H2", Divergence::H2)
      .value("KL", Divergence::KL)
      .value("CHI2", Divergence::CHI2);
  m.def("divergence", &divergence, py::arg("p"), py::arg("q"), py::arg("kind"));
  m.def("poisson_tv", &poisson_tv, py::arg("mu"), py::arg("nu"));
  m.def("poisson_chi2", &poisson_chi2, py::arg("rate"), py::arg("rate_ref"));
  m.def(
      "mixture_divergence_bounds",
      [](const DiscretePrior& g1, const DiscretePrior& g2) {
        const auto b = mixture_divergence_bounds(g1, g2);
        return py::make_tuple(b.tv_bound, b.chi2_bound);
      },
      py::arg("g1"), py::arg("g2"));
  m.def("raw_moments", &raw_moments, py::arg("prior"), py::arg("highest"));
  m.def("moment_match", &moment_match, py::arg("prior"), py::arg("L"));

  py::enum_<PopKind>(m, "PopKind")
      .value("UNIFORM_DIRICHLET", PopKind::UniformDirichlet)
      .value("GRID_MULTINOMIAL", PopKind::GridMultinomial)
      .value("NEURAL", PopKind::Neural)
      .value("FINITE", PopKind::Finite);
  py::class_<PoPSpec>(m, "PoPSpec")
      .def(py::init([](PopKind kind, double A, int k, double grid_step,
                       std::vector<DiscretePrior> components,
                       int neural_mixture_count, int neural_hidden_dim,
                       int neural_grid_points, bool neural_scale_to_support) {
             PoPSpec spec{kind, A, k, grid_step, std::move(components),
                          neural_mixture_count, neural_hidden_dim,
                          neural_grid_points, neural_scale_to_support};
             validate(spec);
             return spec;
           }),
           py::arg("kind"), py::arg("A"), py::arg("k") = 1,
           py::arg("grid_step") = 0.1,
           py::arg("components") = std::vector<DiscretePrior>{},
           py::arg("neural_mixture_count") = 4, py::arg("neural_hidden_dim") = 8,
           py::arg("neural_grid_points") = 512,
           py::arg("neural_scale_to_support") = true)
      .def_readonly("kind", &PoPSpec::kind)
      .def_readonly("A", &PoPSpec::A)
      .def_readonly("k", &PoPSpec::k)
      .def_readonly("grid_step", &PoPSpec::grid_step)
      .def_readonly("components", &PoPSpec::components);
  m.def("sample_prior", &sample_prior, py::arg("spec"), py::arg("rng"));
  m.def("neural_prior", &neural_prior, py::arg("rng"), py::arg("A"),
        py::arg("hidden_dim"), py::arg("grid_points"),
        py::arg("mixture_count") = 4, py::arg("scale_to_support") = true);
  m.def("truncate_prior", &truncate_prior, py::arg("prior"), py::arg("cutoff"));
  m.def("pop_mass_estimate", &pop_mass_estimate, py::arg("spec"),
        py::arg("target"), py::arg("eps"), py::arg("draws"), py::arg("rng"));
  m.def("sample_poisson_sequence", &sample_poisson_sequence, py::arg("prior"),
        py::arg("n"), py::arg("rng"));

  py::class_<PosteriorState>(m, "PosteriorState")
      .def_readonly("log_weights", &PosteriorState::log_weights)
      .def_readonly("alpha", &PosteriorState::alpha)
      .def_readonly("train_n", &PosteriorState::train_n)
      .def_property_readonly("priors",
                             [](const PosteriorState& s) {
                               return s.candidates->priors;
                             })
      .def("__len__", &PosteriorState::size);
  m.def("init_state", &init_state, py::arg("spec"), py::arg("mc_draws"),
        py::arg("rng"), py::arg("train_n") = 1);
  m.def("make_state", &make_state, py::arg("priors"), py::arg("train_n") = 1);
  m.def("posterior_update",
        py::overload_cast<const PosteriorState&, const std::vector<int>&, double>(
            &posterior_update),
        py::arg("state"), py::arg("xs"), py::arg("alpha"));
  m.def("mixture_posterior_mean",
        py::overload_cast<const PosteriorState&, const std::vector<int>&>(
            &mixture_posterior_mean),
        py::arg("state"), py::arg("xs"));
  m.def("hb_estimate",
        py::overload_cast<const PosteriorState&, const std::vector<int>&>(
            &hb_estimate),
        py::arg("state"), py::arg("xs"));
  m.def("hb_estimate_loo",
        py::overload_cast<const PosteriorState&, const std::vector<int>&>(
            &hb_estimate_loo),
        py::arg("state"), py::arg("xs"));
  m.def("lengen_estimate",
        py::overload_cast<const PosteriorState&, const std::vector<int>&>(
            &lengen_estimate),
        py::arg("state"), py::arg("xs"));

  m.def("oracle_bayes", &oracle_bayes, py::arg("prior"), py::arg("xs"));
  m.def("robbins", &robbins, py::arg("xs"),
        py::arg("clip_bound") = std::optional<double>{});

  py::class_<NpmleConfig>(m, "NpmleConfig")
      .def(py::init<>())
      .def_readwrite("grid_step", &NpmleConfig::grid_step)
      .def_readwrite("max_iters", &NpmleConfig::max_iters)
      .def_readwrite("tol", &NpmleConfig::tol)
      .def_readwrite("kkt_tol", &NpmleConfig::kkt_tol);
  py::class_<NpmleResult>(m, "NpmleResult")
      .def_readonly("prior", &NpmleResult::prior)
      .def_readonly("log_likelihood_path", &NpmleResult::log_likelihood_path)
      .def_readonly("kkt_residual", &NpmleResult::kkt_residual)
      .def_readonly("iterations", &NpmleResult::iterations);
  m.def("npmle_grid", &npmle_grid, py::arg("xs"), py::arg("config"), py::arg("A"));

  py::class_<Batch>(m, "Batch")
      .def_readonly("theta", &Batch::theta)
      .def_readonly("x", &Batch::x);
  py::class_<Dataset>(m, "Dataset")
      .def_readonly("batches", &Dataset::batches)
      .def_readonly("n", &Dataset::n)
      .def_readonly("root_seed", &Dataset::root_seed);
  m.def("gen_dataset", &gen_dataset, py::arg("spec"), py::arg("n"), py::arg("M"),
        py::arg("seed"));
  m.def("erm_type_match", &erm_type_match, py::arg("train"), py::arg("xs"));
  m.def("write_dataset", &write_dataset, py::arg("dataset"), py::arg("path"));
  m.def("read_dataset", &read_dataset, py::arg("path"));

  py::class_<RegretReport>(m, "RegretReport")
      .def_readonly("estimator_name", &RegretReport::estimator_name)
      .def_readonly("n", &RegretReport::n)
      .def_readonly("n_test", &RegretReport::n_test)
      .def_readonly("reps", &RegretReport::reps)
      .def_readonly("mean_regret", &RegretReport::mean_regret)
      .def_readonly("std_error", &RegretReport::std_error)
      .def_readonly("config_hash", &RegretReport::config_hash);
  m.def(
      "regret_eval",
      [](const py::function& estimator, const std::string& name,
         const DiscretePrior& g0, int n, int reps, std::uint64_t seed) {
        return regret_eval(wrap_poisson(estimator), name, g0, n, reps, seed,
                           /*workers=*/1);
      },
      py::arg("estimator"), py::arg("name"), py::arg("g0"), py::arg("n"),
      py::arg("reps"), py::arg("seed"));
  m.def("length_gen_sweep", &length_gen_sweep, py::arg("state"), py::arg("g0"),
        py::arg("n_test_list"), py::arg("reps"), py::arg("seed"),
        py::arg("workers") = 0);
  m.def(
      "alpha_fit",
      [](const PosteriorState& state, int n_test,
         const std::vector<double>& alpha_grid, int reps, std::uint64_t seed,
         const py::object& reference) {
        const auto fit =
            reference.is_none()
                ? alpha_fit(state, n_test, alpha_grid, reps, seed)
                : alpha_fit(state, n_test, alpha_grid, reps, seed,
                            wrap_poisson(reference.cast<py::function>()),
                            /*workers=*/1);
        return py::make_tuple(fit.alpha_star, fit.curve);
      },
      py::arg("state"), py::arg("n_test"), py::arg("alpha_grid"), py::arg("reps"),
      py::arg("seed"), py::arg("reference") = py::none());
  py::class_<ContractionRow>(m, "ContractionRow")
      .def_readonly("n", &ContractionRow::n)
      .def_readonly("median_h2", &ContractionRow::median_h2)
      .def_readonly("q90_h2", &ContractionRow::q90_h2)
      .def_readonly("reps", &ContractionRow::reps);
  m.def("contraction_diag", &contraction_diag, py::arg("state"), py::arg("g0"),
        py::arg("n_list"), py::arg("reps"), py::arg("seed"),
        py::arg("workers") = 0);

  py::class_<GaussianPrior>(m, "GaussianPrior")
      .def(py::init([](std::vector<double> atoms, std::vector<double> weights,
                       double support_bound) {
             return make_gaussian_prior(std::move(atoms), std::move(weights),
                                        support_bound);
           }),
           py::arg("atoms"), py::arg("weights"), py::arg("support_bound"))
      .def_readonly("atoms", &GaussianPrior::atoms)
      .def_readonly("weights", &GaussianPrior::weights)
      .def_readonly("support_bound", &GaussianPrior::support_bound);
  m.def("gaussian_marginal", &gaussian_marginal, py::arg("prior"), py::arg("x"));
  m.def("gaussian_bayes", &gaussian_bayes, py::arg("prior"), py::arg("x"));
  m.def("gaussian_bayes_tweedie", &gaussian_bayes_tweedie, py::arg("prior"),
        py::arg("x"));
  m.def("gaussian_bayes_reg", &gaussian_bayes_reg, py::arg("prior"), py::arg("x"),
        py::arg("rho"));
  m.def("sample_gaussian_prior", &sample_gaussian_prior, py::arg("spec"),
        py::arg("rng"));
  m.def("sample_gaussian_sequence", &sample_gaussian_sequence, py::arg("prior"),
        py::arg("n"), py::arg("rng"));

  py::class_<GaussianPosteriorState>(m, "GaussianPosteriorState")
      .def_readonly("log_weights", &GaussianPosteriorState::log_weights)
      .def_readonly("alpha", &GaussianPosteriorState::alpha)
      .def_readonly("train_n", &GaussianPosteriorState::train_n)
      .def("__len__", &GaussianPosteriorState::size);
  m.def("make_gaussian_state", &make_gaussian_state, py::arg("priors"),
        py::arg("train_n") = 1);
  m.def("init_gaussian_state", &init_gaussian_state, py::arg("spec"),
        py::arg("mc_draws"), py::arg("rng"), py::arg("train_n") = 1);
  m.def("gaussian_posterior_update",
        py::overload_cast<const GaussianPosteriorState&,
                          const std::vector<double>&, double>(&posterior_update),
        py::arg("state"), py::arg("xs"), py::arg("alpha"));
  m.def("gaussian_hb_estimate",
        py::overload_cast<const GaussianPosteriorState&,
                          const std::vector<double>&>(&hb_estimate),
        py::arg("state"), py::arg("xs"));
  m.def(
      "gaussian_regret_eval",
      [](const py::function& estimator, const std::string& name,
         const GaussianPrior& g0, int n, int reps, std::uint64_t seed) {
        return gaussian_regret_eval(wrap_gaussian(estimator), name, g0, n, reps,
                                    seed, /*workers=*/1);
      },
      py::arg("estimator"), py::arg("name"), py::arg("g0"), py::arg("n"),
      py::arg("reps"), py::arg("seed"));

  m.def("config_hash_of_json", [](const std::string& text) {
    return config_hash(config_from_json(nlohmann::json::parse(text)));
  });
}
