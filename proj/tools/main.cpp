// eblab: empirical-Bayes benchmark harness for the Poisson and
// normal-means models. Subcommands: gen, regret, lengen, alphafit,
// contract, npmle. Logs go to stderr; data goes to files under the
// configured output directory, with the config hash embedded in every
// filename.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "eblab/baselines.hpp"
#include "eblab/bench.hpp"
#include "eblab/config.hpp"
#include "eblab/gaussian.hpp"
#include "eblab/hb.hpp"
#include "eblab/mixture.hpp"
#include "eblab/pop.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Options {
  std::string command;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<int> workers;
  std::string input;  // npmle: optional EBDS dataset to fit instead of sampling
  bool csv_export = false;  // gen: also dump a CSV view
};

eb::ExperimentConfig load(const Options& opt) {
  std::ifstream in(opt.config_path);
  if (!in) throw std::invalid_argument("cannot open config file: " + opt.config_path);
  nlohmann::json doc = nlohmann::json::parse(in);  // throws on malformed input
  for (const auto& ov : opt.overrides) eb::apply_override(doc, ov);
  if (const char* env = std::getenv("EB_LAB_SEED"))
    doc["root_seed"] = std::stoull(env);
  auto cfg = eb::config_from_json(doc);
  if (opt.workers) cfg.workers = *opt.workers;
  return cfg;
}

const eb::DiscretePrior& require_test_prior(const eb::ExperimentConfig& cfg) {
  if (!cfg.test_prior)
    throw std::invalid_argument("config: this subcommand needs a test_prior");
  return *cfg.test_prior;
}

eb::PosteriorState training_state(const eb::ExperimentConfig& cfg) {
  eb::Rng rng(eb::derive_seed(cfg.root_seed, "init_state"));
  return eb::init_state(cfg.pop, cfg.mc_draws, rng, cfg.n);
}

std::filesystem::path out_path(const eb::ExperimentConfig& cfg,
                               const std::string& stem, const std::string& ext) {
  std::filesystem::create_directories(cfg.output_dir);
  return cfg.output_dir / (stem + "_" + eb::config_hash(cfg) + ext);
}

int cmd_gen(const Options& opt, const eb::ExperimentConfig& cfg) {
  const auto ds = eb::gen_dataset(cfg.pop, cfg.n, cfg.train_batches, cfg.root_seed);
  const auto path = out_path(cfg, "dataset", ".ebds");
  eb::write_dataset(ds, path);
  std::cerr << "wrote " << ds.batches.size() << " batches to " << path << "\n";
  if (opt.csv_export) {
    const auto csv = out_path(cfg, "dataset", ".csv");
    eb::write_dataset_csv(ds, csv);
    std::cerr << "wrote " << csv << "\n";
  }
  return kExitOk;
}

int cmd_regret_poisson(const eb::ExperimentConfig& cfg) {
  for (const auto& name : cfg.estimators)
    if (name != "oracle" && name != "robbins" && name != "npmle" &&
        name != "hb" && name != "erm") {
      std::cerr << "unknown estimator: " << name << "\n";
      return kExitConfig;
    }
  const auto& g0 = require_test_prior(cfg);
  std::vector<eb::RegretReport> reports;
  for (const auto& name : cfg.estimators) {
    eb::PoissonEstimator est;
    if (name == "oracle") {
      est = [&g0](const std::vector<int>& xs) { return eb::oracle_bayes(g0, xs); };
    } else if (name == "robbins") {
      const double clip = cfg.pop.A;
      est = [clip](const std::vector<int>& xs) { return eb::robbins(xs, clip); };
    } else if (name == "npmle") {
      eb::NpmleConfig ncfg;
      ncfg.grid_step = cfg.npmle_grid_step;
      const double A = cfg.pop.A;
      est = [ncfg, A](const std::vector<int>& xs) {
        return eb::oracle_bayes(eb::npmle_grid(xs, ncfg, A).prior, xs);
      };
    } else if (name == "hb") {
      auto state = std::make_shared<eb::PosteriorState>(training_state(cfg));
      est = [state](const std::vector<int>& xs) { return eb::hb_estimate(*state, xs); };
    } else if (name == "erm") {
      auto train = std::make_shared<eb::Dataset>(eb::gen_dataset(
          cfg.pop, cfg.n, cfg.train_batches, eb::derive_seed(cfg.root_seed, "train")));
      est = [train](const std::vector<int>& xs) {
        return eb::erm_type_match(*train, xs);
      };
    } else {
      std::cerr << "unknown estimator: " << name << "\n";
      return kExitConfig;
    }
    auto rep = eb::regret_eval(est, name, g0, cfg.n, cfg.reps, cfg.root_seed,
                               cfg.workers);
    rep.config_hash = eb::config_hash(cfg);
    std::cerr << name << ": regret " << rep.mean_regret << " +- " << rep.std_error
              << "\n";
    reports.push_back(std::move(rep));
  }
  eb::write_report(reports, out_path(cfg, "regret", ".csv"));
  return kExitOk;
}

int cmd_regret_gaussian(const eb::ExperimentConfig& cfg) {
  for (const auto& name : cfg.estimators)
    if (name != "oracle" && name != "hb") {
      std::cerr << "unknown estimator: " << name << "\n";
      return kExitConfig;
    }
  if (!cfg.gaussian_test_prior)
    throw std::invalid_argument("config: gaussian regret needs a test_prior");
  const auto& g0 = *cfg.gaussian_test_prior;
  std::vector<eb::RegretReport> reports;
  for (const auto& name : cfg.estimators) {
    eb::GaussianEstimator est;
    if (name == "oracle") {
      est = [&g0](const std::vector<double>& xs) {
        std::vector<double> out;
        out.reserve(xs.size());
        for (double x : xs) out.push_back(eb::gaussian_bayes(g0, x));
        return out;
      };
    } else if (name == "hb") {
      std::shared_ptr<eb::GaussianPosteriorState> state;
      if (!cfg.gaussian_components.empty()) {
        state = std::make_shared<eb::GaussianPosteriorState>(
            eb::make_gaussian_state(cfg.gaussian_components, cfg.n));
      } else {
        eb::Rng rng(eb::derive_seed(cfg.root_seed, "init_state"));
        state = std::make_shared<eb::GaussianPosteriorState>(
            eb::init_gaussian_state(cfg.pop, cfg.mc_draws, rng, cfg.n));
      }
      est = [state](const std::vector<double>& xs) {
        return eb::hb_estimate(*state, xs);
      };
    } else {
      std::cerr << "unknown estimator: " << name << "\n";
      return kExitConfig;
    }
    auto rep = eb::gaussian_regret_eval(est, name, g0, cfg.n, cfg.reps,
                                        cfg.root_seed, cfg.workers);
    rep.config_hash = eb::config_hash(cfg);
    std::cerr << name << ": regret " << rep.mean_regret << " +- " << rep.std_error
              << "\n";
    reports.push_back(std::move(rep));
  }
  eb::write_report(reports, out_path(cfg, "regret", ".csv"));
  return kExitOk;
}

int cmd_lengen(const eb::ExperimentConfig& cfg) {
  if (cfg.n_test_list.empty())
    throw std::invalid_argument("config: lengen needs n_test_list");
  const auto state = training_state(cfg);
  eb::DiscretePrior g0;
  if (cfg.test_prior) {
    g0 = *cfg.test_prior;
  } else if (cfg.test_pop) {
    eb::Rng rng(eb::derive_seed(cfg.root_seed, "test_prior"));
    g0 = eb::sample_prior(*cfg.test_pop, rng);
  } else {
    throw std::invalid_argument("config: lengen needs test_prior or test_pop");
  }
  auto reports =
      eb::length_gen_sweep(state, g0, cfg.n_test_list, cfg.reps, cfg.root_seed,
                           cfg.workers);
  for (auto& r : reports) {
    r.config_hash = eb::config_hash(cfg);
    std::cerr << "n_test " << r.n_test << ": regret " << r.mean_regret << " +- "
              << r.std_error << "\n";
  }
  eb::write_report(reports, out_path(cfg, "lengen", ".csv"));
  return kExitOk;
}

int cmd_alphafit(const eb::ExperimentConfig& cfg) {
  if (cfg.n_test_list.empty())
    throw std::invalid_argument("config: alphafit needs n_test_list");
  if (cfg.alpha_grid.empty())
    throw std::invalid_argument("config: alphafit needs alpha_grid");
  if (cfg.alpha_reference != "lengen" && cfg.alpha_reference != "hb")
    throw std::invalid_argument("config: alpha_reference must be lengen or hb");
  const auto state = training_state(cfg);
  eb::PoissonEstimator reference;  // empty = lengen
  if (cfg.alpha_reference == "hb")
    reference = [&state](const std::vector<int>& xs) {
      return eb::hb_estimate(state, xs);
    };
  std::vector<std::pair<int, eb::AlphaFitResult>> results;
  for (int n_test : cfg.n_test_list) {
    auto fit = eb::alpha_fit(state, n_test, cfg.alpha_grid, cfg.reps,
                             cfg.root_seed, reference, cfg.workers);
    std::cerr << "n_test " << n_test << ": alpha_star " << fit.alpha_star << "\n";
    results.emplace_back(n_test, std::move(fit));
  }
  eb::write_alpha_csv(results, cfg.n, cfg.reps, eb::config_hash(cfg),
                      out_path(cfg, "alphafit", ".csv"));
  return kExitOk;
}

int cmd_contract(const eb::ExperimentConfig& cfg) {
  if (cfg.n_test_list.empty())
    throw std::invalid_argument("config: contract needs n_test_list (the n grid)");
  const auto state = training_state(cfg);
  const auto& g0 = require_test_prior(cfg);
  const auto rows = eb::contraction_diag(state, g0, cfg.n_test_list,
                                         cfg.contraction_reps, cfg.root_seed,
                                         cfg.workers);
  for (const auto& r : rows)
    std::cerr << "n " << r.n << ": median H2 " << r.median_h2 << ", q90 "
              << r.q90_h2 << "\n";
  eb::write_contraction_csv(rows, eb::config_hash(cfg),
                            out_path(cfg, "contraction", ".csv"));
  return kExitOk;
}

int cmd_npmle(const Options& opt, const eb::ExperimentConfig& cfg) {
  std::vector<int> xs;
  double A = cfg.pop.A;
  if (!opt.input.empty()) {
    const auto ds = eb::read_dataset(opt.input);
    if (ds.batches.empty()) throw std::runtime_error("empty dataset");
    xs = ds.batches.front().x;
    A = ds.pop.A;
  } else {
    const auto& g0 = require_test_prior(cfg);
    eb::Rng rng(eb::derive_seed(cfg.root_seed, "npmle_sample"));
    xs = eb::sample_poisson_sequence(g0, cfg.n, rng);
    A = g0.support_bound;
  }
  eb::NpmleConfig ncfg;
  ncfg.grid_step = cfg.npmle_grid_step;
  const auto res = eb::npmle_grid(xs, ncfg, A);
  std::cerr << "npmle: " << res.iterations << " iterations, kkt residual "
            << res.kkt_residual << "\n";
  const auto path = out_path(cfg, "npmle", ".csv");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "atom,weight\n";
  for (std::size_t j = 0; j < res.prior.atoms.size(); ++j)
    out << eb::format_real(res.prior.atoms[j]) << ','
        << eb::format_real(res.prior.weights[j]) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"empirical-Bayes benchmark harness (Poisson / normal-means)"};
  app.require_subcommand(1);

  Options opt;
  int workers = -1;
  for (const auto& name : {"gen", "regret", "lengen", "alphafit", "contract", "npmle"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "JSON experiment config")->required();
    sub->add_option("--set", opt.overrides,
                    "dotted-path override, e.g. pop.k=5 or reps=100");
    sub->add_option("--workers", workers, "worker thread count (0 = all cores)");
    if (std::string(name) == "npmle")
      sub->add_option("--input", opt.input, "EBDS dataset to fit (batch 0)");
    if (std::string(name) == "gen")
      sub->add_flag("--csv", opt.csv_export, "also write a CSV view");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }
  opt.command = app.get_subcommands().front()->get_name();
  if (workers >= 0) opt.workers = workers;

  eb::ExperimentConfig cfg;
  try {
    cfg = load(opt);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (opt.command == "gen") return cmd_gen(opt, cfg);
    if (opt.command == "regret")
      return cfg.model == eb::ModelKind::Poisson ? cmd_regret_poisson(cfg)
                                                 : cmd_regret_gaussian(cfg);
    if (opt.command == "lengen") return cmd_lengen(cfg);
    if (opt.command == "alphafit") return cmd_alphafit(cfg);
    if (opt.command == "contract") return cmd_contract(cfg);
    if (opt.command == "npmle") return cmd_npmle(opt, cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  std::cerr << "unknown subcommand\n";
  return kExitConfig;
}
