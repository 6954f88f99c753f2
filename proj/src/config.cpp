#include "eblab/config.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace eb {

using nlohmann::json;

namespace {

std::string kind_name(PopKind k) {
  switch (k) {
    case PopKind::UniformDirichlet: return "uniform_dirichlet";
    case PopKind::GridMultinomial: return "grid_multinomial";
    case PopKind::Neural: return "neural";
    case PopKind::Finite: return "finite";
  }
  throw std::logic_error("kind_name: unreachable");
}

PopKind kind_from_name(const std::string& s) {
  if (s == "uniform_dirichlet") return PopKind::UniformDirichlet;
  if (s == "grid_multinomial") return PopKind::GridMultinomial;
  if (s == "neural") return PopKind::Neural;
  if (s == "finite") return PopKind::Finite;
  throw std::invalid_argument("unknown PoP kind: " + s);
}

}  // namespace

json prior_to_json(const DiscretePrior& g) {
  return json{{"atoms", g.atoms}, {"weights", g.weights},
              {"support_bound", g.support_bound}};
}

DiscretePrior prior_from_json(const json& j) {
  DiscretePrior g;
  g.atoms = j.at("atoms").get<std::vector<double>>();
  g.weights = j.at("weights").get<std::vector<double>>();
  g.support_bound = j.at("support_bound").get<double>();
  validate(g);
  return g;
}

json gaussian_prior_to_json(const GaussianPrior& g) {
  return json{{"atoms", g.atoms}, {"weights", g.weights},
              {"support_bound", g.support_bound}};
}

GaussianPrior gaussian_prior_from_json(const json& j) {
  GaussianPrior g;
  g.atoms = j.at("atoms").get<std::vector<double>>();
  g.weights = j.at("weights").get<std::vector<double>>();
  g.support_bound = j.at("support_bound").get<double>();
  validate(g);
  return g;
}

json pop_to_json(const PoPSpec& spec) {
  json j{{"kind", kind_name(spec.kind)}, {"A", spec.A}};
  switch (spec.kind) {
    case PopKind::UniformDirichlet:
      j["k"] = spec.k;
      break;
    case PopKind::GridMultinomial:
      j["grid_step"] = spec.grid_step;
      break;
    case PopKind::Finite: {
      json comps = json::array();
      for (const auto& g : spec.components) comps.push_back(prior_to_json(g));
      j["components"] = comps;
      break;
    }
    case PopKind::Neural:
      j["mixture_count"] = spec.neural_mixture_count;
      j["hidden_dim"] = spec.neural_hidden_dim;
      j["grid_points"] = spec.neural_grid_points;
      j["scale_to_support"] = spec.neural_scale_to_support;
      break;
  }
  return j;
}

PoPSpec pop_from_json(const json& j) {
  PoPSpec spec;
  spec.kind = kind_from_name(j.at("kind").get<std::string>());
  spec.A = j.at("A").get<double>();
  switch (spec.kind) {
    case PopKind::UniformDirichlet:
      spec.k = j.at("k").get<int>();
      break;
    case PopKind::GridMultinomial:
      spec.grid_step = j.value("grid_step", 0.1);
      break;
    case PopKind::Finite:
      for (const auto& c : j.at("components"))
        spec.components.push_back(prior_from_json(c));
      break;
    case PopKind::Neural:
      spec.neural_mixture_count = j.value("mixture_count", 4);
      spec.neural_hidden_dim = j.value("hidden_dim", 8);
      spec.neural_grid_points = j.value("grid_points", 512);
      spec.neural_scale_to_support = j.value("scale_to_support", true);
      break;
  }
  validate(spec);
  return spec;
}

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  const std::string model = j.value("model", "poisson");
  if (model == "poisson")
    cfg.model = ModelKind::Poisson;
  else if (model == "gaussian")
    cfg.model = ModelKind::Gaussian;
  else
    throw std::invalid_argument("unknown model: " + model);

  const auto& pop_json = j.at("pop");
  if (cfg.model == ModelKind::Gaussian &&
      kind_from_name(pop_json.at("kind").get<std::string>()) == PopKind::Finite) {
    // finite normal-means PoPs may carry negative atoms, which the
    // Poisson-side component list rejects
    cfg.pop.kind = PopKind::Finite;
    cfg.pop.A = pop_json.at("A").get<double>();
    for (const auto& c : pop_json.at("components"))
      cfg.gaussian_components.push_back(gaussian_prior_from_json(c));
    if (cfg.gaussian_components.empty())
      throw std::invalid_argument("config: finite PoP needs >= 1 component");
  } else {
    cfg.pop = pop_from_json(pop_json);
  }
  if (cfg.model == ModelKind::Gaussian && cfg.pop.kind != PopKind::Finite &&
      cfg.pop.kind != PopKind::UniformDirichlet)
    throw std::invalid_argument(
        "config: gaussian model supports uniform_dirichlet or finite PoPs");
  cfg.n = j.value("n", 50);
  if (cfg.n < 1) throw std::invalid_argument("config: n must be >= 1");
  cfg.n_test_list = j.value("n_test_list", std::vector<int>{});
  cfg.estimators = j.value("estimators", std::vector<std::string>{});
  cfg.reps = j.value("reps", 4096);
  if (cfg.reps < 1) throw std::invalid_argument("config: reps must be >= 1");
  cfg.contraction_reps = j.value("contraction_reps", 512);
  cfg.mc_draws = j.value("mc_draws", 4096);
  cfg.alpha_grid = j.value("alpha_grid", std::vector<double>{});
  cfg.root_seed = j.value("root_seed", std::uint64_t{0});
  cfg.output_dir = j.value("output_dir", std::string{"."});
  if (j.contains("test_prior")) {
    if (cfg.model == ModelKind::Gaussian)
      cfg.gaussian_test_prior = gaussian_prior_from_json(j.at("test_prior"));
    else
      cfg.test_prior = prior_from_json(j.at("test_prior"));
  }
  if (j.contains("test_pop")) cfg.test_pop = pop_from_json(j.at("test_pop"));
  cfg.train_batches = j.value("train_batches", 10000);
  cfg.npmle_grid_step = j.value("npmle_grid_step", 0.0);
  cfg.alpha_reference = j.value("alpha_reference", std::string{"lengen"});
  cfg.workers = j.value("workers", 0);
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["model"] = cfg.model == ModelKind::Poisson ? "poisson" : "gaussian";
  if (!cfg.gaussian_components.empty()) {
    json comps = json::array();
    for (const auto& g : cfg.gaussian_components)
      comps.push_back(gaussian_prior_to_json(g));
    j["pop"] = json{{"kind", kind_name(PopKind::Finite)},
                    {"A", cfg.pop.A},
                    {"components", comps}};
  } else {
    j["pop"] = pop_to_json(cfg.pop);
  }
  j["n"] = cfg.n;
  j["n_test_list"] = cfg.n_test_list;
  j["estimators"] = cfg.estimators;
  j["reps"] = cfg.reps;
  j["contraction_reps"] = cfg.contraction_reps;
  j["mc_draws"] = cfg.mc_draws;
  j["alpha_grid"] = cfg.alpha_grid;
  j["root_seed"] = cfg.root_seed;
  j["output_dir"] = cfg.output_dir.string();
  if (cfg.test_prior) j["test_prior"] = prior_to_json(*cfg.test_prior);
  if (cfg.gaussian_test_prior)
    j["test_prior"] = gaussian_prior_to_json(*cfg.gaussian_test_prior);
  if (cfg.test_pop) j["test_pop"] = pop_to_json(*cfg.test_pop);
  j["train_batches"] = cfg.train_batches;
  j["npmle_grid_step"] = cfg.npmle_grid_step;
  j["alpha_reference"] = cfg.alpha_reference;
  j["workers"] = cfg.workers;
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file: " + path.string());
  json j;
  in >> j;
  return config_from_json(j);
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must look like path.to.key=value: " +
                                assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot - start);
    if (key.empty()) throw std::invalid_argument("empty key in override: " + assignment);
    if (dot == std::string::npos) {
      json parsed = json::parse(value, nullptr, false);
      (*node)[key] = parsed.is_discarded() ? json(value) : parsed;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical
  const std::string bytes = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace eb
