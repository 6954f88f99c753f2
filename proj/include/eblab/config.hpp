#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eblab/pop.hpp"
#include "eblab/prior.hpp"

namespace eb {

enum class ModelKind { Poisson, Gaussian };

/// Everything an experiment run needs, parsed from a single JSON config
/// file. Fields not meaningful for a given subcommand are ignored by it.
struct ExperimentConfig {
  ModelKind model = ModelKind::Poisson;
  PoPSpec pop;
  int n = 50;
  std::vector<int> n_test_list;
  std::vector<std::string> estimators;
  int reps = 4096;
  int contraction_reps = 512;
  int mc_draws = 4096;
  std::vector<double> alpha_grid;
  std::uint64_t root_seed = 0;
  std::filesystem::path output_dir = ".";
  // optional extras
  std::optional<DiscretePrior> test_prior;       // G0 for regret/contract/npmle
  std::optional<PoPSpec> test_pop;               // test-prior generator for lengen
  int train_batches = 10000;                     // M for gen / erm
  double npmle_grid_step = 0.0;                  // 0: default 0.025 * A
  std::string alpha_reference = "lengen";        // or "hb"
  int workers = 0;                               // 0: available parallelism
  // gaussian-model variants: finite PoP components and G0 may have
  // negative atoms, so they bypass the DiscretePrior fields above
  std::vector<GaussianPrior> gaussian_components;
  std::optional<GaussianPrior> gaussian_test_prior;
};

nlohmann::json pop_to_json(const PoPSpec& spec);
PoPSpec pop_from_json(const nlohmann::json& j);

nlohmann::json prior_to_json(const DiscretePrior& g);
DiscretePrior prior_from_json(const nlohmann::json& j);

nlohmann::json gaussian_prior_to_json(const GaussianPrior& g);
GaussianPrior gaussian_prior_from_json(const nlohmann::json& j);

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Apply a dotted-path override "a.b.c=value" to a JSON document; values
/// parse as JSON when possible and fall back to strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// FNV-1a hash of the canonicalized (sorted-key, compact) config bytes,
/// as 16 hex digits. Stable across runs and platforms.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace eb
