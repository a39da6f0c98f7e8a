#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "egame/continuous.hpp"
#include "egame/ebsde.hpp"
#include "egame/game.hpp"
#include "egame/grid.hpp"
#include "egame/montecarlo.hpp"
#include "egame/nash.hpp"
#include "egame/sde.hpp"

namespace egame {

struct McConfig {
  McParams params;
  DeviationOptions deviations;
};

/// Scalar driver assembled from catalogue terms.
struct DriverConfig {
  DriverSpec spec;
  /// Constant kappa with |f(x, z)| <= kappa (1 + |z|).
  double growth = 0.0;
  /// False when some term is only continuous in z.
  bool lipschitz = true;
  std::string description;
};

struct ContinuousConfig {
  std::size_t max_iter = 200;
  /// Constant starting values xi^0; several entries probe non-uniqueness.
  std::vector<double> initial_xi{0.0};
  /// Ceiling on the interior residual against the original driver.
  double residual_ceiling = 1e-4;
};

struct SimulateConfig {
  double T = 10.0;
  double h = 0.01;
  std::size_t n_paths = 1;
  /// Constant drift shift r (sigma(x) r is added to the drift).
  double shift = 0.0;
  /// Horizon and path count of the moment check in check-assumptions.
  double moment_T = 10.0;
  std::size_t moment_paths = 2000;
};

/// Parsed experiment description. Every field has a default except the
/// model and grid sections, which commands that need them require.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  SdeModel::Params model;
  std::optional<GameSpec::Params> game;
  std::optional<Grid1D> grid;
  /// Outer iteration settings; `solver.inner` configures every single-equation solve.
  PicardOptions solver;
  McConfig mc;
  std::optional<double> alpha;
  std::vector<double> alphas;
  std::optional<DriverConfig> driver;
  ContinuousConfig continuous;
  SimulateConfig simulate;
  /// Canonical JSON text of the input with the effective seed; hashed into manifests.
  std::string canonical;
};

/// Parses a configuration document. Throws ConfigError naming the
/// offending field, e.g. "grid.m: missing required field".
ExperimentConfig parse_config(const nlohmann::json& document);

/// Reads a configuration file. A run manifest is accepted as well; its
/// embedded configuration and seed are used.
ExperimentConfig load_config(const std::string& path);

/// Sets the run seed and the seeds derived from it.
void set_seed(ExperimentConfig& config, std::uint64_t seed);

/// 64-bit FNV-1a hash.
std::uint64_t fnv1a(const std::string& bytes);

/// Names accepted by the catalogues, for help texts and error messages.
std::vector<std::string> game_presets();

}  // namespace egame
