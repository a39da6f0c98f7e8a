#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "egame/estimate.hpp"
#include "egame/game.hpp"
#include "egame/nash.hpp"
#include "egame/sde.hpp"

namespace egame {

struct McParams {
  double T = 200.0;
  double burn_in = 20.0;
  double h = 0.01;
  std::size_t n_paths = 200;
  std::uint64_t seed = 20240601;
  /// Discounted payoffs need e^{-alpha T} L_max / alpha <= tail_epsilon.
  double tail_epsilon = 1e-3;
  unsigned threads = 0;
};

/// Replaces one player's feedback control, node by node, leaving the rest
/// of the joint policy untouched.
struct PolicyOverride {
  std::size_t player = 0;
  std::vector<std::size_t> indices;  ///< control-grid index of `player` per node
  std::string description;
};

/// Smallest horizon with discounted tail e^{-alpha T} L_max / alpha <= epsilon.
double effective_horizon(double alpha, double cost_bound, double epsilon);

/// Payoff of player i when every player follows `policy` (nearest-node
/// lookup, clamped), simulated under the drift shift sigma(x) R(u(x)).
/// Ergodic kind: average of L_i over [burn_in, T]. Discounted kind: left
/// Riemann sum of e^{-alpha t} L_i over [0, T] from the model's x0.
PayoffEstimate estimate_payoff(const SdeModel& model, const GameSpec& spec,
                               const FeedbackPolicy& policy, std::size_t player,
                               PayoffKind kind, const McParams& mc,
                               const PolicyOverride* deviation = nullptr);

enum class DeviationKind { equilibrium, constant, node_perturbation, random_feedback };

std::string to_string(DeviationKind kind);

struct DeviationOptions {
  /// Sampled deviations per player, split evenly over the three kinds.
  std::size_t n_deviations = 60;
  double grid_error_budget = 0.05;
  std::uint64_t seed = 7;
  /// Perturbed nodes are drawn from those with |x| <= this radius.
  double perturbation_radius = 3.0;
};

struct DeviationOutcome {
  std::size_t player = 0;
  DeviationKind kind = DeviationKind::equilibrium;
  std::string description;
  PayoffEstimate estimate;
  double reference = 0.0;  ///< lambda_i, or v_tilde(x0) for a discounted player
  double margin = 0.0;     ///< estimate - reference
  double threshold = 0.0;  ///< 3 stderr + grid error budget
  bool pass = false;
};

struct DeviationReport {
  std::vector<DeviationOutcome> outcomes;
  std::size_t n_failed = 0;
  bool all_passed() const noexcept { return n_failed == 0; }
  /// Which deviation class the report covers.
  std::string scope;
};

/// Checks the Nash inequalities by simulation. For each player the
/// equilibrium itself is estimated (|margin| <= threshold), then sampled
/// unilateral deviations (margin >= -threshold). Failures are recorded.
DeviationReport nash_deviation_test(const SdeModel& model, const GameSpec& spec,
                                    const NashSolution& nash, const DeviationOptions& options,
                                    const McParams& mc);

struct PathResidual {
  double rms = 0.0;         ///< root mean square of the one-step residual
  double normalized = 0.0;  ///< rms / sqrt(h)
  double mean = 0.0;
  std::size_t n_steps = 0;
};

/// One-step residual of Y = v(X) along equilibrium paths of an ergodic player:
///   v(X_{t+h}) - v(X_t) + (H_i(X_t, xi(X_t), u*(X_t)) - lambda_i) h - xi(X_t) dW_t,
/// where dW is the increment of the unshifted Brownian motion. Paths start at
/// x0 and steps before burn_in are skipped.
PathResidual bsde_path_residual(const SdeModel& model, const GameSpec& spec,
                                const NashSolution& nash, std::size_t player,
                                const McParams& mc, double lambda_offset = 0.0);

}  // namespace egame
