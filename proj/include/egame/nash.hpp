#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "egame/ebsde.hpp"
#include "egame/game.hpp"

namespace egame {

struct PicardOptions {
  double tol = 1e-4;
  std::size_t max_iter = 50;
  /// xi <- (1 - damping) xi_prev + damping xi_new; 1 is plain Picard.
  double damping = 1.0;
  SolverOptions inner;
  IsaacOptions isaac;
};

using PlayerSolution = std::variant<ErgodicSolution, DiscountedSolution>;

/// Delta history of the outer iteration; entry [n][i] belongs to sweep n+1
/// and player i. Discounted players report alpha |dv(x_ref)| as their value delta.
struct ConvergenceReport {
  std::size_t iterations = 0;
  bool converged = false;
  /// True when the policy recomputed from the final xi equals the policy
  /// that produced the final per-player solutions.
  bool policy_stable = false;
  std::vector<std::vector<double>> value_deltas;
  std::vector<std::vector<double>> xi_deltas;
};

struct NashSolution {
  Grid1D grid;
  std::vector<PlayerSolution> players;
  FeedbackPolicy policy;
  ConvergenceReport convergence;
  double comparison_bound = 0.0;
  /// Discount rate of player 2 in asymmetric games.
  std::optional<double> alpha;

  std::size_t n_players() const noexcept { return players.size(); }
  bool is_discounted(std::size_t i) const {
    return std::holds_alternative<DiscountedSolution>(players.at(i));
  }
  const ErgodicSolution& ergodic(std::size_t i) const {
    return std::get<ErgodicSolution>(players.at(i));
  }
  const DiscountedSolution& discounted(std::size_t i) const {
    return std::get<DiscountedSolution>(players.at(i));
  }
  /// Ergodic value lambda_i; throws for a discounted player.
  double lambda(std::size_t i) const { return ergodic(i).lambda; }
  const std::vector<double>& values(std::size_t i) const;
  const std::vector<double>& xi(std::size_t i) const;
};

/// Frozen driver of player i: f(x, z) = z R(u(x)) + L_i(x, u(x)) with u the
/// node-wise policy. Lipschitz in z with constant R_bound.
DriverSpec frozen_driver(const GameSpec& spec, const FeedbackPolicy& policy, std::size_t i);

/// Picard iteration over the per-player ergodic equations, re-solving the
/// Isaac fixed point at every node between sweeps, starting from xi = 0.
/// Non-convergence is reported in the result, not thrown.
NashSolution picard_solve(const GameSpec& spec, const SdeModel& model, const Grid1D& grid,
                          const PicardOptions& options = {});

/// Continues the iteration from an existing solution for `sweeps` more sweeps.
NashSolution picard_continue(const GameSpec& spec, const SdeModel& model,
                             const NashSolution& from, std::size_t sweeps,
                             const PicardOptions& options = {});

/// Ergodic value of the dominating driver R_bound |z| + L_max; bounds every
/// player's lambda from above.
double comparison_bound(const GameSpec& spec, const SdeModel& model, const Grid1D& grid,
                        const SolverOptions& options = {});

/// Two-player game where player 1 is ergodic and player 2 discounts at rate alpha.
NashSolution asymmetric_solve(const GameSpec& spec, const SdeModel& model, double alpha,
                              const Grid1D& grid, const PicardOptions& options = {});

struct SweepRow {
  double alpha = 0.0;
  std::string status = "ok";
  double lambda1 = 0.0;
  double alpha_times_v2_at_0 = 0.0;
  /// Interior sup distance between centered profiles v2 - v2(0) of this
  /// and the previous row; absent on the first row.
  std::optional<double> centered_v2_profile_distance;
  bool converged = false;
};

/// Runs asymmetric_solve for each alpha in a strictly decreasing list.
std::vector<SweepRow> vanishing_discount_sweep(const GameSpec& spec, const SdeModel& model,
                                               const Grid1D& grid,
                                               const std::vector<double>& alphas,
                                               const PicardOptions& options = {});

/// Gaps |alpha v2(0) - lambda| along a sweep and whether they decrease.
struct SweepAssessment {
  std::vector<double> gaps;
  /// Rows whose gap exceeds the previous one.
  std::size_t inversions = 0;
  /// Every inversion is within the slack and there are at most the allowed number.
  bool monotone = false;
  double final_gap = 0.0;
};

/// Failed rows (NaN values) count as unbounded inversions.
SweepAssessment assess_sweep(const std::vector<SweepRow>& rows, double ergodic_lambda,
                             double slack = 1e-3, std::size_t allowed_inversions = 1);

}  // namespace egame
