#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "egame/grid.hpp"
#include "egame/sde.hpp"

namespace egame {

/// A single player's control value.
using Control = Eigen::VectorXd;

/// Finite, duplicate-free list of control values for one player.
struct ControlGrid {
  std::size_t player = 0;
  std::vector<Control> points;

  /// `count` equally spaced scalar controls on [lo, hi].
  static ControlGrid uniform(std::size_t player, double lo, double hi, std::size_t count);

  /// Throws InvalidArgument if empty or if two points coincide.
  void validate() const;
};

/// One grid index per player.
struct JointControl {
  std::vector<std::size_t> index;

  auto operator<=>(const JointControl&) const = default;
  bool operator==(const JointControl&) const = default;
};

using DriftMap = std::function<Vector(std::span<const Control> u)>;
using CostFunction = std::function<double(const Vector& x, std::span<const Control> u)>;

/// n-player game data: control grids, bounded drift map R(u) and bounded
/// running costs L_i(x, u). The Hamiltonian of player i is z_i.R(u) + L_i(x, u).
class GameSpec {
 public:
  struct Params {
    std::size_t state_dim = 1;
    std::vector<ControlGrid> grids;
    DriftMap drift;
    double drift_bound = 0.0;
    std::vector<CostFunction> costs;
    double cost_bound = 0.0;
    double cost_lipschitz = 0.0;
    std::size_t check_samples = 2000;
    double check_radius = 10.0;
    std::uint64_t check_seed = 0x9a3e;
    /// R is tabulated over the product grid when it has at most this many points.
    std::size_t table_cap = 1'000'000;
  };

  explicit GameSpec(Params params);

  std::size_t n_players() const noexcept { return p_.grids.size(); }
  std::size_t state_dim() const noexcept { return p_.state_dim; }
  const ControlGrid& grid(std::size_t i) const { return p_.grids.at(i); }
  double drift_bound() const noexcept { return p_.drift_bound; }
  double cost_bound() const noexcept { return p_.cost_bound; }
  double cost_lipschitz() const noexcept { return p_.cost_lipschitz; }

  /// Number of joint controls, saturating at SIZE_MAX.
  std::size_t product_size() const noexcept { return product_; }

  /// Lexicographic rank of a joint control (player 0 most significant).
  std::size_t rank(const JointControl& u) const;
  JointControl unrank(std::size_t r) const;

  /// Writes the control values of `u` into `values` (resized as needed).
  void joint_values(const JointControl& u, std::vector<Control>& values) const;

  Vector drift(const JointControl& u) const;
  /// R at a lexicographic rank; requires has_drift_table().
  const Vector& tabulated_drift(std::size_t rank) const { return drift_table_[rank]; }
  bool has_drift_table() const noexcept { return !drift_table_.empty(); }
  Vector drift(std::span<const Control> values) const { return p_.drift(values); }
  double cost(std::size_t i, const Vector& x, std::span<const Control> values) const {
    return p_.costs[i](x, values);
  }
  double cost(std::size_t i, const Vector& x, const JointControl& u) const;

  void check_index(const JointControl& u) const;

  /// Returns a copy with c added to player i's cost.
  GameSpec with_cost_offset(std::size_t i, double c) const;
  const Params& params() const noexcept { return p_; }

 private:
  Params p_;
  std::size_t product_ = 0;
  std::vector<Vector> drift_table_;
};

/// H_i(x, z_i, u) = z_i . R(u) + L_i(x, u).
double hamiltonian(const GameSpec& spec, std::size_t i, const Vector& x,
                   const Vector& z_i, const JointControl& u);

struct IsaacOptions {
  /// Product grids up to this size are enumerated exhaustively.
  std::size_t enumeration_cap = 1'000'000;
  /// Values within tol * (1 + |min|) of a minimum count as minimal.
  double tie_tolerance = 1e-12;
  std::size_t max_best_response_rounds = 10'000;
};

/// A joint control at which every player's Hamiltonian is minimal in that
/// player's own control (a pure Nash point of the Hamiltonian game at (x, z)).
/// Enumeration returns the lexicographically smallest such point; larger
/// products use cyclic best response from the first joint control.
JointControl isaac_fixed_point(const GameSpec& spec, const Vector& x,
                               std::span<const Vector> z,
                               const IsaacOptions& options = {});

struct IsaacSample {
  Vector x;
  std::vector<Vector> z;
};
using IsaacSampler = std::function<IsaacSample(std::mt19937_64&)>;

/// Uniform samples of x in [-x_radius, x_radius]^N and z_i in [-z_radius, z_radius]^N.
IsaacSampler uniform_isaac_sampler(std::size_t state_dim, std::size_t n_players,
                                   double x_radius, double z_radius);

struct IsaacReport {
  std::size_t n_samples = 0;
  std::size_t n_pure_nash = 0;
  double fraction_with_pure_nash = 0.0;
  /// Max over samples of max_i |H_i*(x, z') - H_i*(x, z)| with |z' - z| = delta.
  double max_continuity_jump = 0.0;
};

/// Sampled diagnostic of Isaac's condition; failures are counted, not thrown.
IsaacReport verify_isaacs(const GameSpec& spec, const IsaacSampler& sampler,
                          std::size_t n_samples, double delta, std::uint64_t seed,
                          const IsaacOptions& options = {});

/// Joint feedback control on every node of a grid, with the z-values
/// (one per player per node) it was computed from.
struct FeedbackPolicy {
  Grid1D grid;
  std::vector<JointControl> controls;
  std::vector<std::vector<double>> z;  ///< z[node][player]

  const JointControl& at(double x) const { return controls[grid.nearest(x)]; }
};

/// Evaluates isaac_fixed_point at every node for the given per-player z fields.
FeedbackPolicy feedback_policy(const GameSpec& spec, const Grid1D& grid,
                               const std::vector<std::vector<double>>& xi,
                               const IsaacOptions& options = {});

}  // namespace egame
