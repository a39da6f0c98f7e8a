#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "egame/grid.hpp"
#include "egame/sde.hpp"

namespace egame {

using ScalarDriver = std::function<double(double x, double z)>;

/// Driver f(x, z) of a one-dimensional ergodic BSDE, Lipschitz in z with
/// constant `lipschitz_z` and |f(x, 0)| <= `bound_at_zero`.
struct DriverSpec {
  ScalarDriver f;
  double lipschitz_z = 0.0;
  double bound_at_zero = 0.0;
  /// Optional z-derivative (any element of the generalized gradient).
  /// When absent a central difference quotient is used.
  ScalarDriver slope;
};

struct DriverCheck {
  double lipschitz_excess = 0.0;  ///< max |f(x,z)-f(x,z')| - kappa|z-z'|
  double bound_excess = 0.0;      ///< max |f(x,0)| - l
};

/// Samples the Lipschitz and zero-bound conditions over the grid's x-range.
DriverCheck check_driver(const DriverSpec& driver, const Grid1D& grid,
                         std::size_t samples = 1000, double z_radius = 10.0,
                         std::uint64_t seed = 0xd71e);

enum class Scheme {
  /// Pseudo-time stepping implicit in the generator and in a linearization
  /// of f around the current z; an infinite pseudo step is Newton's method.
  linearized_implicit,
  /// Explicit relative value iteration v <- v + dt (L_h v + f - lambda)
  /// under the CFL restriction.
  explicit_relative_value,
};

struct SolverOptions {
  double tol = 1e-6;
  /// 0 selects the scheme default (200 implicit, 5'000'000 explicit sweeps).
  std::size_t max_sweeps = 0;
  Scheme scheme = Scheme::linearized_implicit;
  /// Pseudo time step; explicit default is 0.9 x the CFL bound, implicit
  /// default is infinite.
  std::optional<double> pseudo_dt;
  /// Warm start; empty means v = 0.
  std::vector<double> initial_v;
  bool validate_driver = true;
};

/// Markovian solution (v, xi, lambda) of L v + f(x, v' sigma) = lambda on a grid.
struct ErgodicSolution {
  Grid1D grid;
  std::vector<double> v;   ///< normalized so v[grid.ref_index()] = 0
  std::vector<double> xi;  ///< v'(x) sigma(x)
  double lambda = 0.0;
  double residual_sup = 0.0;  ///< interior sup |L_h v + f - lambda|
  std::size_t iterations = 0;
  double growth_constant = 0.0;  ///< max |v(x)| / (1 + x^2)
};

/// Solution (v, xi) of L v + f(x, v' sigma) = alpha v on a grid.
struct DiscountedSolution {
  Grid1D grid;
  std::vector<double> v_tilde;
  std::vector<double> xi_tilde;
  double alpha = 0.0;
  double residual_sup = 0.0;
  std::size_t iterations = 0;
  double bound_constant = 0.0;  ///< alpha * max |v_tilde|, so |v_tilde| <= C / alpha
};

/// Stability bound on the explicit pseudo time step for this problem.
double cfl_bound(const SdeModel& model, const DriverSpec& driver, const Grid1D& grid,
                 double alpha = 0.0);

/// Solves the ergodic HJB equation L v + f(x, v' sigma) = lambda by central
/// differences with a zero-derivative closure at both ends.
ErgodicSolution solve_ergodic(const SdeModel& model, const DriverSpec& driver,
                              const Grid1D& grid, const SolverOptions& options = {});

/// Solves the discounted equation L v + f(x, v' sigma) = alpha v.
DiscountedSolution solve_discounted(const SdeModel& model, const DriverSpec& driver,
                                    double alpha, const Grid1D& grid,
                                    const SolverOptions& options = {});

/// Interior sup |L_h v + f(x, xi) - lambda| recomputed from a solution.
double hjb_residual(const SdeModel& model, const ErgodicSolution& solution,
                    const DriverSpec& driver);

/// Interior sup |L_h v + f(x, xi) - alpha v| recomputed from a solution.
double hjb_residual(const SdeModel& model, const DiscountedSolution& solution,
                    const DriverSpec& driver);

/// Central-difference xi = v' sigma with zero derivative at the two end nodes.
std::vector<double> gradient_times_sigma(const SdeModel& model, const Grid1D& grid,
                                         const std::vector<double>& v);

}  // namespace egame
