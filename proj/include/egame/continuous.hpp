#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "egame/ebsde.hpp"

namespace egame {

/// Splits a driver of linear growth, |f(x, z)| <= kappa (1 + |z|), into
/// f(x, z) = phi(x, z) z + psi(x, z) with |phi| <= 2 kappa and |psi| <= 2 kappa:
///
///   phi(x, z) = 1{|z| >= 1} f(x, z) / z,   psi(x, z) = 1{|z| < 1} f(x, z).
///
/// psi carries no f(x, 0) term; adding one would break the identity on |z| >= 1.
class Decomposition {
 public:
  Decomposition(ScalarDriver f, double kappa) : f_(std::move(f)), kappa_(kappa) {}

  double phi(double x, double z) const {
    return std::abs(z) >= 1.0 ? f_(x, z) * z / (z * z) : 0.0;
  }
  double psi(double x, double z) const { return std::abs(z) < 1.0 ? f_(x, z) : 0.0; }
  double kappa() const noexcept { return kappa_; }
  /// Declared bound shared by |phi| and |psi|.
  double bound() const noexcept { return 2.0 * kappa_; }
  const ScalarDriver& driver() const noexcept { return f_; }

 private:
  ScalarDriver f_;
  double kappa_;
};

struct DecomposeOptions {
  std::size_t samples = 10000;
  double x_radius = 6.0;
  double z_radius = 20.0;
  std::uint64_t seed = 0xdec0;
};

/// Builds the decomposition after a sampled check of the growth bound;
/// throws GrowthViolation when a sample has |f(x, z)| > kappa (1 + |z|).
Decomposition decompose(ScalarDriver f, double kappa, const DecomposeOptions& options = {});

struct ContinuousOptions {
  double tol = 1e-6;
  std::size_t max_iter = 200;
  SolverOptions inner;
  /// Starting xi; empty means xi = 0.
  std::vector<double> initial_xi;
};

struct ContinuousResult {
  ErgodicSolution solution;
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> lambda_deltas;
  std::vector<double> xi_deltas;
  /// Interior sup |L_h v + f(x, xi) - lambda| against the original driver.
  double original_residual = 0.0;
};

/// Ergodic BSDE with a continuous driver of linear growth, solved by
/// iterating the frozen Lipschitz drivers f_n(x, z) = phi(x, xi_{n-1}) z + psi(x, xi_{n-1}).
/// Hitting max_iter is reported in the result, not thrown.
ContinuousResult solve_continuous_ebsde(const SdeModel& model, const Decomposition& decomposition,
                                        const Grid1D& grid, const ContinuousOptions& options = {});

}  // namespace egame
