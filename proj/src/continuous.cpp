#include "egame/continuous.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "egame/errors.hpp"
#include "egame/parallel.hpp"

namespace egame {

Decomposition decompose(ScalarDriver f, double kappa, const DecomposeOptions& options) {
  if (!f) throw InvalidArgument("driver is empty");
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw InvalidArgument("growth constant kappa must be positive and finite");
  auto rng = keyed_stream(options.seed, 0);
  std::uniform_real_distribution<double> ux(-options.x_radius, options.x_radius);
  std::uniform_real_distribution<double> uz(-options.z_radius, options.z_radius);
  for (std::size_t k = 0; k < options.samples; ++k) {
    const double x = ux(rng);
    // Alternate wide and unit-scale draws so both branches of the split are probed.
    const double z = (k % 2 == 0) ? uz(rng) : uz(rng) / options.z_radius;
    const double value = f(x, z);
    if (!std::isfinite(value) || std::abs(value) > kappa * (1.0 + std::abs(z)) * (1.0 + 1e-12))
      throw GrowthViolation("driver exceeds kappa (1 + |z|) at x = " + std::to_string(x) +
                            ", z = " + std::to_string(z));
  }
  return Decomposition(std::move(f), kappa);
}

ContinuousResult solve_continuous_ebsde(const SdeModel& model, const Decomposition& decomposition,
                                        const Grid1D& grid, const ContinuousOptions& options) {
  if (model.dim() != 1) throw InvalidArgument("continuous-driver solver needs a one-dimensional model");
  if (options.max_iter == 0) throw InvalidArgument("max_iter must be positive");
  if (!(options.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  std::vector<double> xi = options.initial_xi;
  if (xi.empty()) xi.assign(grid.size(), 0.0);
  if (xi.size() != grid.size()) throw GridMismatch("initial xi does not match the grid");

  const double bound = decomposition.bound();
  SolverOptions inner = options.inner;
  std::optional<double> previous_lambda;
  ContinuousResult result{ErgodicSolution{grid, {}, {}, 0.0, 0.0, 0, 0.0}, false, 0, {}, {}, 0.0};

  for (std::size_t n = 1; n <= options.max_iter; ++n) {
    std::vector<double> phi(grid.size()), psi(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      phi[j] = decomposition.phi(grid.x(j), xi[j]);
      psi[j] = decomposition.psi(grid.x(j), xi[j]);
    }
    DriverSpec frozen;
    frozen.f = [grid, phi, psi](double x, double z) {
      const std::size_t j = grid.nearest(x);
      return phi[j] * z + psi[j];
    };
    frozen.slope = [grid, phi](double x, double) { return phi[grid.nearest(x)]; };
    frozen.lipschitz_z = bound;
    frozen.bound_at_zero = bound;

    result.solution = solve_ergodic(model, frozen, grid, inner);
    inner.initial_v = result.solution.v;

    double xi_delta = 0.0;
    for (std::size_t j = grid.interior_begin(); j < grid.interior_end(); ++j)
      xi_delta = std::max(xi_delta, std::abs(result.solution.xi[j] - xi[j]));
    const double lambda_delta = previous_lambda
                                    ? std::abs(result.solution.lambda - *previous_lambda)
                                    : std::numeric_limits<double>::infinity();
    result.lambda_deltas.push_back(lambda_delta);
    result.xi_deltas.push_back(xi_delta);
    result.iterations = n;
    xi = result.solution.xi;
    previous_lambda = result.solution.lambda;
    // A vanishing xi change means the next frozen driver is identical, so the
    // lambda delta of that sweep would be zero as well.
    if (xi_delta < options.tol && (lambda_delta < options.tol || xi_delta == 0.0)) {
      result.converged = true;
      break;
    }
  }

  DriverSpec original;
  original.f = decomposition.driver();
  result.original_residual = hjb_residual(model, result.solution, original);
  return result;
}

}  // namespace egame
