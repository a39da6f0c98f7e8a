#include "egame/ebsde.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>

namespace egame {

namespace {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Three-point stencil of the generator L v = sigma^2/2 v'' + b v' with a
/// ghost-node Neumann closure at both ends.
struct Generator {
  std::size_t m = 0;
  double dx = 0.0;
  std::vector<double> x, b, s, lo, di, up;

  Generator(const SdeModel& model, const Grid1D& grid) : m(grid.size()), dx(grid.dx()) {
    if (model.dim() != 1) throw InvalidArgument("grid solvers need a one-dimensional model");
    x.resize(m);
    b.resize(m);
    s.resize(m);
    lo.assign(m, 0.0);
    di.assign(m, 0.0);
    up.assign(m, 0.0);
    const double dx2 = dx * dx;
    for (std::size_t j = 0; j < m; ++j) {
      x[j] = grid.x(j);
      b[j] = model.drift_1d(x[j]);
      s[j] = model.sigma_1d(x[j]);
      const double diffusion = 0.5 * s[j] * s[j] / dx2;
      if (j == 0) {
        up[j] = 2.0 * diffusion;
        di[j] = -2.0 * diffusion;
      } else if (j == m - 1) {
        lo[j] = 2.0 * diffusion;
        di[j] = -2.0 * diffusion;
      } else {
        const double advection = b[j] / (2.0 * dx);
        lo[j] = diffusion - advection;
        di[j] = -2.0 * diffusion;
        up[j] = diffusion + advection;
      }
    }
  }

  double apply(const std::vector<double>& v, std::size_t j) const {
    double out = di[j] * v[j];
    if (j > 0) out += lo[j] * v[j - 1];
    if (j + 1 < m) out += up[j] * v[j + 1];
    return out;
  }

  /// v'(x_j) sigma(x_j); zero at the end nodes.
  double z(const std::vector<double>& v, std::size_t j) const {
    if (j == 0 || j == m - 1) return 0.0;
    return (v[j + 1] - v[j - 1]) / (2.0 * dx) * s[j];
  }
};

/// L_h v + f(x, z) at every node, plus the z used.
void evaluate(const Generator& gen, const DriverSpec& driver, const std::vector<double>& v,
              std::vector<double>& z, std::vector<double>& rate) {
  z.resize(gen.m);
  rate.resize(gen.m);
  for (std::size_t j = 0; j < gen.m; ++j) {
    z[j] = gen.z(v, j);
    rate[j] = gen.apply(v, j) + driver.f(gen.x[j], z[j]);
  }
}

/// Interior sup of |rate - lambda - alpha v|.
double interior_residual(const Grid1D& grid, const std::vector<double>& rate,
                         const std::vector<double>& v, double lambda, double alpha) {
  double res = 0.0;
  for (std::size_t j = grid.interior_begin(); j < grid.interior_end(); ++j)
    res = std::max(res, std::abs(rate[j] - lambda - alpha * v[j]));
  return res;
}

double driver_slope(const DriverSpec& driver, double x, double z) {
  double s;
  if (driver.slope) {
    s = driver.slope(x, z);
  } else {
    const double eps = 1e-6 * (1.0 + std::abs(z));
    s = (driver.f(x, z + eps) - driver.f(x, z - eps)) / (2.0 * eps);
  }
  if (driver.lipschitz_z > 0.0) s = std::clamp(s, -driver.lipschitz_z, driver.lipschitz_z);
  return s;
}

struct CoreResult {
  std::vector<double> v;
  std::vector<double> z;
  double lambda = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// One linearized implicit step. Ergodic when `ergodic` (lambda unknown,
/// v pinned at the reference node), otherwise discounted with rate alpha.
void implicit_step(const Generator& gen, const Grid1D& grid, const DriverSpec& driver,
                   const std::vector<double>& v, const std::vector<double>& z,
                   bool ergodic, double alpha, double dt, std::vector<double>& v_out,
                   double& lambda_out) {
  const std::size_t m = gen.m;
  const std::size_t ref = grid.ref_index();
  const double inv_dt = std::isinf(dt) ? 0.0 : 1.0 / dt;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(5 * m);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(m));
  auto put = [&](std::size_t row, std::size_t col, double value) {
    if (ergodic && col == ref) return;  // v_ref = 0
    entries.emplace_back(static_cast<int>(row), static_cast<int>(col), value);
  };
  for (std::size_t j = 0; j < m; ++j) {
    const double fz = driver.f(gen.x[j], z[j]);
    const bool edge = (j == 0 || j == m - 1);
    const double slope = edge ? 0.0 : driver_slope(driver, gen.x[j], z[j]);
    const double adv = slope * gen.s[j] / (2.0 * gen.dx);
    put(j, j, gen.di[j] - alpha - inv_dt);
    if (j > 0) put(j, j - 1, gen.lo[j] - adv);
    if (j + 1 < m) put(j, j + 1, gen.up[j] + adv);
    if (ergodic) entries.emplace_back(static_cast<int>(j), static_cast<int>(ref), -1.0);
    rhs[static_cast<Eigen::Index>(j)] = -(fz - slope * z[j]) - inv_dt * v[j];
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw Error("linearized HJB system is singular");
  const Eigen::VectorXd w = lu.solve(rhs);
  v_out.assign(w.data(), w.data() + m);
  if (ergodic) {
    lambda_out = v_out[ref];
    v_out[ref] = 0.0;
  } else {
    lambda_out = 0.0;
  }
}

CoreResult solve_implicit(const Generator& gen, const Grid1D& grid, const DriverSpec& driver,
                          bool ergodic, double alpha, const SolverOptions& options) {
  const std::size_t max_iter = options.max_sweeps ? options.max_sweeps : 200;
  double dt = options.pseudo_dt.value_or(kInfinity);
  if (!(dt > 0.0)) throw InvalidArgument("pseudo time step must be positive");

  CoreResult cur;
  cur.v = options.initial_v.empty() ? std::vector<double>(gen.m, 0.0) : options.initial_v;
  if (cur.v.size() != gen.m) throw GridMismatch("initial v does not match the grid");
  if (ergodic) {
    const double shift = cur.v[grid.ref_index()];
    for (auto& vj : cur.v) vj -= shift;
  }
  std::vector<double> rate;
  evaluate(gen, driver, cur.v, cur.z, rate);
  cur.lambda = ergodic ? rate[grid.ref_index()] : 0.0;
  cur.residual = interior_residual(grid, rate, cur.v, cur.lambda, alpha);

  CoreResult next;
  for (std::size_t it = 1; cur.residual >= options.tol; ++it) {
    if (it > max_iter) throw MaxSweepsExceeded(max_iter, cur.residual, cur.lambda);
    implicit_step(gen, grid, driver, cur.v, cur.z, ergodic, alpha, dt, next.v, next.lambda);
    evaluate(gen, driver, next.v, next.z, rate);
    next.residual = interior_residual(grid, rate, next.v, next.lambda, alpha);
    if (!(next.residual < cur.residual) && next.residual >= options.tol) {
      // No progress: fall back to a finite, shrinking pseudo step.
      dt = std::isinf(dt) ? 1.0 : 0.5 * dt;
      if (dt < 1e-12) throw MaxSweepsExceeded(it, cur.residual, cur.lambda);
      cur.iterations = it;
      continue;
    }
    if (!std::isinf(dt)) {
      dt *= 2.0;
      if (dt > 1e8) dt = kInfinity;
    }
    next.iterations = it;
    std::swap(cur, next);
  }
  return cur;
}

CoreResult solve_explicit(const SdeModel& model, const Generator& gen, const Grid1D& grid,
                          const DriverSpec& driver, bool ergodic, double alpha,
                          const SolverOptions& options) {
  const std::size_t max_sweeps = options.max_sweeps ? options.max_sweeps : 5'000'000;
  const double bound = cfl_bound(model, driver, grid, alpha);
  const double dt = options.pseudo_dt.value_or(0.9 * bound);
  if (!(dt > 0.0)) throw InvalidArgument("pseudo time step must be positive");
  if (dt > bound) throw CflViolation(dt, bound);

  const std::size_t ref = grid.ref_index();
  CoreResult cur;
  cur.v = options.initial_v.empty() ? std::vector<double>(gen.m, 0.0) : options.initial_v;
  if (cur.v.size() != gen.m) throw GridMismatch("initial v does not match the grid");
  if (ergodic) {
    const double shift = cur.v[ref];
    for (auto& vj : cur.v) vj -= shift;
  }
  std::vector<double> rate;
  for (std::size_t sweep = 0;; ++sweep) {
    evaluate(gen, driver, cur.v, cur.z, rate);
    cur.lambda = ergodic ? rate[ref] : 0.0;
    cur.residual = interior_residual(grid, rate, cur.v, cur.lambda, alpha);
    cur.iterations = sweep;
    if (cur.residual < options.tol) break;
    if (sweep >= max_sweeps) throw MaxSweepsExceeded(sweep, cur.residual, cur.lambda);
    for (std::size_t j = 0; j < gen.m; ++j)
      cur.v[j] += dt * (rate[j] - cur.lambda - alpha * cur.v[j]);
  }
  return cur;
}

CoreResult solve_core(const SdeModel& model, const DriverSpec& driver, const Grid1D& grid,
                      bool ergodic, double alpha, const SolverOptions& options) {
  if (!driver.f) throw InvalidArgument("driver f must be set");
  if (!(options.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (options.validate_driver) {
    const DriverCheck check = check_driver(driver, grid);
    if (check.lipschitz_excess > 1e-9 || check.bound_excess > 1e-9)
      throw AssumptionViolation("driver violates its declared Lipschitz constant or bound");
  }
  const Generator gen(model, grid);
  return options.scheme == Scheme::linearized_implicit
             ? solve_implicit(gen, grid, driver, ergodic, alpha, options)
             : solve_explicit(model, gen, grid, driver, ergodic, alpha, options);
}

std::vector<double> times_sigma(const Generator& gen, const std::vector<double>& v) {
  std::vector<double> xi(gen.m);
  for (std::size_t j = 0; j < gen.m; ++j) xi[j] = gen.z(v, j);
  return xi;
}

}  // namespace

DriverCheck check_driver(const DriverSpec& driver, const Grid1D& grid, std::size_t samples,
                         double z_radius, std::uint64_t seed) {
  DriverCheck check;
  check.lipschitz_excess = -kInfinity;
  check.bound_excess = -kInfinity;
  auto rng = keyed_stream(seed, 4);
  std::uniform_real_distribution<double> ux(grid.x_min(), grid.x_max());
  std::uniform_real_distribution<double> uz(-z_radius, z_radius);
  for (std::size_t k = 0; k < samples; ++k) {
    const double x = ux(rng);
    const double z1 = uz(rng);
    const double z2 = uz(rng);
    const double f1 = driver.f(x, z1);
    const double f2 = driver.f(x, z2);
    const double tol = 1e-12 * (1.0 + std::abs(f1) + std::abs(f2));
    check.lipschitz_excess = std::max(
        check.lipschitz_excess, std::abs(f1 - f2) - driver.lipschitz_z * std::abs(z1 - z2) - tol);
    check.bound_excess =
        std::max(check.bound_excess, std::abs(driver.f(x, 0.0)) - driver.bound_at_zero - tol);
  }
  return check;
}

double cfl_bound(const SdeModel& model, const DriverSpec& driver, const Grid1D& grid,
                 double alpha) {
  double sigma_max = 0.0;
  double drift_max = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    sigma_max = std::max(sigma_max, std::abs(model.sigma_1d(grid.x(j))));
    drift_max = std::max(drift_max, std::abs(model.drift_1d(grid.x(j))));
  }
  const double dx = grid.dx();
  const double speed = drift_max + driver.lipschitz_z * sigma_max;
  return dx * dx / (sigma_max * sigma_max + speed * dx + alpha * dx * dx);
}

std::vector<double> gradient_times_sigma(const SdeModel& model, const Grid1D& grid,
                                         const std::vector<double>& v) {
  if (v.size() != grid.size()) throw GridMismatch("values do not match the grid");
  return times_sigma(Generator(model, grid), v);
}

ErgodicSolution solve_ergodic(const SdeModel& model, const DriverSpec& driver,
                              const Grid1D& grid, const SolverOptions& options) {
  CoreResult core = solve_core(model, driver, grid, true, 0.0, options);
  ErgodicSolution sol{grid, std::move(core.v), std::move(core.z), core.lambda, core.residual,
                      core.iterations, 0.0};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double x = grid.x(j);
    sol.growth_constant = std::max(sol.growth_constant, std::abs(sol.v[j]) / (1.0 + x * x));
  }
  return sol;
}

DiscountedSolution solve_discounted(const SdeModel& model, const DriverSpec& driver,
                                    double alpha, const Grid1D& grid,
                                    const SolverOptions& options) {
  if (!(alpha > 0.0)) throw InvalidArgument("discount rate alpha must be positive");
  CoreResult core = solve_core(model, driver, grid, false, alpha, options);
  DiscountedSolution sol{grid, std::move(core.v), std::move(core.z), alpha, core.residual,
                         core.iterations, 0.0};
  for (double vj : sol.v_tilde) sol.bound_constant = std::max(sol.bound_constant, alpha * std::abs(vj));
  return sol;
}

namespace {

double recompute(const SdeModel& model, const Grid1D& grid, const std::vector<double>& v,
                 const std::vector<double>& xi, const DriverSpec& driver, double lambda,
                 double alpha) {
  if (v.size() != grid.size() || xi.size() != grid.size())
    throw GridMismatch("solution arrays do not match the grid");
  const Generator gen(model, grid);
  double res = 0.0;
  for (std::size_t j = grid.interior_begin(); j < grid.interior_end(); ++j) {
    const double r = gen.apply(v, j) + driver.f(gen.x[j], xi[j]) - lambda - alpha * v[j];
    res = std::max(res, std::abs(r));
  }
  return res;
}

}  // namespace

double hjb_residual(const SdeModel& model, const ErgodicSolution& solution,
                    const DriverSpec& driver) {
  return recompute(model, solution.grid, solution.v, solution.xi, driver, solution.lambda, 0.0);
}

double hjb_residual(const SdeModel& model, const DiscountedSolution& solution,
                    const DriverSpec& driver) {
  return recompute(model, solution.grid, solution.v_tilde, solution.xi_tilde, driver, 0.0,
                   solution.alpha);
}

}  // namespace egame
