#include "egame/nash.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace egame {

const std::vector<double>& NashSolution::values(std::size_t i) const {
  return is_discounted(i) ? discounted(i).v_tilde : ergodic(i).v;
}

const std::vector<double>& NashSolution::xi(std::size_t i) const {
  return is_discounted(i) ? discounted(i).xi_tilde : ergodic(i).xi;
}

DriverSpec frozen_driver(const GameSpec& spec, const FeedbackPolicy& policy, std::size_t i) {
  if (spec.state_dim() != 1) throw InvalidArgument("frozen drivers need a one-dimensional state");
  const Grid1D& grid = policy.grid;
  std::vector<double> slope(grid.size()), offset(grid.size());
  std::vector<Control> values;
  Vector x(1);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    x[0] = grid.x(j);
    spec.joint_values(policy.controls[j], values);
    slope[j] = spec.drift(policy.controls[j])[0];
    offset[j] = spec.cost(i, x, values);
  }
  DriverSpec d;
  d.f = [grid, slope, offset](double xv, double z) {
    const std::size_t j = grid.nearest(xv);
    return slope[j] * z + offset[j];
  };
  d.slope = [grid, slope](double xv, double) { return slope[grid.nearest(xv)]; };
  d.lipschitz_z = spec.drift_bound();
  d.bound_at_zero = spec.cost_bound();
  return d;
}

namespace {

struct PicardState {
  std::vector<std::vector<double>> xi;  // xi[player][node]
  std::vector<std::vector<double>> warm;
  std::vector<double> value;            // lambda, or alpha * v(x_ref) when discounted
  bool has_value = false;
};

double interior_sup_diff(const Grid1D& grid, const std::vector<double>& a,
                         const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t j = grid.interior_begin(); j < grid.interior_end(); ++j)
    d = std::max(d, std::abs(a[j] - b[j]));
  return d;
}

/// Runs up to `sweeps` Picard sweeps. discount[i] > 0 marks a discounting player.
NashSolution picard_loop(const GameSpec& spec, const SdeModel& model, const Grid1D& grid,
                         const std::vector<double>& discount, PicardState state,
                         std::size_t sweeps, const PicardOptions& options) {
  if (model.dim() != 1 || spec.state_dim() != 1)
    throw InvalidArgument("Picard iteration on a grid needs a one-dimensional model");
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw InvalidArgument("damping must lie in (0, 1]");
  if (!(options.tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  const std::size_t n = spec.n_players();
  const std::size_t ref = grid.ref_index();

  if (sweeps == 0) throw InvalidArgument("need at least one Picard sweep");
  std::vector<PlayerSolution> solved(n, ErgodicSolution{grid, {}, {}, 0.0, 0.0, 0, 0.0});
  FeedbackPolicy used = feedback_policy(spec, grid, state.xi, options.isaac);
  NashSolution out{grid, {}, used, {}, 0.0, std::nullopt};

  for (std::size_t sweep = 1; sweep <= sweeps; ++sweep) {
    if (sweep > 1) used = feedback_policy(spec, grid, state.xi, options.isaac);
    std::vector<double> value_delta(n), xi_delta(n), value(n);
    for (std::size_t i = 0; i < n; ++i) {
      const DriverSpec driver = frozen_driver(spec, used, i);
      SolverOptions inner = options.inner;
      inner.initial_v = state.warm[i];
      const std::vector<double>* new_xi;
      if (discount[i] > 0.0) {
        solved[i] = solve_discounted(model, driver, discount[i], grid, inner);
        const auto& s = std::get<DiscountedSolution>(solved[i]);
        value[i] = discount[i] * s.v_tilde[ref];
        state.warm[i] = s.v_tilde;
        new_xi = &s.xi_tilde;
      } else {
        solved[i] = solve_ergodic(model, driver, grid, inner);
        const auto& s = std::get<ErgodicSolution>(solved[i]);
        value[i] = s.lambda;
        state.warm[i] = s.v;
        new_xi = &s.xi;
      }
      std::vector<double> damped(grid.size());
      for (std::size_t j = 0; j < grid.size(); ++j)
        damped[j] = (1.0 - options.damping) * state.xi[i][j] + options.damping * (*new_xi)[j];
      xi_delta[i] = interior_sup_diff(grid, damped, state.xi[i]);
      value_delta[i] = state.has_value ? std::abs(value[i] - state.value[i])
                                       : std::numeric_limits<double>::infinity();
      state.xi[i] = std::move(damped);
    }
    state.value = value;
    state.has_value = true;
    out.convergence.iterations = sweep;
    out.convergence.value_deltas.push_back(value_delta);
    out.convergence.xi_deltas.push_back(xi_delta);
    const bool done = std::all_of(value_delta.begin(), value_delta.end(),
                                  [&](double d) { return d < options.tol; }) &&
                      std::all_of(xi_delta.begin(), xi_delta.end(),
                                  [&](double d) { return d < options.tol; });
    if (done) {
      out.convergence.converged = true;
      break;
    }
  }

  out.players = std::move(solved);
  out.policy = feedback_policy(spec, grid, state.xi, options.isaac);
  out.convergence.policy_stable = (out.policy.controls == used.controls);
  out.comparison_bound = comparison_bound(spec, model, grid, options.inner);
  return out;
}

PicardState fresh_state(std::size_t n, const Grid1D& grid) {
  PicardState s;
  s.xi.assign(n, std::vector<double>(grid.size(), 0.0));
  s.warm.assign(n, {});
  return s;
}

}  // namespace

NashSolution picard_solve(const GameSpec& spec, const SdeModel& model, const Grid1D& grid,
                          const PicardOptions& options) {
  const std::vector<double> discount(spec.n_players(), 0.0);
  return picard_loop(spec, model, grid, discount, fresh_state(spec.n_players(), grid),
                     options.max_iter, options);
}

NashSolution picard_continue(const GameSpec& spec, const SdeModel& model,
                             const NashSolution& from, std::size_t sweeps,
                             const PicardOptions& options) {
  const std::size_t n = from.n_players();
  if (n != spec.n_players()) throw InvalidArgument("solution and game disagree on players");
  PicardState state;
  std::vector<double> discount(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    state.xi.push_back(from.xi(i));
    state.warm.push_back(from.values(i));
    if (from.is_discounted(i)) {
      discount[i] = from.discounted(i).alpha;
      state.value.push_back(discount[i] * from.discounted(i).v_tilde[from.grid.ref_index()]);
    } else {
      state.value.push_back(from.lambda(i));
    }
  }
  state.has_value = true;
  NashSolution next = picard_loop(spec, model, from.grid, discount, std::move(state), sweeps, options);
  next.alpha = from.alpha;
  return next;
}

double comparison_bound(const GameSpec& spec, const SdeModel& model, const Grid1D& grid,
                        const SolverOptions& options) {
  const double c = spec.drift_bound();
  const double c_bar = spec.cost_bound();
  DriverSpec d;
  d.f = [c, c_bar](double, double z) { return c * std::abs(z) + c_bar; };
  d.slope = [c](double, double z) { return z > 0.0 ? c : (z < 0.0 ? -c : 0.0); };
  d.lipschitz_z = c;
  d.bound_at_zero = c_bar;
  SolverOptions o = options;
  o.initial_v.clear();
  return solve_ergodic(model, d, grid, o).lambda;
}

NashSolution asymmetric_solve(const GameSpec& spec, const SdeModel& model, double alpha,
                              const Grid1D& grid, const PicardOptions& options) {
  if (spec.n_players() != 2) throw InvalidArgument("asymmetric games have exactly two players");
  if (!(alpha > 0.0)) throw InvalidArgument("discount rate alpha must be positive");
  const std::vector<double> discount{0.0, alpha};
  NashSolution sol =
      picard_loop(spec, model, grid, discount, fresh_state(2, grid), options.max_iter, options);
  sol.alpha = alpha;
  return sol;
}

std::vector<SweepRow> vanishing_discount_sweep(const GameSpec& spec, const SdeModel& model,
                                               const Grid1D& grid,
                                               const std::vector<double>& alphas,
                                               const PicardOptions& options) {
  if (alphas.empty()) throw InvalidArgument("need at least one discount rate");
  for (std::size_t k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] > 0.0)) throw InvalidArgument("discount rates must be positive");
    if (k > 0 && !(alphas[k] < alphas[k - 1]))
      throw InvalidArgument("discount rates must be strictly decreasing");
  }
  const std::size_t ref = grid.ref_index();
  std::vector<SweepRow> rows;
  std::optional<std::vector<double>> previous_profile;
  for (double alpha : alphas) {
    SweepRow row;
    row.alpha = alpha;
    try {
      const NashSolution sol = asymmetric_solve(spec, model, alpha, grid, options);
      const auto& v2 = sol.discounted(1).v_tilde;
      row.lambda1 = sol.lambda(0);
      row.alpha_times_v2_at_0 = alpha * v2[ref];
      row.converged = sol.convergence.converged;
      if (!row.converged) row.status = "not converged";
      std::vector<double> profile(v2.size());
      for (std::size_t j = 0; j < v2.size(); ++j) profile[j] = v2[j] - v2[ref];
      if (previous_profile) row.centered_v2_profile_distance = interior_sup_diff(grid, profile, *previous_profile);
      previous_profile = std::move(profile);
    } catch (const Error& e) {
      row.status = std::string("error: ") + e.what();
      row.lambda1 = std::numeric_limits<double>::quiet_NaN();
      row.alpha_times_v2_at_0 = std::numeric_limits<double>::quiet_NaN();
      previous_profile.reset();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

SweepAssessment assess_sweep(const std::vector<SweepRow>& rows, double ergodic_lambda,
                             double slack, std::size_t allowed_inversions) {
  SweepAssessment a;
  bool within_slack = true;
  for (const SweepRow& r : rows) a.gaps.push_back(std::abs(r.alpha_times_v2_at_0 - ergodic_lambda));
  for (std::size_t k = 0; k < a.gaps.size(); ++k) {
    if (!std::isfinite(a.gaps[k])) {
      ++a.inversions;
      within_slack = false;
      continue;
    }
    if (k > 0 && a.gaps[k] > a.gaps[k - 1]) {
      ++a.inversions;
      if (!(a.gaps[k] - a.gaps[k - 1] <= slack)) within_slack = false;
    }
  }
  a.monotone = !a.gaps.empty() && within_slack && a.inversions <= allowed_inversions;
  a.final_gap = a.gaps.empty() ? std::numeric_limits<double>::quiet_NaN() : a.gaps.back();
  return a;
}

}  // namespace egame
