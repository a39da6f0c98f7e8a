#include "egame/montecarlo.hpp"

#include <cmath>
#include <sstream>

#include "egame/errors.hpp"
#include "egame/parallel.hpp"

namespace egame {

namespace {

/// Per-node view of a joint feedback policy: the drift shift R(u(x_j)) and
/// the joint control values used to evaluate costs.
struct NodeTable {
  Grid1D grid;
  std::vector<double> shift;
  std::vector<std::vector<Control>> values;
};

NodeTable build_table(const GameSpec& spec, const FeedbackPolicy& policy,
                      const PolicyOverride* deviation) {
  const Grid1D& grid = policy.grid;
  if (policy.controls.size() != grid.size())
    throw GridMismatch("policy does not cover every grid node");
  if (deviation != nullptr) {
    if (deviation->player >= spec.n_players())
      throw InvalidArgument("deviating player index out of range");
    if (deviation->indices.size() != grid.size())
      throw GridMismatch("deviation does not cover every grid node");
  }
  NodeTable table{grid, std::vector<double>(grid.size()), std::vector<std::vector<Control>>(grid.size())};
  for (std::size_t j = 0; j < grid.size(); ++j) {
    JointControl u = policy.controls[j];
    if (deviation != nullptr) u.index[deviation->player] = deviation->indices[j];
    spec.check_index(u);
    table.shift[j] = spec.drift(u)[0];
    spec.joint_values(u, table.values[j]);
  }
  return table;
}

void check_mc(const SdeModel& model, const GameSpec& spec, const McParams& mc) {
  if (model.dim() != 1 || spec.state_dim() != 1)
    throw InvalidArgument("Monte Carlo verification needs a one-dimensional model");
  if (mc.n_paths == 0) throw InvalidArgument("need at least one path");
  if (!(mc.T > 0.0)) throw InvalidArgument("horizon T must be positive");
  if (!(mc.burn_in >= 0.0)) throw InvalidArgument("burn-in must be non-negative");
  check_step_size(model, mc.T, mc.h);
}

DriftShift table_shift(const NodeTable& table, double bound) {
  return DriftShift(
      [&table](const Vector& x, Vector& out) {
        out.resize(1);
        out[0] = table.shift[table.grid.nearest(x[0])];
      },
      bound);
}

/// First step index k with k h >= burn_in.
std::size_t burn_in_steps(double burn_in, double h) {
  return burn_in > 0.0 ? step_count(burn_in, h) : 0;
}

PayoffEstimate summarize(const std::vector<double>& per_path, const McParams& mc) {
  RunningMoments across;
  for (double a : per_path) across.add(a);
  PayoffEstimate est;
  est.value = across.mean();
  est.std_error = std::sqrt(across.sample_variance() / static_cast<double>(per_path.size()));
  est.horizon = mc.T;
  est.burn_in = mc.burn_in;
  est.n_paths = per_path.size();
  return est;
}

std::string format_control(const Control& c) {
  std::ostringstream os;
  os.precision(6);
  for (Eigen::Index d = 0; d < c.size(); ++d) os << (d ? "," : "") << c[d];
  return os.str();
}

}  // namespace

double effective_horizon(double alpha, double cost_bound, double epsilon) {
  if (!(alpha > 0.0)) throw InvalidArgument("discount rate alpha must be positive");
  if (!(epsilon > 0.0)) throw InvalidArgument("tail epsilon must be positive");
  if (cost_bound <= 0.0) return 0.0;
  return std::max(0.0, std::log(epsilon * alpha / cost_bound) / -alpha);
}

PayoffEstimate estimate_payoff(const SdeModel& model, const GameSpec& spec,
                               const FeedbackPolicy& policy, std::size_t player,
                               PayoffKind kind, const McParams& mc,
                               const PolicyOverride* deviation) {
  check_mc(model, spec, mc);
  if (player >= spec.n_players()) throw InvalidArgument("player index out of range");
  if (kind.discounted) {
    const double needed = effective_horizon(kind.alpha, spec.cost_bound(), mc.tail_epsilon);
    if (mc.T < needed)
      throw InsufficientHorizon("discounted horizon T = " + std::to_string(mc.T) +
                                " is below the effective horizon " + std::to_string(needed));
  } else if (!(mc.burn_in < mc.T)) {
    throw InvalidArgument("burn-in must be shorter than the horizon");
  }

  const NodeTable table = build_table(spec, policy, deviation);
  const DriftShift shift = table_shift(table, spec.drift_bound());
  const std::size_t n = step_count(mc.T, mc.h);
  const std::size_t k_burn = kind.discounted ? 0 : burn_in_steps(mc.burn_in, mc.h);
  const double decay = kind.discounted ? std::exp(-kind.alpha * mc.h) : 1.0;

  std::vector<double> per_path(mc.n_paths, 0.0);
  parallel_for(
      mc.n_paths,
      [&](std::size_t p) {
        RunningMoments average;
        double discounted_sum = 0.0;
        double weight = mc.h;
        integrate_path(model, &shift, mc.T, mc.h, mc.seed, p,
                       [&](std::size_t k, double, const Vector& x, const Vector&) {
                         if (k == n) return;
                         const auto& u = table.values[table.grid.nearest(x[0])];
                         if (kind.discounted) {
                           discounted_sum += weight * spec.cost(player, x, u);
                           weight *= decay;
                         } else if (k >= k_burn) {
                           average.add(spec.cost(player, x, u));
                         }
                       });
        per_path[p] = kind.discounted ? discounted_sum : average.mean();
      },
      mc.threads);

  PayoffEstimate est = summarize(per_path, mc);
  if (kind.discounted) est.burn_in = 0.0;
  est.player = player;
  est.kind = kind;
  return est;
}

std::string to_string(DeviationKind kind) {
  switch (kind) {
    case DeviationKind::equilibrium: return "equilibrium";
    case DeviationKind::constant: return "constant";
    case DeviationKind::node_perturbation: return "node_perturbation";
    case DeviationKind::random_feedback: return "random_feedback";
  }
  return "unknown";
}

DeviationReport nash_deviation_test(const SdeModel& model, const GameSpec& spec,
                                    const NashSolution& nash, const DeviationOptions& options,
                                    const McParams& mc) {
  check_mc(model, spec, mc);
  if (!(options.grid_error_budget >= 0.0))
    throw InvalidArgument("grid error budget must be non-negative");
  const Grid1D& grid = nash.grid;
  const std::size_t m = grid.size();

  std::vector<std::size_t> local_nodes;
  for (std::size_t j = 0; j < m; ++j)
    if (std::abs(grid.x(j)) <= options.perturbation_radius) local_nodes.push_back(j);
  if (local_nodes.empty())
    for (std::size_t j = 0; j < m; ++j) local_nodes.push_back(j);

  DeviationReport report;
  report.scope =
      "unilateral Markov feedback deviations on the state grid: constant controls, "
      "single-node perturbations and uniformly random feedback fields; this samples "
      "but does not certify the inequalities over all predictable controls";

  for (std::size_t i = 0; i < spec.n_players(); ++i) {
    const std::size_t n_points = spec.grid(i).points.size();
    PayoffKind kind = PayoffKind::ergodic();
    double reference = 0.0;
    McParams player_mc = mc;
    if (nash.is_discounted(i)) {
      const auto& d = nash.discounted(i);
      kind = PayoffKind::discount(d.alpha);
      reference = grid.interpolate(d.v_tilde, model.x0()[0]);
      player_mc.T = std::max(mc.T, effective_horizon(d.alpha, spec.cost_bound(), mc.tail_epsilon));
    } else {
      reference = nash.lambda(i);
    }

    std::vector<std::size_t> equilibrium(m);
    for (std::size_t j = 0; j < m; ++j) equilibrium[j] = nash.policy.controls[j].index[i];

    auto rng = keyed_stream(options.seed, i);
    const std::size_t n_dev = options.n_deviations;
    const std::size_t n_constant = (n_dev + 2) / 3;

    for (std::size_t d = 0; d <= n_dev; ++d) {
      DeviationOutcome row;
      row.player = i;
      row.reference = reference;
      PolicyOverride dev{i, equilibrium, {}};
      if (d == 0) {
        row.kind = DeviationKind::equilibrium;
        dev.description = "equilibrium policy";
      } else {
        const std::size_t slot = d - 1;
        row.kind = static_cast<DeviationKind>(1 + slot % 3);
        if (row.kind == DeviationKind::constant) {
          const std::size_t c = slot / 3;
          const std::size_t idx =
              n_constant <= 1 || n_constant > n_points
                  ? c % n_points
                  : static_cast<std::size_t>(std::llround(static_cast<double>(c) *
                                                          static_cast<double>(n_points - 1) /
                                                          static_cast<double>(n_constant - 1)));
          std::fill(dev.indices.begin(), dev.indices.end(), idx);
          dev.description = "constant u = " + format_control(spec.grid(i).points[idx]);
        } else if (row.kind == DeviationKind::node_perturbation) {
          std::uniform_int_distribution<std::size_t> pick_node(0, local_nodes.size() - 1);
          const std::size_t j = local_nodes[pick_node(rng)];
          std::size_t idx = equilibrium[j];
          if (n_points > 1) {
            std::uniform_int_distribution<std::size_t> pick(0, n_points - 2);
            idx = pick(rng);
            if (idx >= equilibrium[j]) ++idx;
          }
          dev.indices[j] = idx;
          std::ostringstream os;
          os.precision(6);
          os << "node " << j << " (x = " << grid.x(j)
             << ") set to u = " << format_control(spec.grid(i).points[idx]);
          dev.description = os.str();
        } else {
          std::uniform_int_distribution<std::size_t> pick(0, n_points - 1);
          for (auto& idx : dev.indices) idx = pick(rng);
          dev.description = "random feedback field #" + std::to_string(slot / 3);
        }
      }
      row.description = dev.description;

      McParams run = player_mc;
      run.seed = mix64(mc.seed ^ mix64((static_cast<std::uint64_t>(i) << 32) | d));
      try {
        row.estimate = estimate_payoff(model, spec, nash.policy, i, kind, run,
                                       d == 0 ? nullptr : &dev);
        row.margin = row.estimate.value - reference;
        row.threshold = 3.0 * row.estimate.std_error + options.grid_error_budget;
        row.pass = d == 0 ? std::abs(row.margin) <= row.threshold : row.margin >= -row.threshold;
      } catch (const Error& e) {
        row.description += " [error: " + std::string(e.what()) + "]";
        row.margin = std::numeric_limits<double>::quiet_NaN();
        row.pass = false;
      }
      if (!row.pass) ++report.n_failed;
      report.outcomes.push_back(std::move(row));
    }
  }
  return report;
}

PathResidual bsde_path_residual(const SdeModel& model, const GameSpec& spec,
                                const NashSolution& nash, std::size_t player,
                                const McParams& mc, double lambda_offset) {
  check_mc(model, spec, mc);
  if (player >= nash.n_players()) throw InvalidArgument("player index out of range");
  if (nash.is_discounted(player))
    throw InvalidArgument("path residual is defined for ergodic players only");
  if (!(mc.burn_in < mc.T)) throw InvalidArgument("burn-in must be shorter than the horizon");

  const NodeTable table = build_table(spec, nash.policy, nullptr);
  const DriftShift shift = table_shift(table, spec.drift_bound());
  const std::vector<double>& v = nash.values(player);
  const std::vector<double>& xi = nash.xi(player);
  const double lambda = nash.lambda(player) + lambda_offset;
  const std::size_t k_burn = burn_in_steps(mc.burn_in, mc.h);
  const Grid1D& grid = nash.grid;
  const std::size_t n = step_count(mc.T, mc.h);

  struct Sums {
    double square = 0.0;
    double total = 0.0;
    std::size_t count = 0;
  };
  std::vector<Sums> per_path(mc.n_paths);
  parallel_for(
      mc.n_paths,
      [&](std::size_t p) {
        Sums s;
        double v_prev = 0.0, drift_part = 0.0, noise_part = 0.0;
        bool have_prev = false;
        integrate_path(model, &shift, mc.T, mc.h, mc.seed, p,
                       [&](std::size_t k, double, const Vector& x, const Vector& dw) {
                         const double vx = grid.interpolate(v, x[0]);
                         if (have_prev) {
                           const double r = vx - v_prev + drift_part - noise_part;
                           s.square += r * r;
                           s.total += r;
                           ++s.count;
                         }
                         have_prev = false;
                         if (k < k_burn || k == n) return;
                         const std::size_t j = grid.nearest(x[0]);
                         const double z = grid.interpolate(xi, x[0]);
                         const double R = table.shift[j];
                         const double H = z * R + spec.cost(player, x, table.values[j]);
                         v_prev = vx;
                         drift_part = (H - lambda) * mc.h;
                         // Increment of the unshifted Brownian motion.
                         noise_part = z * (dw[0] + R * mc.h);
                         have_prev = true;
                       });
        per_path[p] = s;
      },
      mc.threads);

  Sums all;
  for (const Sums& s : per_path) {
    all.square += s.square;
    all.total += s.total;
    all.count += s.count;
  }
  if (all.count == 0) throw InvalidArgument("no steps after burn-in");
  PathResidual out;
  out.n_steps = all.count;
  out.rms = std::sqrt(all.square / static_cast<double>(all.count));
  out.normalized = out.rms / std::sqrt(mc.h);
  out.mean = all.total / static_cast<double>(all.count);
  return out;
}

}  // namespace egame
