#include "egame/game.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

namespace egame {

NoPureNash::NoPureNash(std::vector<double> x, std::vector<std::vector<double>> z,
                       std::string where)
    : Error([&] {
        std::ostringstream msg;
        msg << "no pure Nash point of the Hamiltonians";
        if (!where.empty()) msg << " at " << where;
        msg << " (x = [";
        for (std::size_t k = 0; k < x.size(); ++k) msg << (k ? ", " : "") << x[k];
        msg << "], z = [";
        for (std::size_t i = 0; i < z.size(); ++i) {
          msg << (i ? ", " : "") << "[";
          for (std::size_t k = 0; k < z[i].size(); ++k) msg << (k ? ", " : "") << z[i][k];
          msg << "]";
        }
        msg << "])";
        return msg.str();
      }()),
      x_(std::move(x)),
      z_(std::move(z)) {}

ControlGrid ControlGrid::uniform(std::size_t player, double lo, double hi,
                                 std::size_t count) {
  if (count == 0) throw InvalidArgument("control grid needs at least one point");
  ControlGrid g;
  g.player = player;
  g.points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    g.points.push_back(Control::Constant(1, lo + t * (hi - lo)));
  }
  return g;
}

void ControlGrid::validate() const {
  if (points.empty())
    throw InvalidArgument("control grid of player " + std::to_string(player) + " is empty");
  for (std::size_t a = 0; a < points.size(); ++a)
    for (std::size_t b = a + 1; b < points.size(); ++b)
      if (points[a].size() == points[b].size() && points[a] == points[b])
        throw InvalidArgument("control grid of player " + std::to_string(player) +
                              " has duplicate points");
}

GameSpec::GameSpec(Params params) : p_(std::move(params)) {
  const std::size_t n = p_.grids.size();
  if (n < 2) throw InvalidArgument("a game needs at least two players");
  if (p_.costs.size() != n) throw InvalidArgument("need one cost function per player");
  if (!p_.drift) throw InvalidArgument("drift map R must be set");
  if (p_.state_dim == 0) throw InvalidArgument("state dimension must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    p_.grids[i].player = i;
    p_.grids[i].validate();
    if (!p_.costs[i]) throw InvalidArgument("cost of player " + std::to_string(i) + " is unset");
  }
  product_ = 1;
  for (const auto& g : p_.grids) {
    const std::size_t s = g.points.size();
    if (product_ > std::numeric_limits<std::size_t>::max() / s) {
      product_ = std::numeric_limits<std::size_t>::max();
      break;
    }
    product_ *= s;
  }

  const double slack = 1e-12;
  std::vector<Control> values;
  if (product_ <= p_.table_cap) {
    drift_table_.reserve(product_);
    for (std::size_t r = 0; r < product_; ++r) {
      joint_values(unrank(r), values);
      Vector d = p_.drift(values);
      if (static_cast<std::size_t>(d.size()) != p_.state_dim)
        throw InvalidArgument("drift map returns a vector of the wrong dimension");
      if (d.norm() > p_.drift_bound * (1.0 + slack) + slack)
        throw AssumptionViolation("|R(u)| exceeds the declared drift bound");
      drift_table_.push_back(std::move(d));
    }
  }

  auto rng = keyed_stream(p_.check_seed, 2);
  std::uniform_real_distribution<double> box(-p_.check_radius, p_.check_radius);
  Vector x(p_.state_dim), y(p_.state_dim);
  JointControl u;
  u.index.resize(n);
  for (std::size_t k = 0; k < p_.check_samples; ++k) {
    for (std::size_t d = 0; d < p_.state_dim; ++d) {
      x[d] = box(rng);
      y[d] = box(rng);
    }
    for (std::size_t i = 0; i < n; ++i)
      u.index[i] = std::uniform_int_distribution<std::size_t>(0, p_.grids[i].points.size() - 1)(rng);
    joint_values(u, values);
    if (product_ > p_.table_cap && p_.drift(values).norm() > p_.drift_bound * (1.0 + slack) + slack)
      throw AssumptionViolation("|R(u)| exceeds the declared drift bound");
    for (std::size_t i = 0; i < n; ++i) {
      const double lx = p_.costs[i](x, values);
      const double ly = p_.costs[i](y, values);
      if (std::abs(lx) > p_.cost_bound * (1.0 + slack) + slack)
        throw AssumptionViolation("|L_" + std::to_string(i) + "| exceeds the declared cost bound");
      if (std::abs(lx - ly) > p_.cost_lipschitz * (x - y).norm() * (1.0 + slack) + slack)
        throw AssumptionViolation("L_" + std::to_string(i) +
                                  " violates the declared x-Lipschitz constant");
    }
  }
}

std::size_t GameSpec::rank(const JointControl& u) const {
  check_index(u);
  std::size_t r = 0;
  for (std::size_t i = 0; i < n_players(); ++i) r = r * p_.grids[i].points.size() + u.index[i];
  return r;
}

JointControl GameSpec::unrank(std::size_t r) const {
  JointControl u;
  u.index.resize(n_players());
  for (std::size_t i = n_players(); i-- > 0;) {
    const std::size_t s = p_.grids[i].points.size();
    u.index[i] = r % s;
    r /= s;
  }
  return u;
}

void GameSpec::check_index(const JointControl& u) const {
  if (u.index.size() != n_players())
    throw InvalidArgument("joint control has the wrong number of players");
  for (std::size_t i = 0; i < n_players(); ++i)
    if (u.index[i] >= p_.grids[i].points.size())
      throw InvalidArgument("control index out of range for player " + std::to_string(i));
}

void GameSpec::joint_values(const JointControl& u, std::vector<Control>& values) const {
  values.resize(n_players());
  for (std::size_t i = 0; i < n_players(); ++i) values[i] = p_.grids[i].points[u.index[i]];
}

Vector GameSpec::drift(const JointControl& u) const {
  if (!drift_table_.empty()) return drift_table_[rank(u)];
  check_index(u);
  std::vector<Control> values;
  joint_values(u, values);
  return p_.drift(values);
}

double GameSpec::cost(std::size_t i, const Vector& x, const JointControl& u) const {
  check_index(u);
  std::vector<Control> values;
  joint_values(u, values);
  return p_.costs.at(i)(x, values);
}

GameSpec GameSpec::with_cost_offset(std::size_t i, double c) const {
  Params q = p_;
  q.costs.at(i) = [base = p_.costs[i], c](const Vector& x, std::span<const Control> u) {
    return base(x, u) + c;
  };
  q.cost_bound = p_.cost_bound + std::abs(c);
  return GameSpec(std::move(q));
}

double hamiltonian(const GameSpec& spec, std::size_t i, const Vector& x,
                   const Vector& z_i, const JointControl& u) {
  if (i >= spec.n_players()) throw InvalidArgument("player index out of range");
  if (static_cast<std::size_t>(z_i.size()) != spec.state_dim())
    throw InvalidArgument("z has the wrong dimension");
  return z_i.dot(spec.drift(u)) + spec.cost(i, x, u);
}

namespace {

bool within(double value, double minimum, double tol) {
  return value <= minimum + tol * (1.0 + std::abs(minimum));
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

[[noreturn]] void throw_no_nash(const Vector& x, std::span<const Vector> z) {
  std::vector<std::vector<double>> zs;
  for (const auto& zi : z) zs.push_back(to_std(zi));
  throw NoPureNash(to_std(x), std::move(zs));
}

JointControl enumerate_nash(const GameSpec& spec, const Vector& x,
                            std::span<const Vector> z, double tol) {
  const std::size_t n = spec.n_players();
  const std::size_t total = spec.product_size();
  std::vector<std::size_t> sizes(n), strides(n);
  for (std::size_t i = 0; i < n; ++i) sizes[i] = spec.grid(i).points.size();
  strides[n - 1] = 1;
  for (std::size_t i = n - 1; i-- > 0;) strides[i] = strides[i + 1] * sizes[i + 1];

  std::vector<double> h(n * total);
  std::vector<Control> values;
  JointControl u;
  u.index.assign(n, 0);
  spec.joint_values(u, values);
  for (std::size_t r = 0; r < total; ++r) {
    if (r > 0) {
      // Odometer increment, updating only the changed control values.
      for (std::size_t i = n; i-- > 0;) {
        if (++u.index[i] < sizes[i]) {
          values[i] = spec.grid(i).points[u.index[i]];
          break;
        }
        u.index[i] = 0;
        values[i] = spec.grid(i).points[0];
      }
    }
    if (spec.has_drift_table()) {
      const Vector& drift = spec.tabulated_drift(r);
      for (std::size_t i = 0; i < n; ++i)
        h[i * total + r] = z[i].dot(drift) + spec.cost(i, x, values);
    } else {
      const Vector drift = spec.drift(values);
      for (std::size_t i = 0; i < n; ++i)
        h[i * total + r] = z[i].dot(drift) + spec.cost(i, x, values);
    }
  }

  // best[i][r with digit i zeroed] = min over player i's own control.
  std::vector<std::vector<double>> best(n, std::vector<double>(total, std::numeric_limits<double>::infinity()));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < total; ++r) {
      const std::size_t key = r - ((r / strides[i]) % sizes[i]) * strides[i];
      best[i][key] = std::min(best[i][key], h[i * total + r]);
    }
  }
  for (std::size_t r = 0; r < total; ++r) {
    bool nash = true;
    for (std::size_t i = 0; i < n && nash; ++i) {
      const std::size_t key = r - ((r / strides[i]) % sizes[i]) * strides[i];
      nash = within(h[i * total + r], best[i][key], tol);
    }
    if (nash) return spec.unrank(r);
  }
  throw_no_nash(x, z);
}

JointControl best_response_iteration(const GameSpec& spec, const Vector& x,
                                     std::span<const Vector> z, const IsaacOptions& options) {
  const std::size_t n = spec.n_players();
  JointControl u;
  u.index.assign(n, 0);
  std::set<JointControl> visited;
  std::vector<Control> values;
  std::vector<double> row;
  for (std::size_t round = 0; round < options.max_best_response_rounds; ++round) {
    if (!visited.insert(u).second)
      throw BestResponseCycle("cyclic best response revisited a joint control");
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& pts = spec.grid(i).points;
      row.resize(pts.size());
      JointControl trial = u;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        trial.index[i] = k;
        spec.joint_values(trial, values);
        row[k] = z[i].dot(spec.drift(values)) + spec.cost(i, x, values);
      }
      const double m = *std::min_element(row.begin(), row.end());
      std::size_t choice = 0;
      while (!within(row[choice], m, options.tie_tolerance)) ++choice;
      if (choice != u.index[i]) {
        u.index[i] = choice;
        changed = true;
      }
    }
    if (!changed) return u;
  }
  throw BestResponseCycle("best response iteration did not settle");
}

}  // namespace

JointControl isaac_fixed_point(const GameSpec& spec, const Vector& x,
                               std::span<const Vector> z, const IsaacOptions& options) {
  if (z.size() != spec.n_players()) throw InvalidArgument("need one z vector per player");
  for (const auto& zi : z)
    if (static_cast<std::size_t>(zi.size()) != spec.state_dim())
      throw InvalidArgument("z has the wrong dimension");
  if (spec.product_size() <= options.enumeration_cap)
    return enumerate_nash(spec, x, z, options.tie_tolerance);
  return best_response_iteration(spec, x, z, options);
}

IsaacSampler uniform_isaac_sampler(std::size_t state_dim, std::size_t n_players,
                                   double x_radius, double z_radius) {
  return [=](std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(-x_radius, x_radius);
    std::uniform_real_distribution<double> uz(-z_radius, z_radius);
    IsaacSample s;
    s.x.resize(static_cast<Eigen::Index>(state_dim));
    for (auto& v : s.x) v = ux(rng);
    s.z.assign(n_players, Vector(static_cast<Eigen::Index>(state_dim)));
    for (auto& zi : s.z)
      for (auto& v : zi) v = uz(rng);
    return s;
  };
}

IsaacReport verify_isaacs(const GameSpec& spec, const IsaacSampler& sampler,
                          std::size_t n_samples, double delta, std::uint64_t seed,
                          const IsaacOptions& options) {
  if (n_samples == 0) throw InvalidArgument("need at least one sample");
  auto rng = keyed_stream(seed, 3);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t n = spec.n_players();
  IsaacReport report;
  report.n_samples = n_samples;

  auto optimal_values = [&](const Vector& x, const std::vector<Vector>& z,
                            std::vector<double>& out) {
    const JointControl u = isaac_fixed_point(spec, x, z, options);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = hamiltonian(spec, i, x, z[i], u);
  };

  std::vector<double> base, moved;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const IsaacSample s = sampler(rng);
    // Random direction in the stacked z-space, scaled to length delta.
    std::vector<Vector> dir(n);
    double norm_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dir[i].resize(s.z[i].size());
      for (auto& v : dir[i]) v = normal(rng);
      norm_sq += dir[i].squaredNorm();
    }
    const double scale = norm_sq > 0.0 ? delta / std::sqrt(norm_sq) : 0.0;
    std::vector<Vector> z2 = s.z;
    for (std::size_t i = 0; i < n; ++i) z2[i] += scale * dir[i];
    try {
      optimal_values(s.x, s.z, base);
    } catch (const NoPureNash&) {
      continue;
    } catch (const BestResponseCycle&) {
      continue;
    }
    ++report.n_pure_nash;
    try {
      optimal_values(s.x, z2, moved);
    } catch (const Error&) {
      continue;
    }
    for (std::size_t i = 0; i < n; ++i)
      report.max_continuity_jump = std::max(report.max_continuity_jump, std::abs(moved[i] - base[i]));
  }
  report.fraction_with_pure_nash =
      static_cast<double>(report.n_pure_nash) / static_cast<double>(n_samples);
  return report;
}

FeedbackPolicy feedback_policy(const GameSpec& spec, const Grid1D& grid,
                               const std::vector<std::vector<double>>& xi,
                               const IsaacOptions& options) {
  if (spec.state_dim() != 1) throw InvalidArgument("grid policies need a one-dimensional state");
  const std::size_t n = spec.n_players();
  if (xi.size() != n) throw InvalidArgument("need one z field per player");
  for (const auto& f : xi)
    if (f.size() != grid.size()) throw GridMismatch("z field does not match the grid");
  FeedbackPolicy policy{grid, std::vector<JointControl>(grid.size()),
                        std::vector<std::vector<double>>(grid.size(), std::vector<double>(n))};
  std::vector<Vector> z(n, Vector(1));
  Vector x(1);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    x[0] = grid.x(j);
    for (std::size_t i = 0; i < n; ++i) {
      z[i][0] = xi[i][j];
      policy.z[j][i] = xi[i][j];
    }
    try {
      policy.controls[j] = isaac_fixed_point(spec, x, z, options);
    } catch (const NoPureNash& e) {
      throw NoPureNash(e.x(), e.z(), "grid node " + std::to_string(j));
    }
  }
  return policy;
}

}  // namespace egame
