#include "egame/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "egame/errors.hpp"

namespace egame::io {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::string dump(const json& document) { return document.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("failed writing '" + path + "'");
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error("invalid JSON in '" + path + "': " + e.what());
  }
}

namespace {

/// JSON has no NaN or infinity; they become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json a = json::array();
  for (double d : v) a.push_back(number(d));
  return a;
}

double get_number(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(std::string("solution file: missing field '") + key + "'");
  const json& v = j.at(key);
  if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!v.is_number()) throw Error(std::string("solution file: field '") + key + "' is not a number");
  return v.get<double>();
}

std::vector<double> get_numbers(const json& j, const char* key, std::size_t expected) {
  if (!j.contains(key) || !j.at(key).is_array())
    throw Error(std::string("solution file: missing array '") + key + "'");
  std::vector<double> out;
  for (const json& v : j.at(key))
    out.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
  if (out.size() != expected)
    throw GridMismatch(std::string("solution file: array '") + key + "' does not match the grid");
  return out;
}

}  // namespace

json to_json(const Grid1D& g) {
  return {{"x_min", g.x_min()}, {"x_max", g.x_max()}, {"m", g.size()},
          {"interior_margin", g.interior_margin()}};
}

Grid1D grid_from_json(const json& j) {
  if (!j.is_object()) throw Error("solution file: grid must be an object");
  return Grid1D(get_number(j, "x_min"), get_number(j, "x_max"), j.at("m").get<std::size_t>(),
                j.at("interior_margin").get<std::size_t>());
}

json to_json(const ErgodicSolution& s) {
  return {{"kind", "ergodic"},
          {"lambda", number(s.lambda)},
          {"residual_sup", number(s.residual_sup)},
          {"iterations", s.iterations},
          {"growth_constant", number(s.growth_constant)},
          {"v", numbers(s.v)},
          {"xi", numbers(s.xi)}};
}

json to_json(const DiscountedSolution& s) {
  return {{"kind", "discounted"},
          {"alpha", s.alpha},
          {"residual_sup", number(s.residual_sup)},
          {"iterations", s.iterations},
          {"bound_constant", number(s.bound_constant)},
          {"v_tilde", numbers(s.v_tilde)},
          {"xi_tilde", numbers(s.xi_tilde)}};
}

json to_json(const ConvergenceReport& r) {
  json vd = json::array(), xd = json::array();
  for (const auto& row : r.value_deltas) vd.push_back(numbers(row));
  for (const auto& row : r.xi_deltas) xd.push_back(numbers(row));
  return {{"iterations", r.iterations},
          {"converged", r.converged},
          {"policy_stable", r.policy_stable},
          {"value_deltas", vd},
          {"xi_deltas", xd}};
}

json to_json(const PayoffEstimate& e) {
  json j{{"value", number(e.value)},
         {"stderr", number(e.std_error)},
         {"horizon", e.horizon},
         {"burn_in", e.burn_in},
         {"n_paths", e.n_paths},
         {"kind", e.kind.name()}};
  if (e.kind.discounted) j["alpha"] = e.kind.alpha;
  if (e.player) j["player"] = *e.player;
  return j;
}

json to_json(const DeviationReport& r) {
  json rows = json::array();
  for (const DeviationOutcome& o : r.outcomes)
    rows.push_back({{"player", o.player},
                    {"kind", to_string(o.kind)},
                    {"description", o.description},
                    {"estimate", to_json(o.estimate)},
                    {"reference", number(o.reference)},
                    {"margin", number(o.margin)},
                    {"threshold", number(o.threshold)},
                    {"pass", o.pass}});
  return {{"scope", r.scope},
          {"n_outcomes", r.outcomes.size()},
          {"n_failed", r.n_failed},
          {"all_passed", r.all_passed()},
          {"outcomes", rows}};
}

json to_json(const std::vector<SweepRow>& rows) {
  json a = json::array();
  for (const SweepRow& r : rows) {
    json j{{"alpha", r.alpha},
           {"status", r.status},
           {"converged", r.converged},
           {"lambda1", number(r.lambda1)},
           {"alpha_times_v2_at_0", number(r.alpha_times_v2_at_0)}};
    j["centered_v2_profile_distance"] =
        r.centered_v2_profile_distance ? number(*r.centered_v2_profile_distance) : json(nullptr);
    a.push_back(j);
  }
  return a;
}

json to_json(const ContinuousResult& r) {
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"lambda", number(r.solution.lambda)},
          {"original_residual", number(r.original_residual)},
          {"lambda_deltas", numbers(r.lambda_deltas)},
          {"xi_deltas", numbers(r.xi_deltas)},
          {"solution", to_json(r.solution)}};
}

json to_json(const AssumptionReport& r) {
  return {{"samples", r.samples},
          {"ok", r.ok()},
          {"dissipativity_excess", number(r.dissipativity_excess)},
          {"f_bound_excess", number(r.f_bound_excess)},
          {"f_lipschitz_excess", number(r.f_lipschitz_excess)},
          {"sigma_low_excess", number(r.sigma_low_excess)},
          {"sigma_high_excess", number(r.sigma_high_excess)}};
}

json to_json(const MomentReport& r) {
  return {{"sup_second_moment", number(r.sup_second_moment)},
          {"bound_constant", number(r.bound_constant)},
          {"doubled_horizon_moment", number(r.doubled_horizon_moment)},
          {"expected_path_sup", number(r.expected_path_sup)},
          {"horizon_stable", r.horizon_stable}};
}

json to_json(const IsaacReport& r) {
  return {{"n_samples", r.n_samples},
          {"n_pure_nash", r.n_pure_nash},
          {"fraction_with_pure_nash", number(r.fraction_with_pure_nash)},
          {"max_continuity_jump", number(r.max_continuity_jump)}};
}

json to_json(const PathResidual& r) {
  return {{"rms", number(r.rms)},
          {"normalized", number(r.normalized)},
          {"mean", number(r.mean)},
          {"n_steps", r.n_steps}};
}

json to_json(const NashSolution& s) {
  json players = json::array();
  for (std::size_t i = 0; i < s.n_players(); ++i)
    players.push_back(s.is_discounted(i) ? to_json(s.discounted(i)) : to_json(s.ergodic(i)));
  json controls = json::array(), z = json::array();
  for (const JointControl& u : s.policy.controls) controls.push_back(u.index);
  for (const auto& row : s.policy.z) z.push_back(numbers(row));
  json j{{"grid", to_json(s.grid)},
         {"players", players},
         {"policy", {{"controls", controls}, {"z", z}}},
         {"convergence", to_json(s.convergence)},
         {"comparison_bound", number(s.comparison_bound)}};
  j["alpha"] = s.alpha ? json(*s.alpha) : json(nullptr);
  return j;
}

NashSolution nash_from_json(const json& j) {
  try {
    const Grid1D grid = grid_from_json(j.at("grid"));
    const std::size_t m = grid.size();
    FeedbackPolicy policy{grid, {}, {}};
    const json& pol = j.at("policy");
    for (const json& u : pol.at("controls"))
      policy.controls.push_back(JointControl{u.get<std::vector<std::size_t>>()});
    for (const json& row : pol.at("z")) {
      std::vector<double> r;
      for (const json& v : row) r.push_back(v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>());
      policy.z.push_back(std::move(r));
    }
    if (policy.controls.size() != m || policy.z.size() != m)
      throw GridMismatch("solution file: policy does not match the grid");

    NashSolution s{grid, {}, policy, {}, get_number(j, "comparison_bound"), std::nullopt};
    if (j.contains("alpha") && !j.at("alpha").is_null()) s.alpha = j.at("alpha").get<double>();
    for (const json& p : j.at("players")) {
      const std::string kind = p.at("kind").get<std::string>();
      if (kind == "ergodic") {
        ErgodicSolution e{grid, get_numbers(p, "v", m), get_numbers(p, "xi", m),
                          get_number(p, "lambda"), get_number(p, "residual_sup"),
                          p.at("iterations").get<std::size_t>(), get_number(p, "growth_constant")};
        s.players.emplace_back(std::move(e));
      } else if (kind == "discounted") {
        DiscountedSolution d{grid, get_numbers(p, "v_tilde", m), get_numbers(p, "xi_tilde", m),
                             get_number(p, "alpha"), get_number(p, "residual_sup"),
                             p.at("iterations").get<std::size_t>(), get_number(p, "bound_constant")};
        s.players.emplace_back(std::move(d));
      } else {
        throw Error("solution file: unknown player kind '" + kind + "'");
      }
    }
    for (const JointControl& u : s.policy.controls)
      if (u.index.size() != s.n_players())
        throw Error("solution file: policy and players disagree on the number of players");
    const json& c = j.at("convergence");
    s.convergence.iterations = c.at("iterations").get<std::size_t>();
    s.convergence.converged = c.at("converged").get<bool>();
    s.convergence.policy_stable = c.at("policy_stable").get<bool>();
    auto table = [](const json& rows) {
      std::vector<std::vector<double>> out;
      for (const json& row : rows) {
        std::vector<double> r;
        for (const json& v : row)
          r.push_back(v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>());
        out.push_back(std::move(r));
      }
      return out;
    };
    s.convergence.value_deltas = table(c.at("value_deltas"));
    s.convergence.xi_deltas = table(c.at("xi_deltas"));
    return s;
  } catch (const json::exception& e) {
    throw Error(std::string("solution file: ") + e.what());
  }
}

void write_solution_csv(std::ostream& os, const ErgodicSolution& s) {
  os << "x,v,xi\n";
  for (std::size_t j = 0; j < s.grid.size(); ++j)
    os << format_number(s.grid.x(j)) << ',' << format_number(s.v[j]) << ','
       << format_number(s.xi[j]) << '\n';
}

void write_solution_csv(std::ostream& os, const DiscountedSolution& s) {
  os << "x,v_tilde,xi_tilde\n";
  for (std::size_t j = 0; j < s.grid.size(); ++j)
    os << format_number(s.grid.x(j)) << ',' << format_number(s.v_tilde[j]) << ','
       << format_number(s.xi_tilde[j]) << '\n';
}

void write_nash_csv(std::ostream& os, const GameSpec& spec, const NashSolution& s) {
  os << 'x';
  for (std::size_t i = 1; i <= s.n_players(); ++i) os << ",v_" << i << ",xi_" << i << ",u_" << i;
  os << '\n';
  for (std::size_t j = 0; j < s.grid.size(); ++j) {
    os << format_number(s.grid.x(j));
    for (std::size_t i = 0; i < s.n_players(); ++i) {
      const Control& u = spec.grid(i).points.at(s.policy.controls[j].index[i]);
      os << ',' << format_number(s.values(i)[j]) << ',' << format_number(s.xi(i)[j]) << ','
         << format_number(u[0]);
    }
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "alpha,status,converged,lambda1,alpha_times_v2_at_0,centered_v2_profile_distance\n";
  for (const SweepRow& r : rows) {
    os << format_number(r.alpha) << ',' << '"' << r.status << '"' << ',' << (r.converged ? 1 : 0)
       << ',' << format_number(r.lambda1) << ',' << format_number(r.alpha_times_v2_at_0) << ','
       << (r.centered_v2_profile_distance ? format_number(*r.centered_v2_profile_distance) : "")
       << '\n';
  }
}

void write_deviations_csv(std::ostream& os, const DeviationReport& r) {
  os << "player,kind,estimate,stderr,margin,pass\n";
  for (const DeviationOutcome& o : r.outcomes)
    os << o.player << ',' << to_string(o.kind) << ',' << format_number(o.estimate.value) << ','
       << format_number(o.estimate.std_error) << ',' << format_number(o.margin) << ','
       << (o.pass ? 1 : 0) << '\n';
}

void write_paths_csv(std::ostream& os, const std::vector<Path>& paths) {
  const std::size_t dim = paths.empty() || paths[0].states.empty()
                              ? 0
                              : static_cast<std::size_t>(paths[0].states[0].size());
  os << "path,t";
  for (std::size_t d = 1; d <= dim; ++d) os << ",x_" << d;
  os << '\n';
  for (std::size_t p = 0; p < paths.size(); ++p)
    for (std::size_t k = 0; k < paths[p].times.size(); ++k) {
      os << p << ',' << format_number(paths[p].times[k]);
      for (Eigen::Index d = 0; d < paths[p].states[k].size(); ++d)
        os << ',' << format_number(paths[p].states[k][d]);
      os << '\n';
    }
}

}  // namespace egame::io
