#include "egame/runner.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#include "egame/config.hpp"
#include "egame/continuous.hpp"
#include "egame/errors.hpp"
#include "egame/io.hpp"
#include "egame/montecarlo.hpp"
#include "egame/nash.hpp"

#ifndef EGAME_VERSION
#define EGAME_VERSION "0.0.0"
#endif

namespace egame {

using nlohmann::json;

namespace {

/// Per-run context shared by the command implementations.
struct Context {
  ExperimentConfig config;
  std::filesystem::path out;
  std::ostream& log;
  bool quiet;
  std::vector<std::string> outputs;

  void say(const std::string& line) const {
    if (!quiet) log << line << '\n';
  }
  void write(const std::string& name, const std::string& text) {
    io::write_file((out / name).string(), text);
    outputs.push_back(name);
  }
  template <class Writer>
  void write_csv(const std::string& name, Writer&& writer) {
    std::ostringstream os;
    writer(os);
    write(name, os.str());
  }
};

std::string fmt(double v) { return io::format_number(v); }

const Grid1D& need_grid(const Context& c) {
  if (!c.config.grid) throw ConfigError("grid: missing required section");
  return *c.config.grid;
}
const GameSpec::Params& need_game(const Context& c) {
  if (!c.config.game) throw ConfigError("game: missing required section");
  return *c.config.game;
}
const DriverConfig& need_driver(const Context& c) {
  if (!c.config.driver) throw ConfigError("driver: missing required section");
  return *c.config.driver;
}
void need_1d(const SdeModel& model) {
  if (model.dim() != 1) throw ConfigError("model.A: this command needs a one-dimensional model");
}

/// Largest |lambda_i - lambda_j| over ergodic players.
double lambda_spread(const NashSolution& s) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < s.n_players(); ++i)
    if (!s.is_discounted(i)) {
      lo = std::min(lo, s.lambda(i));
      hi = std::max(hi, s.lambda(i));
    }
  return hi >= lo ? hi - lo : 0.0;
}

json nash_summary(const NashSolution& s) {
  json lambdas = json::array();
  for (std::size_t i = 0; i < s.n_players(); ++i)
    lambdas.push_back(s.is_discounted(i) ? json(nullptr) : json(s.lambda(i)));
  return {{"converged", s.convergence.converged},
          {"iterations", s.convergence.iterations},
          {"policy_stable", s.convergence.policy_stable},
          {"lambdas", lambdas},
          {"lambda_spread", lambda_spread(s)},
          {"comparison_bound", s.comparison_bound}};
}

// ---------------------------------------------------------------- commands

int cmd_solve_ebsde(Context& c) {
  const SdeModel model(c.config.model);
  need_1d(model);
  const Grid1D& grid = need_grid(c);
  const DriverConfig& driver = need_driver(c);
  if (!driver.lipschitz)
    throw ConfigError("driver.terms: a term is not Lipschitz in z; use continuous-ebsde");
  const SolverOptions& opts = c.config.solver.inner;
  json report{{"command", "solve-ebsde"}, {"driver", driver.description}, {"tol", opts.tol}};
  if (c.config.alpha) {
    const DiscountedSolution s = solve_discounted(model, driver.spec, *c.config.alpha, grid, opts);
    report["solution"] = io::to_json(s);
    report["alpha_times_v_at_0"] = *c.config.alpha * s.v_tilde[grid.ref_index()];
    c.write_csv("solution.csv", [&](std::ostream& os) { io::write_solution_csv(os, s); });
    c.say("discounted solve: alpha v(0) = " + fmt(*c.config.alpha * s.v_tilde[grid.ref_index()]) +
          ", residual " + fmt(s.residual_sup));
  } else {
    const ErgodicSolution s = solve_ergodic(model, driver.spec, grid, opts);
    report["lambda"] = s.lambda;
    report["solution"] = io::to_json(s);
    c.write_csv("solution.csv", [&](std::ostream& os) { io::write_solution_csv(os, s); });
    c.say("lambda = " + fmt(s.lambda) + ", residual " + fmt(s.residual_sup) + ", " +
          std::to_string(s.iterations) + " iterations");
  }
  c.write("solve-ebsde.json", io::dump(report));
  return kExitOk;
}

int cmd_solve_game(Context& c) {
  const SdeModel model(c.config.model);
  need_1d(model);
  const Grid1D& grid = need_grid(c);
  const GameSpec spec(need_game(c));
  const NashSolution s = picard_solve(spec, model, grid, c.config.solver);

  const double tol = c.config.solver.tol;
  bool bounded = true;
  for (std::size_t i = 0; i < s.n_players(); ++i)
    bounded = bounded && s.lambda(i) <= spec.cost_bound() + tol;
  const bool bound_exact = std::abs(s.comparison_bound - spec.cost_bound()) <= tol;

  json report = nash_summary(s);
  report["command"] = "solve-game";
  report["cost_bound"] = spec.cost_bound();
  report["lambdas_below_bound"] = bounded;
  report["comparison_bound_equals_cost_bound"] = bound_exact;
  report["convergence"] = io::to_json(s.convergence);
  c.write("nash.json", io::dump(io::to_json(s)));
  c.write_csv("nash.csv", [&](std::ostream& os) { io::write_nash_csv(os, spec, s); });
  c.write("solve-game.json", io::dump(report));

  std::string line = "Picard: " + std::to_string(s.convergence.iterations) + " sweeps, lambdas";
  for (std::size_t i = 0; i < s.n_players(); ++i) line += " " + fmt(s.lambda(i));
  c.say(line + ", comparison bound " + fmt(s.comparison_bound));
  if (!s.convergence.converged) {
    c.say("Picard iteration did not converge");
    return kExitNotConverged;
  }
  if (!bounded || !bound_exact) {
    c.say("comparison bound violated");
    return kExitVerification;
  }
  return kExitOk;
}

int cmd_verify_nash(Context& c) {
  const SdeModel model(c.config.model);
  need_1d(model);
  const GameSpec spec(need_game(c));
  const NashSolution s = io::nash_from_json(io::read_json_file((c.out / "nash.json").string()));
  if (s.n_players() != spec.n_players())
    throw ConfigError("game.n_players: does not match the saved solution");
  if (c.config.grid && !(*c.config.grid == s.grid))
    throw GridMismatch("grid: configured grid differs from the saved solution's grid");

  const McConfig& mc = c.config.mc;
  const DeviationReport dev = nash_deviation_test(model, spec, s, mc.deviations, mc.params);
  json residuals = json::array();
  for (std::size_t i = 0; i < s.n_players(); ++i)
    residuals.push_back(s.is_discounted(i)
                            ? json(nullptr)
                            : io::to_json(bsde_path_residual(model, spec, s, i, mc.params)));

  json report{{"command", "verify-nash"},
              {"solution_converged", s.convergence.converged},
              {"deviations", io::to_json(dev)},
              {"path_residuals", residuals},
              {"mc",
               {{"T", mc.params.T},
                {"burn_in", mc.params.burn_in},
                {"h", mc.params.h},
                {"n_paths", mc.params.n_paths},
                {"seed", mc.params.seed},
                {"grid_error_budget", mc.deviations.grid_error_budget}}}};
  c.write_csv("deviations.csv", [&](std::ostream& os) { io::write_deviations_csv(os, dev); });
  c.write("verify-nash.json", io::dump(report));
  c.say(std::to_string(dev.outcomes.size()) + " payoff estimates, " + std::to_string(dev.n_failed) +
        " failed");
  return dev.all_passed() ? kExitOk : kExitVerification;
}

int cmd_asymmetric(Context& c) {
  const SdeModel model(c.config.model);
  need_1d(model);
  const Grid1D& grid = need_grid(c);
  const GameSpec spec(need_game(c));
  if (!c.config.alpha) throw ConfigError("alpha: missing required field");
  const NashSolution s = asymmetric_solve(spec, model, *c.config.alpha, grid, c.config.solver);
  json report = nash_summary(s);
  report["command"] = "asymmetric";
  report["alpha"] = *c.config.alpha;
  report["alpha_times_v2_at_0"] = *c.config.alpha * s.discounted(1).v_tilde[grid.ref_index()];
  report["solution"] = io::to_json(s);
  c.write_csv("asymmetric.csv", [&](std::ostream& os) { io::write_nash_csv(os, spec, s); });
  c.write("asymmetric.json", io::dump(report));
  c.say("lambda1 = " + fmt(s.lambda(0)) + ", alpha v2(0) = " +
        fmt(*c.config.alpha * s.discounted(1).v_tilde[grid.ref_index()]));
  return s.convergence.converged ? kExitOk : kExitNotConverged;
}

int cmd_discount_sweep(Context& c) {
  const SdeModel model(c.config.model);
  need_1d(model);
  const Grid1D& grid = need_grid(c);
  const GameSpec spec(need_game(c));
  if (c.config.alphas.empty()) throw ConfigError("alphas: missing required field");
  const std::vector<SweepRow> rows =
      vanishing_discount_sweep(spec, model, grid, c.config.alphas, c.config.solver);
  const NashSolution ergodic = picard_solve(spec, model, grid, c.config.solver);
  // Player 2's ergodic value is the limit of alpha v2(0).
  const double lambda_tilde = ergodic.lambda(1);
  const SweepAssessment a = assess_sweep(rows, lambda_tilde);
  json report{{"command", "discount-sweep"},
              {"rows", io::to_json(rows)},
              {"ergodic_lambda", lambda_tilde},
              {"ergodic_converged", ergodic.convergence.converged},
              {"gaps", a.gaps},
              {"inversions", a.inversions},
              {"monotone", a.monotone},
              {"final_gap", a.final_gap}};
  c.write_csv("sweep.csv", [&](std::ostream& os) { io::write_sweep_csv(os, rows); });
  c.write("discount-sweep.json", io::dump(report));
  for (std::size_t k = 0; k < rows.size(); ++k)
    c.say("alpha " + fmt(rows[k].alpha) + ": alpha v2(0) = " + fmt(rows[k].alpha_times_v2_at_0) +
          ", gap " + fmt(a.gaps[k]));
  const bool all_converged = ergodic.convergence.converged &&
                             std::all_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.converged; });
  if (!all_converged) return kExitNotConverged;
  return a.monotone ? kExitOk : kExitVerification;
}

int cmd_continuous(Context& c) {
  const SdeModel model(c.config.model);
  need_1d(model);
  const Grid1D& grid = need_grid(c);
  const DriverConfig& driver = need_driver(c);
  const Decomposition d = decompose(driver.spec.f, driver.growth);
  json starts = json::array();
  bool converged = true, below = true;
  for (std::size_t k = 0; k < c.config.continuous.initial_xi.size(); ++k) {
    ContinuousOptions o;
    o.tol = c.config.solver.inner.tol;
    o.max_iter = c.config.continuous.max_iter;
    o.inner = c.config.solver.inner;
    o.initial_xi.assign(grid.size(), c.config.continuous.initial_xi[k]);
    const ContinuousResult r = solve_continuous_ebsde(model, d, grid, o);
    converged = converged && r.converged;
    below = below && r.original_residual <= c.config.continuous.residual_ceiling;
    json j = io::to_json(r);
    j["initial_xi"] = c.config.continuous.initial_xi[k];
    starts.push_back(j);
    if (k == 0)
      c.write_csv("continuous.csv", [&](std::ostream& os) { io::write_solution_csv(os, r.solution); });
    c.say("xi0 = " + fmt(c.config.continuous.initial_xi[k]) + ": lambda = " + fmt(r.solution.lambda) +
          " after " + std::to_string(r.iterations) + " iterations, residual " +
          fmt(r.original_residual));
  }
  json report{{"command", "continuous-ebsde"},
              {"driver", driver.description},
              {"kappa", d.kappa()},
              {"residual_ceiling", c.config.continuous.residual_ceiling},
              {"starts", starts}};
  c.write("continuous-ebsde.json", io::dump(report));
  if (!converged) return kExitNotConverged;
  return below ? kExitOk : kExitVerification;
}

int cmd_simulate(Context& c) {
  const SdeModel model(c.config.model);
  const SimulateConfig& sim = c.config.simulate;
  std::optional<DriftShift> shift;
  if (sim.shift != 0.0)
    shift = DriftShift::constant(Vector::Constant(static_cast<Eigen::Index>(model.dim()), sim.shift));
  std::vector<Path> paths;
  for (std::size_t p = 0; p < sim.n_paths; ++p)
    paths.push_back(simulate(model, shift ? &*shift : nullptr, sim.T, sim.h, mix64(c.config.seed) + p));
  RunningMoments first;
  for (const Path& p : paths) first.add(p.states.back()[0]);
  json report{{"command", "simulate"},
              {"T", sim.T},
              {"h", sim.h},
              {"n_paths", sim.n_paths},
              {"shift", sim.shift},
              {"n_steps", step_count(sim.T, sim.h)},
              {"final_mean_x1", first.mean()},
              {"final_variance_x1", first.sample_variance()}};
  c.write_csv("paths.csv", [&](std::ostream& os) { io::write_paths_csv(os, paths); });
  c.write("simulate.json", io::dump(report));
  c.say(std::to_string(sim.n_paths) + " paths, mean X_T = " + fmt(first.mean()));
  return kExitOk;
}

int cmd_check_assumptions(Context& c) {
  const SdeModel::Params& p = c.config.model;
  const AssumptionReport a = check_assumptions(p, p.check_samples, p.check_seed);
  json report{{"command", "check-assumptions"}, {"model", io::to_json(a)}};
  bool ok = a.ok();
  if (ok) {
    const SdeModel model(p);
    const SimulateConfig& sim = c.config.simulate;
    const MomentReport m = moment_bound_check(model, sim.moment_T, sim.h, sim.moment_paths,
                                              mix64(c.config.seed ^ 0x303ULL));
    report["moments"] = io::to_json(m);
    ok = ok && m.horizon_stable;
  }
  if (c.config.game) {
    try {
      const GameSpec spec(*c.config.game);
      const IsaacReport r =
          verify_isaacs(spec, uniform_isaac_sampler(spec.state_dim(), spec.n_players(), 5.0, 5.0),
                        2000, 1e-3, mix64(c.config.seed ^ 0x15aacULL), c.config.solver.isaac);
      report["isaac"] = io::to_json(r);
      ok = ok && r.n_pure_nash == r.n_samples;
    } catch (const AssumptionViolation& e) {
      report["game_error"] = e.what();
      ok = false;
    }
  }
  report["ok"] = ok;
  c.write("check-assumptions.json", io::dump(report));
  c.say(ok ? "all sampled assumptions hold" : "some sampled assumption failed");
  return ok ? kExitOk : kExitVerification;
}

using Command = std::function<int(Context&)>;

const std::map<std::string, Command>& table() {
  static const std::map<std::string, Command> t{
      {"solve-ebsde", cmd_solve_ebsde},       {"solve-game", cmd_solve_game},
      {"verify-nash", cmd_verify_nash},       {"asymmetric", cmd_asymmetric},
      {"discount-sweep", cmd_discount_sweep}, {"continuous-ebsde", cmd_continuous},
      {"simulate", cmd_simulate},             {"check-assumptions", cmd_check_assumptions}};
  return t;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"solve-ebsde", "solve-game",       "verify-nash",
                                              "asymmetric",  "discount-sweep",   "continuous-ebsde",
                                              "simulate",    "check-assumptions"};
  return names;
}

int run(const std::string& command, const RunOptions& options, std::ostream& log,
        std::ostream& err) {
  const auto it = table().find(command);
  if (it == table().end()) {
    err << "unknown command '" << command << "'\n";
    return kExitUsage;
  }
  const auto start = std::chrono::steady_clock::now();
  std::optional<Context> ctx;
  try {
    ExperimentConfig config = load_config(options.config_path);
    if (options.seed) set_seed(config, *options.seed);
    std::filesystem::create_directories(options.out_dir);
    ctx.emplace(Context{std::move(config), options.out_dir, log, options.quiet, {}});
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  int code = kExitOk;
  std::string error;
  try {
    code = it->second(*ctx);
  } catch (const MaxSweepsExceeded& e) {
    code = kExitNotConverged, error = e.what();
  } catch (const NoPureNash& e) {
    code = kExitNotConverged, error = e.what();
  } catch (const BestResponseCycle& e) {
    code = kExitNotConverged, error = e.what();
  } catch (const CflViolation& e) {
    code = kExitNotConverged, error = e.what();
  } catch (const SimulationDiverged& e) {
    code = kExitVerification, error = e.what();
  } catch (const std::exception& e) {
    code = kExitUsage, error = e.what();
  }
  if (!error.empty()) err << command << ": " << error << '\n';

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest{{"manifest_version", 1},
                {"command", command},
                {"config", json::parse(ctx->config.canonical)},
                {"config_hash", "fnv1a:" + hex64(fnv1a(ctx->config.canonical))},
                {"seed", ctx->config.seed},
                {"versions",
                 {{"egame", EGAME_VERSION},
                  {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                std::to_string(EIGEN_MINOR_VERSION)},
                  {"compiler", __VERSION__}}},
                {"exit_code", code},
                {"outputs", ctx->outputs},
                {"wall_time_seconds", wall}};
  if (!error.empty()) manifest["error"] = error;
  try {
    io::write_file((ctx->out / ("manifest-" + command + ".json")).string(), io::dump(manifest));
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    if (code == kExitOk) code = kExitUsage;
  }
  return code;
}

}  // namespace egame
