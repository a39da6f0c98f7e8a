// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "egame/config.hpp"
#include "egame/continuous.hpp"
#include "egame/montecarlo.hpp"
#include "egame/nash.hpp"
#include "egame/runner.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace egame;

namespace {

const fs::path kConfigs = EGAME_CONFIG_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig config(const std::string& name) { return load_config((kConfigs / name).string()); }

SdeModel m0() { return SdeModel::ornstein_uhlenbeck(1.0, std::sqrt(2.0), 0.0); }

Grid1D standard_grid() { return Grid1D(-6.0, 6.0, 601, 5); }

DriverSpec saturating_plus(double b, double c) {
  DriverSpec d;
  d.f = [b, c](double x, double z) { return oracle::saturating(x) + b * z + c; };
  d.lipschitz_z = std::abs(b);
  d.bound_at_zero = 1.0 + std::abs(c);
  d.slope = [b](double, double) { return b; };
  return d;
}

/// Shared G0 artefacts; the ergodic solve is reused by several criteria.
struct G0 {
  ExperimentConfig cfg = config("g0.json");
  SdeModel model{cfg.model};
  GameSpec spec{*cfg.game};
  NashSolution nash = picard_solve(spec, model, *cfg.grid, cfg.solver);
};

const G0& g0() {
  static const G0 instance;
  return instance;
}

Verdict invariant_measure_oracle() {
  const double expected = oracle::normal_expectation(oracle::saturating, 0.0, 1.0);
  const auto t0 = std::chrono::steady_clock::now();
  const ErgodicSolution s = solve_ergodic(m0(), saturating_plus(0.0, 0.0), standard_grid());
  const double t = seconds_since(t0);
  const double err = std::abs(s.lambda - expected);
  return {err <= 1e-2 && t < 5.0,
          fmt("lambda %.6f, quadrature %.6f, |diff| %.2e <= 1e-2, %.2f s < 5 s", s.lambda, expected, err, t)};
}

Verdict linear_driver_oracle() {
  const double b = 0.5;
  const double expected = oracle::normal_expectation(oracle::saturating, std::sqrt(2.0) * b, 1.0);
  const ErgodicSolution s = solve_ergodic(m0(), saturating_plus(b, 0.0), standard_grid());
  const double err = std::abs(s.lambda - expected);
  return {err <= 1e-2, fmt("lambda %.6f, shifted-law quadrature %.6f, |diff| %.2e <= 1e-2", s.lambda, expected, err)};
}

Verdict constant_driver() {
  const double tol = 1e-6;
  double worst_lambda = 0.0, worst_v = 0.0;
  for (double c : {-2.0, 0.0, 0.7, 3.5}) {
    DriverSpec d{[c](double, double) { return c; }, 0.0, std::abs(c), {}};
    const ErgodicSolution s = solve_ergodic(m0(), d, standard_grid());
    worst_lambda = std::max(worst_lambda, std::abs(s.lambda - c));
    for (double v : s.v) worst_v = std::max(worst_v, std::abs(v));
  }
  return {worst_lambda <= tol && worst_v <= tol,
          fmt("max |lambda - c| %.2e, max |v| %.2e, both <= 1e-6 over c in {-2, 0, 0.7, 3.5}", worst_lambda, worst_v)};
}

Verdict shift_invariance() {
  const double tol = 1e-6;
  const double base = solve_ergodic(m0(), saturating_plus(0.0, 0.0), standard_grid()).lambda;
  double worst = 0.0;
  for (double c : {-1.0, 0.37, 5.0}) {
    const double shifted = solve_ergodic(m0(), saturating_plus(0.0, c), standard_grid()).lambda;
    worst = std::max(worst, std::abs(shifted - base - c));
  }
  return {worst <= 2.0 * tol, fmt("max |lambda(f+c) - lambda(f) - c| %.2e <= 2e-6 for c in {-1, 0.37, 5}", worst)};
}

Verdict comparison_bound_check() {
  bool pass = true;
  std::string detail;
  for (const char* name : {"g0.json", "coupled.json", "three_player.json"}) {
    const ExperimentConfig cfg = config(name);
    const SdeModel model(cfg.model);
    const GameSpec spec(*cfg.game);
    const NashSolution s = picard_solve(spec, model, *cfg.grid, cfg.solver);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.n_players(); ++i) top = std::max(top, s.lambda(i));
    const bool ok = s.convergence.converged && top <= spec.cost_bound() + cfg.solver.tol &&
                    s.comparison_bound == spec.cost_bound();
    pass = pass && ok;
    detail += fmt("%s max lambda %.4f <= L_max %.4f, bound %.17g; ", name, top, spec.cost_bound(),
                  s.comparison_bound);
  }
  return {pass, detail};
}

Verdict picard_fixed_point() {
  const G0& g = g0();
  const NashSolution& s = g.nash;
  const NashSolution next = picard_continue(g.spec, g.model, s, 1, g.cfg.solver);
  const double tol = g.cfg.solver.tol;
  const double move = std::max(std::abs(next.lambda(0) - s.lambda(0)), std::abs(next.lambda(1) - s.lambda(1)));
  const double spread = std::abs(s.lambda(0) - s.lambda(1));
  const bool pass = s.convergence.converged && s.convergence.iterations <= 50 && move < tol && spread < 1e-4;
  return {pass, fmt("converged in %zu sweeps (<= 50), extra sweep moves lambda by %.2e < %.0e, |l1 - l2| %.2e < 1e-4",
                    s.convergence.iterations, move, tol, spread)};
}

Verdict deviation_summary(const DeviationReport& r, std::size_t n_players, std::size_t min_deviations,
                          double seconds, double time_limit) {
  std::vector<std::size_t> per_player(n_players, 0);
  double worst_self = 0.0, worst_dev = std::numeric_limits<double>::infinity();
  for (const DeviationOutcome& d : r.outcomes) {
    if (d.kind == DeviationKind::equilibrium) {
      worst_self = std::max(worst_self, std::abs(d.margin) / d.threshold);
    } else {
      ++per_player[d.player];
      worst_dev = std::min(worst_dev, d.margin + d.threshold);
    }
  }
  const bool enough = std::all_of(per_player.begin(), per_player.end(),
                                  [&](std::size_t n) { return n >= min_deviations; });
  const bool pass = r.all_passed() && enough && seconds < time_limit;
  return {pass, fmt("%zu estimates, %zu failed, max |self margin|/threshold %.2f, min deviation slack %.4f, %zu "
                    "deviations per player, %.1f s < %.0f s",
                    r.outcomes.size(), r.n_failed, worst_self, worst_dev, per_player.front(), seconds, time_limit)};
}

Verdict nash_verification() {
  const G0& g = g0();
  const McParams& mc = g.cfg.mc.params;
  if (mc.n_paths != 200 || mc.T != 200.0 || mc.h != 0.01)
    return {false, "g0.json Monte Carlo budget differs from n_paths 200, T 200, h 0.01"};
  const auto t0 = std::chrono::steady_clock::now();
  const DeviationReport r = nash_deviation_test(g.model, g.spec, g.nash, g.cfg.mc.deviations, mc);
  return deviation_summary(r, 2, 60, seconds_since(t0), 120.0);
}

Verdict path_residual_scaling() {
  const G0& g = g0();
  McParams coarse = g.cfg.mc.params, fine = coarse;
  coarse.h = 0.02;
  fine.h = 0.01;
  bool pass = true;
  std::string detail;
  for (std::size_t i = 0; i < 2; ++i) {
    const PathResidual a = bsde_path_residual(g.model, g.spec, g.nash, i, coarse);
    const PathResidual b = bsde_path_residual(g.model, g.spec, g.nash, i, fine);
    const double ratio = a.rms / b.rms;
    pass = pass && ratio >= 1.4 && ratio <= 2.6;
    detail += fmt("player %zu rms %.5f -> %.5f, ratio %.3f in [1.4, 2.6]; ", i + 1, a.rms, b.rms, ratio);
  }
  return {pass, detail};
}

Verdict continuous_consistency() {
  const double kappa = 1.0, tol = 1e-6;
  const ScalarDriver f = [kappa](double x, double z) { return kappa * std::tanh(z) + oracle::saturating(x); };
  // |f| <= kappa + 1 <= (kappa + 1)(1 + |z|).
  const Decomposition d = decompose(f, kappa + 1.0);
  const ContinuousResult c = solve_continuous_ebsde(m0(), d, standard_grid());
  DriverSpec direct{f, kappa, 1.0, [kappa](double, double z) { return kappa / (std::cosh(z) * std::cosh(z)); }};
  const ErgodicSolution e = solve_ergodic(m0(), direct, standard_grid());
  const double gap = std::abs(c.solution.lambda - e.lambda);

  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> ux(-6.0, 6.0), wide(-20.0, 20.0), unit(-1.5, 1.5);
  double worst_ulps = 0.0, worst_phi = 0.0, worst_psi = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const double x = ux(rng), z = (k % 2 == 0) ? wide(rng) : unit(rng);
    const double exact = f(x, z);
    const double rebuilt = d.phi(x, z) * z + d.psi(x, z);
    const double ulp = std::nextafter(std::abs(exact), std::numeric_limits<double>::infinity()) - std::abs(exact);
    worst_ulps = std::max(worst_ulps, std::abs(rebuilt - exact) / ulp);
    worst_phi = std::max(worst_phi, std::abs(d.phi(x, z)));
    worst_psi = std::max(worst_psi, std::abs(d.psi(x, z)));
  }
  const bool pass = c.converged && gap <= 2.0 * tol && worst_ulps <= 4.0 && worst_phi <= d.bound() &&
                    worst_psi <= d.bound();
  return {pass, fmt("|lambda_cont - lambda_direct| %.2e <= 2e-6 after %zu iterations; identity error <= %.0f ulp on "
                    "1e4 points; max|phi| %.3f, max|psi| %.3f <= 2 kappa %.1f",
                    gap, c.iterations, worst_ulps, worst_phi, worst_psi, d.bound())};
}

Verdict vanishing_discount() {
  const G0& g = g0();
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<SweepRow> rows = vanishing_discount_sweep(g.spec, g.model, *g.cfg.grid,
                                                              {0.5, 0.2, 0.1, 0.05, 0.02}, g.cfg.solver);
  const double t = seconds_since(t0);
  const double lambda_tilde = g.nash.lambda(1);
  const SweepAssessment a = assess_sweep(rows, lambda_tilde, 1e-3, 1);
  std::string gaps;
  for (double x : a.gaps) gaps += fmt("%.4f ", x);
  const bool pass = a.monotone && a.final_gap <= 0.05 && t < 120.0;
  return {pass, fmt("gaps %s(%zu inversions), final %.4f <= 0.05, %.1f s < 120 s", gaps.c_str(), a.inversions,
                    a.final_gap, t)};
}

Verdict cost_shift_invariance() {
  const G0& g = g0();
  GameSpec::Params p = g.spec.params();
  const CostFunction base = p.costs[0];
  p.costs[0] = [base](const Vector& x, std::span<const Control> u) { return base(x, u) + 1.0; };
  p.cost_bound += 1.0;
  const NashSolution s = picard_solve(GameSpec(p), g.model, *g.cfg.grid, g.cfg.solver);
  const double tol = g.cfg.solver.tol;
  const double shift = s.lambda(0) - g.nash.lambda(0);
  std::size_t changed = 0;
  for (std::size_t j = 0; j < s.policy.controls.size(); ++j)
    changed += s.policy.controls[j] == g.nash.policy.controls[j] ? 0 : 1;
  const bool pass = s.convergence.converged && std::abs(shift - 1.0) <= 2.0 * tol && changed == 0;
  return {pass, fmt("lambda_1 shift %.9f (|shift - 1| %.2e <= 2e-6), %zu nodes changed control", shift,
                    std::abs(shift - 1.0), changed)};
}

Verdict n_player_smoke() {
  const ExperimentConfig cfg = config("three_player.json");
  const SdeModel model(cfg.model);
  const GameSpec spec(*cfg.game);
  const NashSolution s = picard_solve(spec, model, *cfg.grid, cfg.solver);
  double top = -std::numeric_limits<double>::infinity(), move = 0.0;
  const NashSolution next = picard_continue(spec, model, s, 1, cfg.solver);
  for (std::size_t i = 0; i < 3; ++i) {
    top = std::max(top, s.lambda(i));
    move = std::max(move, std::abs(next.lambda(i) - s.lambda(i)));
  }
  const bool bound_ok = top <= spec.cost_bound() + cfg.solver.tol && s.comparison_bound == spec.cost_bound();
  const bool picard_ok = s.convergence.converged && s.convergence.iterations <= 50 && move < cfg.solver.tol;
  const auto t0 = std::chrono::steady_clock::now();
  const DeviationReport r = nash_deviation_test(model, spec, s, cfg.mc.deviations, cfg.mc.params);
  const Verdict mc = deviation_summary(r, 3, 60, seconds_since(t0), 240.0);
  return {bound_ok && picard_ok && mc.pass,
          fmt("bound %s (max lambda %.4f <= %.1f), Picard %s (%zu sweeps, extra sweep %.1e); ", bound_ok ? "ok" : "FAIL",
              top, spec.cost_bound(), picard_ok ? "ok" : "FAIL", s.convergence.iterations, move) +
              mc.detail};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict reproducibility() {
  const fs::path root = fs::temp_directory_path() / "egame_acceptance_repro";
  fs::remove_all(root);
  std::ostringstream sink;
  std::string codes;
  for (const char* run : {"a", "b"}) {
    RunOptions o;
    o.config_path = (kConfigs / "g0.json").string();
    o.out_dir = (root / run).string();
    o.quiet = true;
    codes += std::to_string(egame::run("solve-game", o, sink, sink));
    codes += std::to_string(egame::run("verify-nash", o, sink, sink));
  }
  std::size_t identical = 0, compared = 0;
  for (const char* f : {"nash.json", "nash.csv", "solve-game.json", "verify-nash.json", "deviations.csv"}) {
    ++compared;
    const std::string a = slurp(root / "a" / f), b = slurp(root / "b" / f);
    identical += (!a.empty() && a == b) ? 1 : 0;
  }
  fs::remove_all(root);
  return {codes == "0000" && identical == compared,
          fmt("exit codes %s, %zu/%zu report files byte-identical", codes.c_str(), identical, compared)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"invariant-measure oracle", invariant_measure_oracle},
      {"linear-in-z driver", linear_driver_oracle},
      {"constant-driver exactness", constant_driver},
      {"shift invariance", shift_invariance},
      {"comparison bound", comparison_bound_check},
      {"Picard fixed point", picard_fixed_point},
      {"Nash verification", nash_verification},
      {"BSDE path residual", path_residual_scaling},
      {"continuous-driver consistency", continuous_consistency},
      {"vanishing discount", vanishing_discount},
      {"cost-shift argmin invariance", cost_shift_invariance},
      {"n-player smoke", n_player_smoke},
      {"reproducibility", reproducibility},
  };
  std::size_t failed = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("%s %2zu %s: %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                v.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed in %.1f s\n", criteria.size() - failed, criteria.size(), seconds_since(start));
  return failed == 0 ? 0 : 1;
}
