#include <gtest/gtest.h>

#include <cmath>

#include "egame/errors.hpp"
#include "egame/montecarlo.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace egame;

namespace {

Grid1D mc_grid() { return Grid1D(-6.0, 6.0, 301, 5); }

McParams quick_mc(double T = 40.0, std::size_t paths = 40) {
  McParams mc;
  mc.T = T;
  mc.burn_in = 4.0;
  mc.n_paths = paths;
  mc.threads = 1;
  return mc;
}

GameSpec game_with(std::function<Vector(std::span<const Control>)> drift, double drift_bound,
                   std::function<double(const Vector&, std::span<const Control>)> cost, double cost_bound,
                   double cost_lipschitz) {
  GameSpec::Params p = fixture::g0_params();
  p.drift = std::move(drift);
  p.drift_bound = drift_bound;
  p.costs = {cost, cost};
  p.cost_bound = cost_bound;
  p.cost_lipschitz = cost_lipschitz;
  return GameSpec(p);
}

GameSpec constant_cost_game(double c) {
  return game_with([](std::span<const Control> u) { return Vector::Constant(1, u[0][0] + u[1][0]); }, 2.0,
                   [c](const Vector&, std::span<const Control>) { return c; }, c, 0.0);
}

const NashSolution& g0_nash() {
  static const NashSolution s = picard_solve(fixture::g0(), fixture::m0(), mc_grid());
  return s;
}

}  // namespace

TEST(Payoff, ConstantCostIsExact) {
  const GameSpec spec = constant_cost_game(0.8);
  const NashSolution nash = picard_solve(spec, fixture::m0(), mc_grid());
  const PayoffEstimate e = estimate_payoff(fixture::m0(), spec, nash.policy, 0, PayoffKind::ergodic(), quick_mc());
  EXPECT_EQ(e.value, 0.8);
  EXPECT_EQ(e.std_error, 0.0);
  EXPECT_EQ(e.n_paths, 40u);
}

TEST(Payoff, UncontrolledDriftMatchesEulerCorrectedOracle) {
  const GameSpec spec = game_with([](std::span<const Control>) { return Vector::Zero(1); }, 0.0,
                                  [](const Vector& x, std::span<const Control>) { return fixture::g(x); }, 1.0, 0.65);
  const NashSolution nash = picard_solve(spec, fixture::m0(), mc_grid());
  McParams mc = quick_mc(100.0, 100);
  mc.burn_in = 10.0;
  const PayoffEstimate e = estimate_payoff(fixture::m0(), spec, nash.policy, 1, PayoffKind::ergodic(), mc);
  const double sd = std::sqrt(oracle::euler_ou_variance(1.0, std::sqrt(2.0), mc.h));
  const double expected = oracle::normal_expectation(oracle::saturating, 0.0, sd);
  EXPECT_LE(std::abs(e.value - expected), 3.0 * e.std_error);
  EXPECT_NEAR(e.value, 0.3443, 3.0 * e.std_error + 2e-3);
}

TEST(Payoff, ConstantDriftShiftsStateMean) {
  const double b = 0.4;
  const GameSpec spec = game_with([b](std::span<const Control>) { return Vector::Constant(1, b); }, b,
                                  [](const Vector& x, std::span<const Control>) { return x[0]; }, 10.0, 1.0);
  const NashSolution nash = picard_solve(spec, fixture::m0(), mc_grid());
  McParams mc = quick_mc(100.0, 100);
  mc.burn_in = 10.0;
  const PayoffEstimate e = estimate_payoff(fixture::m0(), spec, nash.policy, 0, PayoffKind::ergodic(), mc);
  EXPECT_LE(std::abs(e.value - std::sqrt(2.0) * b), 3.0 * e.std_error);
}

TEST(Payoff, ThreadCountDoesNotChangeEstimate) {
  McParams one = quick_mc(10.0, 12), many = one;
  many.threads = 4;
  const auto a = estimate_payoff(fixture::m0(), fixture::g0(), g0_nash().policy, 0, PayoffKind::ergodic(), one);
  const auto b = estimate_payoff(fixture::m0(), fixture::g0(), g0_nash().policy, 0, PayoffKind::ergodic(), many);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(Payoff, DiscountedConstantCostIsGeometricSum) {
  const double c = 0.8, alpha = 0.5;
  const GameSpec spec = constant_cost_game(c);
  const NashSolution nash = picard_solve(spec, fixture::m0(), mc_grid());
  McParams mc = quick_mc(effective_horizon(alpha, c, 1e-3), 4);
  const PayoffEstimate e =
      estimate_payoff(fixture::m0(), spec, nash.policy, 0, PayoffKind::discount(alpha), mc);
  const double q = std::exp(-alpha * mc.h);
  const auto n = static_cast<double>(std::ceil(mc.T / mc.h - 1e-9));
  EXPECT_NEAR(e.value, c * mc.h * (1.0 - std::pow(q, n)) / (1.0 - q), 1e-10);
  EXPECT_NEAR(e.value, c / alpha, 1e-3 + c * mc.h);
  EXPECT_EQ(e.burn_in, 0.0);
}

TEST(Payoff, ShortDiscountedHorizonIsRejected) {
  const McParams mc = quick_mc(5.0, 2);
  EXPECT_THROW(estimate_payoff(fixture::m0(), fixture::g0(), g0_nash().policy, 0, PayoffKind::discount(0.1), mc),
               InsufficientHorizon);
  EXPECT_NEAR(effective_horizon(0.1, 2.0, 1e-3), std::log(2.0 / 1e-4) / 0.1, 1e-9);
}

TEST(Deviation, SmallRunPassesAndIsSelfConsistent) {
  DeviationOptions o;
  o.n_deviations = 6;
  const DeviationReport r = nash_deviation_test(fixture::m0(), fixture::g0(), g0_nash(), o, quick_mc(40.0, 30));
  ASSERT_EQ(r.outcomes.size(), 2u * 7u);
  EXPECT_TRUE(r.all_passed());
  EXPECT_FALSE(r.scope.empty());
  std::size_t failed = 0;
  for (const DeviationOutcome& d : r.outcomes) {
    EXPECT_NEAR(d.margin, d.estimate.value - d.reference, 1e-15);
    EXPECT_NEAR(d.threshold, 3.0 * d.estimate.std_error + o.grid_error_budget, 1e-15);
    const bool expected = d.kind == DeviationKind::equilibrium ? std::abs(d.margin) <= d.threshold
                                                               : d.margin >= -d.threshold;
    EXPECT_EQ(d.pass, expected);
    failed += d.pass ? 0 : 1;
  }
  EXPECT_EQ(failed, r.n_failed);
  EXPECT_EQ(r.outcomes[0].kind, DeviationKind::equilibrium);
  EXPECT_EQ(r.outcomes[1].kind, DeviationKind::constant);
}

TEST(Deviation, IdleControlCostsAtLeastTheEquilibrium) {
  const NashSolution& nash = g0_nash();
  PolicyOverride idle{0, std::vector<std::size_t>(nash.grid.size(), 20), "u = 0"};
  const McParams mc = quick_mc(100.0, 60);
  const PayoffEstimate e =
      estimate_payoff(fixture::m0(), fixture::g0(), nash.policy, 0, PayoffKind::ergodic(), mc, &idle);
  EXPECT_GE(e.value - nash.lambda(0), -(3.0 * e.std_error + 0.05));
}

TEST(Deviation, PlayerTwoOverrideLeavesPlayerOneControlInPlace) {
  const GameSpec spec = constant_cost_game(0.3);
  const NashSolution nash = picard_solve(spec, fixture::m0(), mc_grid());
  gen::for_all(601, 5, [&](gen::Source& src, std::size_t) {
    PolicyOverride random{1, {}, "random"};
    for (std::size_t j = 0; j < nash.grid.size(); ++j) random.indices.push_back(src.index(41));
    const auto e = estimate_payoff(fixture::m0(), spec, nash.policy, 0, PayoffKind::ergodic(), quick_mc(10.0, 4),
                                   &random);
    EXPECT_EQ(e.value, 0.3);
  });
}

TEST(PathResidual, VanishesForConstantGame) {
  const GameSpec spec = constant_cost_game(0.5);
  const NashSolution nash = picard_solve(spec, fixture::m0(), mc_grid());
  const PathResidual r = bsde_path_residual(fixture::m0(), spec, nash, 0, quick_mc(10.0, 5));
  EXPECT_NEAR(r.rms, 0.0, 1e-12);
  EXPECT_GT(r.n_steps, 0u);
}

TEST(PathResidual, RmsScalesWithStep) {
  McParams coarse = quick_mc(40.0, 20), fine = coarse;
  coarse.h = 0.02;
  fine.h = 0.01;
  const PathResidual a = bsde_path_residual(fixture::m0(), fixture::g0(), g0_nash(), 0, coarse);
  const PathResidual b = bsde_path_residual(fixture::m0(), fixture::g0(), g0_nash(), 0, fine);
  EXPECT_GT(a.rms / b.rms, 1.6);
  EXPECT_LT(a.rms / b.rms, 2.4);
  EXPECT_NEAR(b.normalized, b.rms / std::sqrt(0.01), 1e-15);
}

TEST(PathResidual, LambdaOffsetShiftsMean) {
  const McParams mc = quick_mc(20.0, 10);
  const PathResidual a = bsde_path_residual(fixture::m0(), fixture::g0(), g0_nash(), 1, mc);
  const PathResidual b = bsde_path_residual(fixture::m0(), fixture::g0(), g0_nash(), 1, mc, 0.1);
  EXPECT_NEAR(b.mean - a.mean, -0.1 * mc.h, 1e-12);
  EXPECT_GT(b.rms, a.rms);
}

TEST(PathResidual, DiscountedPlayerIsRejected) {
  const NashSolution nash = asymmetric_solve(fixture::g0(), fixture::m0(), 0.5, mc_grid());
  EXPECT_THROW(bsde_path_residual(fixture::m0(), fixture::g0(), nash, 1, quick_mc(10.0, 2)), InvalidArgument);
  EXPECT_NO_THROW(bsde_path_residual(fixture::m0(), fixture::g0(), nash, 0, quick_mc(10.0, 2)));
}
