#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "egame/errors.hpp"
#include "egame/game.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace egame;

namespace {

Vector scalar(double v) { return Vector::Constant(1, v); }

JointControl joint(std::size_t a, std::size_t b) { return JointControl{{a, b}}; }

/// Index on the 41-point grid of [-1, 1] nearest to v.
std::size_t g0_index(double v) {
  return static_cast<std::size_t>(std::lround((std::clamp(v, -1.0, 1.0) + 1.0) / 0.05));
}

bool is_pure_nash(const GameSpec& spec, const Vector& x, const std::vector<Vector>& z, const JointControl& u) {
  for (std::size_t i = 0; i < spec.n_players(); ++i) {
    const double h = hamiltonian(spec, i, x, z[i], u);
    JointControl alt = u;
    for (std::size_t k = 0; k < spec.grid(i).points.size(); ++k) {
      alt.index[i] = k;
      if (hamiltonian(spec, i, x, z[i], alt) < h - 1e-12 * (1.0 + std::abs(h))) return false;
    }
  }
  return true;
}

}  // namespace

TEST(Hamiltonian, ArithmeticExamples) {
  GameSpec::Params p = fixture::g0_params();
  p.costs[0] = [](const Vector&, std::span<const Control> u) { return u[0][0] * u[0][0]; };
  const GameSpec spec(p);
  // (u, v) = (1, -1) and (-0.5, 0) on the 41-point grid.
  EXPECT_DOUBLE_EQ(hamiltonian(spec, 0, scalar(0.0), scalar(2.0), joint(40, 0)), 1.0);
  EXPECT_DOUBLE_EQ(hamiltonian(spec, 0, scalar(0.0), scalar(1.0), joint(10, 20)), -0.25);
}

TEST(Hamiltonian, ZeroCostateLeavesOnlyTheCost) {
  const GameSpec spec = fixture::g0();
  const Vector x = scalar(0.8);
  for (std::size_t a : {0u, 7u, 40u})
    for (std::size_t b : {3u, 20u})
      EXPECT_EQ(hamiltonian(spec, 1, x, scalar(0.0), joint(a, b)), spec.cost(1, x, joint(a, b)));
}

TEST(Isaac, AnalyticBestResponses) {
  const GameSpec spec = fixture::g0();
  const Vector x = scalar(0.3);
  const std::vector<Vector> z{scalar(1.0), scalar(-1.0)};
  EXPECT_EQ(isaac_fixed_point(spec, x, z), joint(10, 30));
  const std::vector<Vector> zero{scalar(0.0), scalar(0.0)};
  EXPECT_EQ(isaac_fixed_point(spec, x, zero), joint(20, 20));
  const std::vector<Vector> saturated{scalar(10.0), scalar(0.0)};
  EXPECT_EQ(isaac_fixed_point(spec, x, saturated).index[0], 0u);
}

TEST(Isaac, PenniesHasNoPureNash) {
  const GameSpec spec = fixture::pennies();
  const std::vector<Vector> z{scalar(0.0), scalar(0.0)};
  try {
    isaac_fixed_point(spec, scalar(0.25), z);
    FAIL() << "expected NoPureNash";
  } catch (const NoPureNash& e) {
    ASSERT_EQ(e.x().size(), 1u);
    EXPECT_EQ(e.x()[0], 0.25);
    EXPECT_EQ(e.z().size(), 2u);
  }
}

TEST(Isaac, BestResponseIterationDetectsCycles) {
  IsaacOptions o;
  o.enumeration_cap = 0;
  const std::vector<Vector> z{scalar(0.0), scalar(0.0)};
  EXPECT_THROW(isaac_fixed_point(fixture::pennies(), scalar(0.0), z, o), BestResponseCycle);
}

TEST(Isaac, BestResponseIterationFindsG0Point) {
  IsaacOptions o;
  o.enumeration_cap = 0;
  const std::vector<Vector> z{scalar(0.6), scalar(-1.4)};
  EXPECT_EQ(isaac_fixed_point(fixture::g0(), scalar(0.0), z, o), joint(g0_index(-0.3), g0_index(0.7)));
}

TEST(Isaac, TiesResolveToLexicographicallySmallest) {
  GameSpec::Params p = fixture::g0_params();
  p.costs = {[](const Vector&, std::span<const Control>) { return 0.5; },
             [](const Vector&, std::span<const Control>) { return 0.5; }};
  p.drift = [](std::span<const Control>) { return Vector::Zero(1); };
  const GameSpec spec(p);
  const std::vector<Vector> z{scalar(1.0), scalar(1.0)};
  EXPECT_EQ(isaac_fixed_point(spec, scalar(0.0), z), joint(0, 0));
}

TEST(Isaac, VerifyReportsFullCoverageOnG0) {
  const IsaacReport r = verify_isaacs(fixture::g0(), uniform_isaac_sampler(1, 2, 5.0, 5.0), 1000, 1e-3, 9);
  EXPECT_EQ(r.n_samples, 1000u);
  EXPECT_EQ(r.fraction_with_pure_nash, 1.0);
  // An opponent switching one grid step (0.05) moves H_i by at most |z_i| * 0.05.
  EXPECT_LE(r.max_continuity_jump, 5.0 * 0.05 + 1e-3 * 2.0);
  EXPECT_GT(r.max_continuity_jump, 0.0);
}

TEST(Isaac, VerifyReportsZeroCoverageOnPennies) {
  const IsaacReport r = verify_isaacs(fixture::pennies(), uniform_isaac_sampler(1, 2, 5.0, 5.0), 200, 1e-3, 9);
  EXPECT_EQ(r.fraction_with_pure_nash, 0.0);
}

TEST(Isaac, RepeatedSampleWithZeroDeltaHasNoJump) {
  const IsaacSampler same = [](std::mt19937_64&) { return IsaacSample{scalar(0.4), {scalar(0.7), scalar(-0.2)}}; };
  const IsaacReport r = verify_isaacs(fixture::g0(), same, 50, 0.0, 1);
  EXPECT_EQ(r.max_continuity_jump, 0.0);
}

TEST(FeedbackPolicy, NamesTheFailingNode) {
  const Grid1D grid(-1.0, 1.0, 11, 2);
  const std::vector<std::vector<double>> xi(2, std::vector<double>(11, 0.0));
  try {
    feedback_policy(fixture::pennies(), grid, xi);
    FAIL() << "expected NoPureNash";
  } catch (const NoPureNash& e) {
    EXPECT_NE(std::string(e.what()).find("grid node 0"), std::string::npos);
  }
}

TEST(GameSpecValidation, RejectsDuplicateAndEmptyGrids) {
  ControlGrid dup{0, {scalar(0.0), scalar(0.0)}};
  EXPECT_THROW(dup.validate(), InvalidArgument);
  ControlGrid empty{0, {}};
  EXPECT_THROW(empty.validate(), InvalidArgument);
}

TEST(GameSpecValidation, RejectsUnderstatedCostBound) {
  GameSpec::Params p = fixture::g0_params();
  p.cost_bound = 1.5;
  EXPECT_THROW(GameSpec{p}, AssumptionViolation);
}

TEST(GameSpecValidation, RejectsUnderstatedDriftBound) {
  GameSpec::Params p = fixture::g0_params();
  p.drift_bound = 1.0;
  EXPECT_THROW(GameSpec{p}, AssumptionViolation);
}

TEST(GameSpecValidation, RankRoundTrips) {
  const GameSpec spec = fixture::g0();
  for (std::size_t r = 0; r < spec.product_size(); r += 37) EXPECT_EQ(spec.rank(spec.unrank(r)), r);
  EXPECT_THROW(spec.check_index(joint(41, 0)), InvalidArgument);
}

TEST(Properties, ReturnedPointIsBestResponseForEveryPlayer) {
  const GameSpec coupled = [] {
    GameSpec::Params p = fixture::g0_params();
    p.costs = {[](const Vector& x, std::span<const Control> u) {
                 return u[0][0] * u[0][0] + 0.5 * u[0][0] * u[1][0] + fixture::g(x);
               },
               [](const Vector& x, std::span<const Control> u) {
                 return u[1][0] * u[1][0] + 0.5 * u[0][0] * u[1][0] + fixture::g(x);
               }};
    p.cost_bound = 2.5;
    return GameSpec(p);
  }();
  gen::for_all(101, 300, [&](gen::Source& src, std::size_t) {
    const Vector x = scalar(src.uniform(-4.0, 4.0));
    const std::vector<Vector> z{scalar(src.uniform(-5.0, 5.0)), scalar(src.uniform(-5.0, 5.0))};
    for (const GameSpec* spec : {&coupled}) {
      const JointControl u = isaac_fixed_point(*spec, x, z);
      EXPECT_TRUE(is_pure_nash(*spec, x, z, u));
    }
    const JointControl u0 = isaac_fixed_point(fixture::g0(), x, z);
    EXPECT_TRUE(is_pure_nash(fixture::g0(), x, z, u0));
  });
}

TEST(Properties, G0MatchesClampedAnalyticArgmin) {
  const GameSpec spec = fixture::g0();
  gen::for_all(103, 300, [&](gen::Source& src, std::size_t) {
    const double z1 = src.uniform(-5.0, 5.0), z2 = src.uniform(-5.0, 5.0);
    // Skip costates whose analytic argmin sits on a midpoint between grid points.
    for (double z : {z1, z2}) {
      const double s = (std::clamp(-z / 2.0, -1.0, 1.0) + 1.0) / 0.05;
      if (std::abs(s - std::floor(s) - 0.5) < 1e-6) return;
    }
    const std::vector<Vector> z{scalar(z1), scalar(z2)};
    EXPECT_EQ(isaac_fixed_point(spec, scalar(0.0), z), joint(g0_index(-z1 / 2.0), g0_index(-z2 / 2.0)));
  });
}

TEST(Properties, HamiltonianIsAffineInCostate) {
  const GameSpec spec = fixture::g0();
  gen::for_all(107, 500, [&](gen::Source& src, std::size_t) {
    const Vector x = scalar(src.uniform(-3.0, 3.0));
    const JointControl u = joint(src.index(41), src.index(41));
    const double z = src.uniform(-5.0, 5.0), d = src.uniform(-5.0, 5.0);
    const double r = spec.drift(u)[0];
    const double lhs = hamiltonian(spec, 0, x, scalar(z + d), u) - hamiltonian(spec, 0, x, scalar(z), u);
    EXPECT_NEAR(lhs, d * r, 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(z * r) + std::abs(d * r) + 2.0));
  });
}

TEST(Properties, GridOrderDoesNotChangeTheChosenControlValue) {
  gen::for_all(109, 50, [](gen::Source& src, std::size_t) {
    GameSpec::Params p = fixture::g0_params();
    std::vector<std::size_t> perm(41);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), src.engine());
    std::vector<Control> shuffled;
    for (std::size_t k : perm) shuffled.push_back(p.grids[0].points[k]);
    const GameSpec original(p);
    p.grids[0].points = shuffled;
    const GameSpec permuted(p);
    const std::vector<Vector> z{scalar(src.uniform(-5.0, 5.0)), scalar(src.uniform(-5.0, 5.0))};
    const Vector x = scalar(0.0);
    const JointControl a = isaac_fixed_point(original, x, z);
    const JointControl b = isaac_fixed_point(permuted, x, z);
    EXPECT_EQ(original.grid(0).points[a.index[0]][0], permuted.grid(0).points[b.index[0]][0]);
    EXPECT_EQ(a.index[1], b.index[1]);
  });
}
