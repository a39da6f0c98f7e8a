#pragma once

#include <cmath>
#include <span>

#include "egame/game.hpp"
#include "egame/grid.hpp"
#include "egame/sde.hpp"

namespace fixture {

inline egame::SdeModel m0(double x0 = 0.0) {
  return egame::SdeModel::ornstein_uhlenbeck(1.0, std::sqrt(2.0), x0);
}

inline egame::Grid1D standard_grid() { return egame::Grid1D(-6.0, 6.0, 601, 5); }

inline double g(const egame::Vector& x) { return x[0] * x[0] / (1.0 + x[0] * x[0]); }

/// Two players, R = u + v, L_i = u_i^2 + x^2/(1+x^2), 41 controls on [-1, 1].
inline egame::GameSpec::Params g0_params() {
  using egame::Control;
  egame::GameSpec::Params p;
  p.grids = {egame::ControlGrid::uniform(0, -1, 1, 41), egame::ControlGrid::uniform(1, -1, 1, 41)};
  p.drift = [](std::span<const Control> u) { return egame::Vector::Constant(1, u[0][0] + u[1][0]); };
  p.drift_bound = 2.0;
  p.costs = {[](const egame::Vector& x, std::span<const Control> u) { return u[0][0] * u[0][0] + g(x); },
             [](const egame::Vector& x, std::span<const Control> u) { return u[1][0] * u[1][0] + g(x); }};
  p.cost_bound = 2.0;
  p.cost_lipschitz = 0.65;
  return p;
}

inline egame::GameSpec g0() { return egame::GameSpec(g0_params()); }

/// Controls on {-1, 1}, R = 0, L_1 = -u v, L_2 = u v: no pure Nash point.
inline egame::GameSpec pennies() {
  using egame::Control;
  egame::GameSpec::Params p;
  p.grids = {egame::ControlGrid::uniform(0, -1, 1, 2), egame::ControlGrid::uniform(1, -1, 1, 2)};
  p.drift = [](std::span<const Control>) { return egame::Vector::Zero(1); };
  p.costs = {[](const egame::Vector&, std::span<const Control> u) { return -u[0][0] * u[1][0]; },
             [](const egame::Vector&, std::span<const Control> u) { return u[0][0] * u[1][0]; }};
  p.cost_bound = 1.0;
  return egame::GameSpec(p);
}

}  // namespace fixture
