#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace egame {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model or game failed one of its sampled structural checks.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class SimulationDiverged : public Error {
 public:
  SimulationDiverged(std::size_t step, std::size_t path)
      : Error("simulation diverged at step " + std::to_string(step) +
              " of path " + std::to_string(path)),
        step_(step),
        path_(path) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t path() const noexcept { return path_; }

 private:
  std::size_t step_;
  std::size_t path_;
};

/// Isaac's condition has no pure solution on the control grid at (x, z).
class NoPureNash : public Error {
 public:
  NoPureNash(std::vector<double> x, std::vector<std::vector<double>> z,
             std::string where = {});

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<std::vector<double>>& z() const noexcept { return z_; }

 private:
  std::vector<double> x_;
  std::vector<std::vector<double>> z_;
};

class BestResponseCycle : public Error {
 public:
  using Error::Error;
};

class CflViolation : public Error {
 public:
  CflViolation(double dt, double bound)
      : Error("pseudo time step " + std::to_string(dt) +
              " exceeds the stability bound " + std::to_string(bound)),
        dt_(dt),
        bound_(bound) {}

  double dt() const noexcept { return dt_; }
  double bound() const noexcept { return bound_; }

 private:
  double dt_;
  double bound_;
};

/// The grid solver ran out of sweeps; carries the last diagnostics.
class MaxSweepsExceeded : public Error {
 public:
  MaxSweepsExceeded(std::size_t sweeps, double residual, double lambda)
      : Error("solver did not reach tolerance after " +
              std::to_string(sweeps) + " sweeps (residual " +
              std::to_string(residual) + ")"),
        sweeps_(sweeps),
        residual_(residual),
        lambda_(lambda) {}

  std::size_t sweeps() const noexcept { return sweeps_; }
  double residual() const noexcept { return residual_; }
  double lambda() const noexcept { return lambda_; }

 private:
  std::size_t sweeps_;
  double residual_;
  double lambda_;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class GrowthViolation : public Error {
 public:
  using Error::Error;
};

class InsufficientHorizon : public Error {
 public:
  using Error::Error;
};

/// Configuration file is malformed; the message names the offending field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace egame
