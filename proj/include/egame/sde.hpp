#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <random>
#include <vector>

#include "egame/errors.hpp"
#include "egame/estimate.hpp"
#include "egame/parallel.hpp"

namespace egame {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// In-place vector field x -> out; `out` is pre-sized by the caller.
using VectorField = std::function<void(const Vector& x, Vector& out)>;
/// In-place matrix field x -> out; `out` is pre-sized by the caller.
using MatrixField = std::function<void(const Vector& x, Matrix& out)>;

/// Worst observed violation of each sampled structural condition. A
/// non-positive margin means the condition held on every sample.
struct AssumptionReport {
  std::size_t samples = 0;
  double dissipativity_excess = 0.0;  ///< max <Ax,x> + mu|x|^2
  double f_bound_excess = 0.0;        ///< max |F(x)| - F_max
  double f_lipschitz_excess = 0.0;    ///< max |F(x)-F(y)| - L_F|x-y|
  double sigma_low_excess = 0.0;      ///< max sigma_lo - (|s| + |s^-1|)
  double sigma_high_excess = 0.0;     ///< max (|s| + |s^-1|) - sigma_hi

  bool ok(double tolerance = 1e-9) const;
};

/// Dissipative forward diffusion dX = (AX + F(X))dt + sigma(X)dW, X_0 = x0.
///
/// The structural conditions (dissipativity of A, bounded Lipschitz F,
/// two-sided bound on |sigma| + |sigma^-1|) are checked on random samples
/// at construction; a failure throws AssumptionViolation.
class SdeModel {
 public:
  struct Params {
    Matrix A;
    double mu = 1.0;
    VectorField F;
    double F_max = 0.0;
    double F_lipschitz = 0.0;
    MatrixField sigma;
    double sigma_lo = 0.0;
    double sigma_hi = 0.0;
    Vector x0;
    /// Semigroup constant of |e^{tA}| <= M e^{-mu t}; recorded only.
    std::optional<double> semigroup_M;
    std::size_t check_samples = 10000;
    double check_radius = 10.0;
    std::uint64_t check_seed = 0x5eed;
  };

  explicit SdeModel(Params params);

  /// 1-D Ornstein-Uhlenbeck model: A = -rate, F = 0, constant sigma.
  static SdeModel ornstein_uhlenbeck(double rate, double sigma, double x0);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(p_.A.rows()); }
  const Matrix& A() const noexcept { return p_.A; }
  double mu() const noexcept { return p_.mu; }
  double F_max() const noexcept { return p_.F_max; }
  double F_lipschitz() const noexcept { return p_.F_lipschitz; }
  double sigma_lo() const noexcept { return p_.sigma_lo; }
  double sigma_hi() const noexcept { return p_.sigma_hi; }
  const Vector& x0() const noexcept { return p_.x0; }
  std::optional<double> semigroup_M() const noexcept { return p_.semigroup_M; }
  const AssumptionReport& assumption_report() const noexcept { return report_; }

  void eval_F(const Vector& x, Vector& out) const { p_.F(x, out); }
  void eval_sigma(const Vector& x, Matrix& out) const { p_.sigma(x, out); }

  /// Scalar helpers for one-dimensional models (grid solvers).
  double drift_1d(double x) const;
  double sigma_1d(double x) const;

  /// Returns a copy with a different initial state.
  SdeModel with_x0(Vector x0) const;

 private:
  Params p_;
  AssumptionReport report_;
};

/// Samples the structural conditions of a model's coefficients.
AssumptionReport check_assumptions(const SdeModel::Params& params,
                                   std::size_t samples, std::uint64_t seed);

/// Bounded feedback drift r = shift(x); simulated drift gains sigma(x) r.
/// This realizes the Girsanov change of measure as a drift change.
class DriftShift {
 public:
  DriftShift(VectorField shift, double bound);

  static DriftShift constant(Vector r);

  void operator()(const Vector& x, Vector& out) const { shift_(x, out); }
  double bound() const noexcept { return bound_; }

  /// Largest sampled |shift(x)| - bound over a box of the given radius.
  double sampled_excess(std::size_t dim, std::size_t samples, double radius,
                        std::uint64_t seed) const;

 private:
  VectorField shift_;
  double bound_;
};

struct Path {
  std::vector<double> times;
  std::vector<Vector> states;

  void write_csv(std::ostream& os) const;
};

/// Number of Euler steps for horizon T and step h, i.e. ceil(T/h).
std::size_t step_count(double T, double h);

/// One Euler-Maruyama increment with reusable work buffers.
class EulerStepper {
 public:
  EulerStepper(const SdeModel& model, const DriftShift* shift, double h);

  /// x <- x + (Ax + F(x) + sigma(x) r(x)) h + sigma(x) dw, dw ~ N(0, h I).
  void step(Vector& x, const Vector& dw);

  /// Shift evaluated at the state passed to the last step() call.
  const Vector& last_shift() const noexcept { return r_; }
  const Matrix& last_sigma() const noexcept { return sig_; }

 private:
  const SdeModel& model_;
  const DriftShift* shift_;
  double h_;
  Vector drift_, f_, r_, noise_;
  Matrix sig_;
};

/// Simulates one path and calls visit(k, t_k, x_k, dw_k) for k = 0..n where
/// dw_k is the Brownian increment about to be applied (zero at k = n).
/// The random stream is keyed by (seed, path_index).
template <class Visitor>
void integrate_path(const SdeModel& model, const DriftShift* shift, double T,
                    double h, std::uint64_t seed, std::uint64_t path_index,
                    Visitor&& visit) {
  const std::size_t n = step_count(T, h);
  const std::size_t dim = model.dim();
  auto rng = keyed_stream(seed, path_index);
  std::normal_distribution<double> normal(0.0, 1.0);
  EulerStepper stepper(model, shift, h);
  Vector x = model.x0();
  Vector dw(dim);
  const double sqrt_h = std::sqrt(h);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t d = 0; d < dim; ++d) dw[d] = sqrt_h * normal(rng);
    visit(k, static_cast<double>(k) * h, x, dw);
    stepper.step(x, dw);
    if (!x.allFinite()) throw SimulationDiverged(k + 1, path_index);
  }
  dw.setZero();
  visit(n, static_cast<double>(n) * h, x, dw);
}

/// Throws InvalidArgument unless 0 < h, h <= T (for T > 0) and 1 - h mu > 0.
void check_step_size(const SdeModel& model, double T, double h);

/// Euler-Maruyama path on t_k = k h, k = 0..ceil(T/h). Deterministic in
/// (model, shift, T, h, seed).
Path simulate(const SdeModel& model, const DriftShift* shift, double T,
              double h, std::uint64_t seed);

struct MomentReport {
  double sup_second_moment = 0.0;    ///< sup_{t<=T} E|X_t|^2
  double bound_constant = 0.0;       ///< sup_second_moment / (1 + |x0|^2)
  double doubled_horizon_moment = 0.0;  ///< same quantity on [0, 2T]
  double expected_path_sup = 0.0;    ///< E sup_{t<=T} |X_t|^2
  bool horizon_stable = true;        ///< T vs 2T agree within 10%
};

/// Monte Carlo check that second moments stay bounded uniformly in T.
MomentReport moment_bound_check(const SdeModel& model, double T, double h,
                                std::size_t n_paths, std::uint64_t seed,
                                unsigned threads = 0);

/// Time-and-path average of g(X_t) over t in [burn_in, T]; the standard
/// error comes from the spread of per-path time averages.
PayoffEstimate invariant_average(const SdeModel& model, const DriftShift* shift,
                                 const std::function<double(const Vector&)>& g,
                                 double T, double burn_in, double h,
                                 std::size_t n_paths, std::uint64_t seed,
                                 unsigned threads = 0);

}  // namespace egame
