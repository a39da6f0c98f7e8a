#include "egame/sde.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <iomanip>
#include <limits>
#include <sstream>

namespace egame {

bool AssumptionReport::ok(double tolerance) const {
  return dissipativity_excess <= tolerance && f_bound_excess <= tolerance &&
         f_lipschitz_excess <= tolerance && sigma_low_excess <= tolerance &&
         sigma_high_excess <= tolerance;
}

AssumptionReport check_assumptions(const SdeModel::Params& p,
                                   std::size_t samples, std::uint64_t seed) {
  const auto dim = static_cast<std::size_t>(p.A.rows());
  AssumptionReport report;
  report.samples = samples;
  report.dissipativity_excess = -std::numeric_limits<double>::infinity();
  report.f_bound_excess = -std::numeric_limits<double>::infinity();
  report.f_lipschitz_excess = -std::numeric_limits<double>::infinity();
  report.sigma_low_excess = -std::numeric_limits<double>::infinity();
  report.sigma_high_excess = -std::numeric_limits<double>::infinity();

  auto rng = keyed_stream(seed, 0);
  std::uniform_real_distribution<double> box(-p.check_radius, p.check_radius);
  Vector x(dim), y(dim), fx(dim), fy(dim);
  Matrix s(dim, dim);
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = box(rng);
      y[d] = box(rng);
    }
    const double xx = x.squaredNorm();
    if (xx > 0.0) {
      const double q = (x.dot(p.A * x) + p.mu * xx) / xx;
      report.dissipativity_excess = std::max(report.dissipativity_excess, q);
    }
    p.F(x, fx);
    p.F(y, fy);
    report.f_bound_excess = std::max(report.f_bound_excess, fx.norm() - p.F_max);
    report.f_lipschitz_excess =
        std::max(report.f_lipschitz_excess,
                 (fx - fy).norm() - p.F_lipschitz * (x - y).norm());
    p.sigma(x, s);
    // Operator norms: |s| is the largest singular value, |s^-1| the reciprocal of the smallest.
    const Vector sv = Eigen::JacobiSVD<Matrix>(s).singularValues();
    const double spread = sv.maxCoeff() + 1.0 / sv.minCoeff();
    report.sigma_low_excess = std::max(report.sigma_low_excess, p.sigma_lo - spread);
    report.sigma_high_excess = std::max(report.sigma_high_excess, spread - p.sigma_hi);
  }
  return report;
}

SdeModel::SdeModel(Params params) : p_(std::move(params)) {
  if (p_.A.rows() == 0 || p_.A.rows() != p_.A.cols())
    throw InvalidArgument("A must be a non-empty square matrix");
  if (p_.x0.size() != p_.A.rows())
    throw InvalidArgument("x0 dimension does not match A");
  if (!(p_.mu > 0.0)) throw InvalidArgument("dissipativity rate mu must be positive");
  if (!p_.F || !p_.sigma) throw InvalidArgument("F and sigma must be set");
  report_ = check_assumptions(p_, p_.check_samples, p_.check_seed);
  if (!report_.ok()) {
    std::ostringstream msg;
    msg << "model assumptions violated on samples:";
    if (report_.dissipativity_excess > 1e-9) msg << " <Ax,x> <= -mu|x|^2;";
    if (report_.f_bound_excess > 1e-9) msg << " |F| <= F_max;";
    if (report_.f_lipschitz_excess > 1e-9) msg << " F Lipschitz;";
    if (report_.sigma_low_excess > 1e-9) msg << " sigma_lo bound;";
    if (report_.sigma_high_excess > 1e-9) msg << " sigma_hi bound;";
    throw AssumptionViolation(msg.str());
  }
}

SdeModel SdeModel::ornstein_uhlenbeck(double rate, double sigma, double x0) {
  Params p;
  p.A = Matrix::Constant(1, 1, -rate);
  p.mu = rate;
  p.F = [](const Vector&, Vector& out) { out.setZero(); };
  p.F_max = 0.0;
  p.F_lipschitz = 0.0;
  p.sigma = [sigma](const Vector&, Matrix& out) { out(0, 0) = sigma; };
  const double spread = std::abs(sigma) + 1.0 / std::abs(sigma);
  p.sigma_lo = spread;
  p.sigma_hi = spread;
  p.x0 = Vector::Constant(1, x0);
  p.semigroup_M = 1.0;
  return SdeModel(std::move(p));
}

double SdeModel::drift_1d(double x) const {
  if (dim() != 1) throw InvalidArgument("drift_1d requires a one-dimensional model");
  Vector v = Vector::Constant(1, x);
  Vector f(1);
  p_.F(v, f);
  return p_.A(0, 0) * x + f[0];
}

double SdeModel::sigma_1d(double x) const {
  if (dim() != 1) throw InvalidArgument("sigma_1d requires a one-dimensional model");
  Vector v = Vector::Constant(1, x);
  Matrix s(1, 1);
  p_.sigma(v, s);
  return s(0, 0);
}

SdeModel SdeModel::with_x0(Vector x0) const {
  Params p = p_;
  p.x0 = std::move(x0);
  return SdeModel(std::move(p));
}

DriftShift::DriftShift(VectorField shift, double bound)
    : shift_(std::move(shift)), bound_(bound) {
  if (!shift_) throw InvalidArgument("drift shift must be callable");
  if (!(bound_ >= 0.0)) throw InvalidArgument("drift shift bound must be non-negative");
}

DriftShift DriftShift::constant(Vector r) {
  const double bound = r.norm();
  return DriftShift([r = std::move(r)](const Vector&, Vector& out) { out = r; }, bound);
}

double DriftShift::sampled_excess(std::size_t dim, std::size_t samples,
                                  double radius, std::uint64_t seed) const {
  auto rng = keyed_stream(seed, 1);
  std::uniform_real_distribution<double> box(-radius, radius);
  Vector x(dim), r(dim);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < samples; ++k) {
    for (std::size_t d = 0; d < dim; ++d) x[d] = box(rng);
    shift_(x, r);
    worst = std::max(worst, r.norm() - bound_);
  }
  return worst;
}

void Path::write_csv(std::ostream& os) const {
  os << "t";
  const auto dim = states.empty() ? 0 : states.front().size();
  for (Eigen::Index d = 0; d < dim; ++d) os << ",x_" << (d + 1);
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << times[k];
    for (Eigen::Index d = 0; d < dim; ++d) os << ',' << states[k][d];
    os << '\n';
  }
}

std::size_t step_count(double T, double h) {
  if (!(h > 0.0)) throw InvalidArgument("step h must be positive");
  if (!(T >= 0.0)) throw InvalidArgument("horizon T must be non-negative");
  const double ratio = T / h;
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) <= 1e-9 * std::max(1.0, ratio))
    return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(ratio));
}

EulerStepper::EulerStepper(const SdeModel& model, const DriftShift* shift, double h)
    : model_(model),
      shift_(shift),
      h_(h),
      drift_(model.dim()),
      f_(model.dim()),
      r_(Vector::Zero(model.dim())),
      noise_(model.dim()),
      sig_(model.dim(), model.dim()) {}

void EulerStepper::step(Vector& x, const Vector& dw) {
  drift_.noalias() = model_.A() * x;
  model_.eval_F(x, f_);
  drift_ += f_;
  model_.eval_sigma(x, sig_);
  if (shift_ != nullptr) {
    (*shift_)(x, r_);
    drift_.noalias() += sig_ * r_;
  }
  noise_.noalias() = sig_ * dw;
  x += h_ * drift_ + noise_;
}

void check_step_size(const SdeModel& model, double T, double h) {
  if (!(h > 0.0)) throw InvalidArgument("step h must be positive");
  if (T > 0.0 && h > T) throw InvalidArgument("step h must not exceed horizon T");
  if (!(1.0 - h * model.mu() > 0.0))
    throw InvalidArgument("step h too large: need 1 - h*mu > 0");
}

Path simulate(const SdeModel& model, const DriftShift* shift, double T,
              double h, std::uint64_t seed) {
  check_step_size(model, T, h);
  Path path;
  const std::size_t n = step_count(T, h);
  path.times.reserve(n + 1);
  path.states.reserve(n + 1);
  integrate_path(model, shift, T, h, seed, 0,
                 [&](std::size_t, double t, const Vector& x, const Vector&) {
                   path.times.push_back(t);
                   path.states.push_back(x);
                 });
  return path;
}

MomentReport moment_bound_check(const SdeModel& model, double T, double h,
                                std::size_t n_paths, std::uint64_t seed,
                                unsigned threads) {
  if (!(T >= 0.0)) throw InvalidArgument("moment check needs T >= 0");
  if (n_paths == 0) throw InvalidArgument("moment check needs at least one path");
  MomentReport report;
  const double x0_sq = model.x0().squaredNorm();
  if (T == 0.0) {
    report.sup_second_moment = x0_sq;
    report.doubled_horizon_moment = x0_sq;
    report.expected_path_sup = x0_sq;
    report.bound_constant = x0_sq / (1.0 + x0_sq);
    return report;
  }
  check_step_size(model, 2.0 * T, h);
  const std::size_t n_long = step_count(2.0 * T, h);
  const std::size_t n_short = step_count(T, h);

  // Per path: squared norm along the time grid and the running sup up to T.
  std::vector<std::vector<double>> sq(n_paths);
  std::vector<double> path_sup(n_paths, 0.0);
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        auto& row = sq[p];
        row.assign(n_long + 1, 0.0);
        double sup = 0.0;
        integrate_path(model, nullptr, 2.0 * T, h, seed, p,
                       [&](std::size_t k, double, const Vector& x, const Vector&) {
                         row[k] = x.squaredNorm();
                         if (k <= n_short) sup = std::max(sup, row[k]);
                       });
        path_sup[p] = sup;
      },
      threads);

  double sup_short = 0.0;
  double sup_long = 0.0;
  for (std::size_t k = 0; k <= n_long; ++k) {
    RunningMoments m;
    for (std::size_t p = 0; p < n_paths; ++p) m.add(sq[p][k]);
    if (k <= n_short) sup_short = std::max(sup_short, m.mean());
    sup_long = std::max(sup_long, m.mean());
  }
  RunningMoments sup_mean;
  for (double s : path_sup) sup_mean.add(s);

  report.sup_second_moment = sup_short;
  report.doubled_horizon_moment = sup_long;
  report.expected_path_sup = sup_mean.mean();
  report.bound_constant = sup_short / (1.0 + x0_sq);
  report.horizon_stable =
      std::abs(sup_long - sup_short) <= 0.1 * std::max(sup_long, sup_short);
  return report;
}

PayoffEstimate invariant_average(const SdeModel& model, const DriftShift* shift,
                                 const std::function<double(const Vector&)>& g,
                                 double T, double burn_in, double h,
                                 std::size_t n_paths, std::uint64_t seed,
                                 unsigned threads) {
  if (!(burn_in < T)) throw InvalidArgument("burn-in must be shorter than the horizon");
  if (!(burn_in >= 0.0)) throw InvalidArgument("burn-in must be non-negative");
  if (n_paths == 0) throw InvalidArgument("need at least one path");
  check_step_size(model, T, h);

  std::vector<double> averages(n_paths, 0.0);
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        RunningMoments acc;
        integrate_path(model, shift, T, h, seed, p,
                       [&](std::size_t, double t, const Vector& x, const Vector&) {
                         if (t >= burn_in) acc.add(g(x));
                       });
        averages[p] = acc.mean();
      },
      threads);

  RunningMoments across;
  for (double a : averages) across.add(a);
  PayoffEstimate est;
  est.value = across.mean();
  est.std_error = std::sqrt(across.sample_variance() / static_cast<double>(n_paths));
  est.horizon = T;
  est.burn_in = burn_in;
  est.n_paths = n_paths;
  est.kind = PayoffKind::ergodic();
  return est;
}

}  // namespace egame
