#include "egame/config.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <numeric>
#include <sstream>

#include "egame/errors.hpp"

namespace egame {

using nlohmann::json;

namespace {

/// Cursor into the document that remembers its dotted path for messages.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(name(key) + ": " + what);
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return node_.contains(key); }
  const json& raw(const std::string& key) const {
    if (!has(key)) fail(key, "missing required field");
    return node_.at(key);
  }

  Section child(const std::string& key) const { return Section(raw(key), name(key)); }

  double number(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "expected a finite number");
    return d;
  }
  double number(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }
  double positive(const std::string& key) const {
    const double d = number(key);
    if (!(d > 0.0)) fail(key, "must be positive");
    return d;
  }
  double positive(const std::string& key, double fallback) const {
    return has(key) ? positive(key) : fallback;
  }
  std::size_t count(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "expected a non-negative integer");
    return v.get<std::size_t>();
  }
  std::size_t count(const std::string& key, std::size_t fallback) const {
    return has(key) ? count(key) : fallback;
  }
  std::string text(const std::string& key) const {
    const json& v = raw(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }
  std::vector<double> numbers(const std::string& key) const {
    const json& v = raw(key);
    if (v.is_number()) return {number(key)};
    if (!v.is_array()) fail(key, "expected a number or an array of numbers");
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) fail(key, "element " + std::to_string(k) + " is not a number");
      out.push_back(v[k].get<double>());
    }
    return out;
  }

  void expect_keys(std::initializer_list<const char*> allowed) const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const bool known = std::any_of(allowed.begin(), allowed.end(),
                                     [&](const char* a) { return it.key() == a; });
      if (!known) fail(it.key(), "unknown field");
    }
  }

  const json& node() const { return node_; }
  const std::string& path() const { return path_; }

 private:
  const json& node_;
  std::string path_;
};

/// Saturating state cost g(x) = |x|^2 / (1 + |x|^2); Lipschitz constant 3 sqrt(3) / 8.
double saturating(const Vector& x) {
  const double r2 = x.squaredNorm();
  return r2 / (1.0 + r2);
}
const double kSaturatingLipschitz = 3.0 * std::sqrt(3.0) / 8.0;

// ---------------------------------------------------------------- model

void parse_model(const Section& s, SdeModel::Params& p) {
  s.expect_keys({"A", "mu", "F", "sigma", "x0", "semigroup_M", "check_samples", "check_radius"});
  const json& a = s.raw("A");
  if (a.is_number()) {
    p.A = Matrix::Constant(1, 1, a.get<double>());
  } else if (a.is_array() && !a.empty()) {
    const std::size_t n = a.size();
    p.A.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t r = 0; r < n; ++r) {
      if (!a[r].is_array() || a[r].size() != n) s.fail("A", "expected a square matrix");
      for (std::size_t c = 0; c < n; ++c) {
        if (!a[r][c].is_number()) s.fail("A", "matrix entries must be numbers");
        p.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = a[r][c].get<double>();
      }
    }
  } else {
    s.fail("A", "expected a number or a square matrix");
  }
  const std::size_t n = static_cast<std::size_t>(p.A.rows());

  if (s.has("mu")) {
    p.mu = s.positive("mu");
  } else {
    const Matrix sym = 0.5 * (p.A + p.A.transpose());
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(sym).eigenvalues().maxCoeff();
    if (!(top < 0.0)) s.fail("A", "symmetric part must be negative definite");
    p.mu = -top;
  }

  p.F = [](const Vector&, Vector& out) { out.setZero(); };
  p.F_max = 0.0;
  p.F_lipschitz = 0.0;
  if (s.has("F")) {
    const Section f = s.child("F");
    const std::string name = f.text("name");
    if (name == "zero") {
      f.expect_keys({"name"});
    } else if (name == "tanh") {
      f.expect_keys({"name", "amplitude", "scale"});
      const double amp = f.number("amplitude");
      const double scale = f.number("scale", 1.0);
      p.F = [amp, scale](const Vector& x, Vector& out) {
        for (Eigen::Index k = 0; k < x.size(); ++k) out[k] = amp * std::tanh(scale * x[k]);
      };
      p.F_max = std::abs(amp) * std::sqrt(static_cast<double>(n));
      p.F_lipschitz = std::abs(amp * scale);
    } else {
      f.fail("name", "unknown F '" + name + "' (expected zero or tanh)");
    }
  }

  double s_lo = 0.0, s_hi = 0.0;
  const json& sig = s.raw("sigma");
  if (sig.is_number()) {
    s_lo = s_hi = s.positive("sigma");
    const double value = s_lo;
    p.sigma = [value](const Vector&, Matrix& out) { out.setIdentity(); out *= value; };
  } else {
    const Section g = s.child("sigma");
    const std::string name = g.text("name");
    if (name == "constant") {
      g.expect_keys({"name", "value"});
      s_lo = s_hi = g.positive("value");
      const double value = s_lo;
      p.sigma = [value](const Vector&, Matrix& out) { out.setIdentity(); out *= value; };
    } else if (name == "modulated") {
      g.expect_keys({"name", "base", "amplitude", "frequency"});
      const double base = g.positive("base");
      const double amp = std::abs(g.number("amplitude"));
      const double freq = g.number("frequency", 1.0);
      if (!(amp < base)) g.fail("amplitude", "must be smaller than base");
      s_lo = base - amp;
      s_hi = base + amp;
      p.sigma = [base, amp, freq](const Vector& x, Matrix& out) {
        out.setZero();
        for (Eigen::Index k = 0; k < x.size(); ++k) out(k, k) = base + amp * std::sin(freq * x[k]);
      };
    } else {
      g.fail("name", "unknown sigma '" + name + "' (expected constant or modulated)");
    }
  }
  // |sigma| + |sigma^-1| = max s + 1 / min s for diagonal sigma with entries in [s_lo, s_hi].
  p.sigma_hi = s_hi + 1.0 / s_lo;
  p.sigma_lo = (s_lo <= 1.0 && 1.0 <= s_hi) ? 2.0 : std::min(s_lo + 1.0 / s_lo, s_hi + 1.0 / s_hi);

  p.x0 = Vector::Zero(static_cast<Eigen::Index>(n));
  if (s.has("x0")) {
    const std::vector<double> x0 = s.numbers("x0");
    if (x0.size() == 1) {
      p.x0.setConstant(x0[0]);
    } else if (x0.size() == n) {
      for (std::size_t k = 0; k < n; ++k) p.x0[static_cast<Eigen::Index>(k)] = x0[k];
    } else {
      s.fail("x0", "length does not match the dimension of A");
    }
  }
  if (s.has("semigroup_M")) p.semigroup_M = s.positive("semigroup_M");
  p.check_samples = s.count("check_samples", p.check_samples);
  p.check_radius = s.positive("check_radius", p.check_radius);
}

// ---------------------------------------------------------------- game

json preset(const std::string& name, const Section& s) {
  if (name == "quadratic_decoupled")
    return json{{"n_players", 2},
                {"controls", {{"lo", -1.0}, {"hi", 1.0}, {"count", 41}}},
                {"drift", {{"name", "sum"}}},
                {"costs", {{"name", "quadratic_own"}}}};
  if (name == "coupled_cross_cost")
    return json{{"n_players", 2},
                {"controls", {{"lo", -1.0}, {"hi", 1.0}, {"count", 41}}},
                {"drift", {{"name", "sum"}}},
                {"costs", {{"name", "cross"}, {"cross", 0.5}}}};
  if (name == "three_player")
    return json{{"n_players", 3},
                {"controls", {{"lo", -1.0}, {"hi", 1.0}, {"count", 21}}},
                {"drift", {{"name", "sum"}}},
                {"costs", json::array({{{"name", "quadratic_own"}},
                                       {{"name", "quadratic_own"}, {"weight", 2.0}},
                                       {{"name", "quadratic_own"}, {"state_weight", 0.5}}})}};
  s.fail("preset", "unknown preset '" + name + "'");
}

struct CostEntry {
  CostFunction f;
  double bound = 0.0;
  double lipschitz = 0.0;
};

double max_abs(const ControlGrid& g) {
  double m = 0.0;
  for (const Control& c : g.points) m = std::max(m, c.cwiseAbs().maxCoeff());
  return m;
}

CostEntry parse_cost(const Section& c, std::size_t i, const std::vector<ControlGrid>& grids) {
  const std::string name = c.text("name");
  const double offset = c.number("offset", 0.0);
  const std::size_t n = grids.size();
  CostEntry e;
  if (name == "quadratic_own") {
    c.expect_keys({"name", "weight", "state_weight", "offset"});
    const double w = c.number("weight", 1.0);
    const double s = c.number("state_weight", 1.0);
    e.f = [i, w, s, offset](const Vector& x, std::span<const Control> u) {
      return w * u[i][0] * u[i][0] + s * saturating(x) + offset;
    };
    const double ui = max_abs(grids[i]);
    e.bound = std::abs(w) * ui * ui + std::abs(s) + std::abs(offset);
    e.lipschitz = std::abs(s) * kSaturatingLipschitz;
  } else if (name == "cross") {
    c.expect_keys({"name", "weight", "cross", "state_weight", "offset"});
    const double w = c.number("weight", 1.0);
    const double k = c.number("cross");
    const double s = c.number("state_weight", 1.0);
    e.f = [i, n, w, k, s, offset](const Vector& x, std::span<const Control> u) {
      double others = 0.0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others += u[j][0];
      return w * u[i][0] * u[i][0] + k * u[i][0] * others + s * saturating(x) + offset;
    };
    const double ui = max_abs(grids[i]);
    double others = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) others += max_abs(grids[j]);
    e.bound = std::abs(w) * ui * ui + std::abs(k) * ui * others + std::abs(s) + std::abs(offset);
    e.lipschitz = std::abs(s) * kSaturatingLipschitz;
  } else if (name == "constant") {
    c.expect_keys({"name", "value", "offset"});
    const double v = c.number("value") + offset;
    e.f = [v](const Vector&, std::span<const Control>) { return v; };
    e.bound = std::abs(v);
  } else if (name == "state") {
    c.expect_keys({"name", "weight", "offset"});
    const double s = c.number("weight", 1.0);
    e.f = [s, offset](const Vector& x, std::span<const Control>) { return s * saturating(x) + offset; };
    e.bound = std::abs(s) + std::abs(offset);
    e.lipschitz = std::abs(s) * kSaturatingLipschitz;
  } else if (name == "pennies") {
    c.expect_keys({"name", "scale", "sign", "offset"});
    if (n < 2) c.fail("name", "pennies needs at least two players");
    const double a = c.number("scale", 1.0) * (c.number("sign", 1.0) < 0.0 ? -1.0 : 1.0);
    e.f = [a, offset](const Vector&, std::span<const Control> u) {
      return a * u[0][0] * u[1][0] + offset;
    };
    e.bound = std::abs(a) * max_abs(grids[0]) * max_abs(grids[1]) + std::abs(offset);
  } else {
    c.fail("name", "unknown cost '" + name +
                       "' (expected quadratic_own, cross, constant, state or pennies)");
  }
  return e;
}

GameSpec::Params parse_game(const json& raw, std::size_t state_dim) {
  json merged = raw;
  {
    const Section s(raw, "game");
    if (s.has("preset")) {
      merged = preset(s.text("preset"), s);
      json overrides = raw;
      overrides.erase("preset");
      merged.merge_patch(overrides);
    }
  }
  const Section s(merged, "game");
  s.expect_keys({"n_players", "controls", "drift", "costs", "drift_bound", "cost_bound",
                 "cost_lipschitz", "table_cap", "check_samples"});
  GameSpec::Params p;
  p.state_dim = state_dim;
  const std::size_t n = s.count("n_players");
  if (n == 0) s.fail("n_players", "must be at least 1");

  const json& controls = s.raw("controls");
  if (controls.is_array() && controls.size() != n)
    s.fail("controls", "expected one entry per player or a single shared entry");
  for (std::size_t i = 0; i < n; ++i) {
    const bool shared = !controls.is_array();
    const Section g(shared ? controls : controls[i],
                    shared ? s.name("controls") : s.name("controls") + "[" + std::to_string(i) + "]");
    g.expect_keys({"lo", "hi", "count"});
    const double lo = g.number("lo"), hi = g.number("hi");
    const std::size_t count = g.count("count");
    if (count == 0) g.fail("count", "must be at least 1");
    if (count > 1 && !(lo < hi)) g.fail("hi", "must exceed lo");
    p.grids.push_back(ControlGrid::uniform(i, lo, hi, count));
  }

  const Section d = s.child("drift");
  const std::string drift = d.text("name");
  if (drift == "sum") {
    d.expect_keys({"name", "weights"});
    std::vector<double> w(n, 1.0);
    if (d.has("weights")) {
      w = d.numbers("weights");
      if (w.size() != n) d.fail("weights", "expected one weight per player");
    }
    p.drift = [w](std::span<const Control> u) {
      double r = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) r += w[k] * u[k][0];
      return Vector::Constant(1, r);
    };
    for (std::size_t k = 0; k < n; ++k) p.drift_bound += std::abs(w[k]) * max_abs(p.grids[k]);
  } else if (drift == "zero") {
    d.expect_keys({"name"});
    p.drift = [](std::span<const Control>) { return Vector::Zero(1); };
  } else if (drift == "constant") {
    d.expect_keys({"name", "value"});
    const double b = d.number("value");
    p.drift = [b](std::span<const Control>) { return Vector::Constant(1, b); };
    p.drift_bound = std::abs(b);
  } else {
    d.fail("name", "unknown drift '" + drift + "' (expected sum, zero or constant)");
  }
  if (state_dim != 1) s.fail("the catalogue drift maps are one-dimensional; model.A must be 1x1");

  const json& costs = s.raw("costs");
  if (costs.is_array() && costs.size() != n)
    s.fail("costs", "expected one entry per player or a single shared entry");
  for (std::size_t i = 0; i < n; ++i) {
    const bool shared = !costs.is_array();
    const Section c(shared ? costs : costs[i],
                    shared ? s.name("costs") : s.name("costs") + "[" + std::to_string(i) + "]");
    CostEntry e = parse_cost(c, i, p.grids);
    p.costs.push_back(std::move(e.f));
    p.cost_bound = std::max(p.cost_bound, e.bound);
    p.cost_lipschitz = std::max(p.cost_lipschitz, e.lipschitz);
  }
  p.drift_bound = s.number("drift_bound", p.drift_bound);
  p.cost_bound = s.number("cost_bound", p.cost_bound);
  p.cost_lipschitz = s.number("cost_lipschitz", p.cost_lipschitz);
  p.table_cap = s.count("table_cap", p.table_cap);
  p.check_samples = s.count("check_samples", p.check_samples);
  return p;
}

// ---------------------------------------------------------------- driver

DriverConfig parse_driver(const Section& s) {
  s.expect_keys({"terms", "kappa"});
  const json& terms = s.raw("terms");
  if (!terms.is_array() || terms.empty()) s.fail("terms", "expected a non-empty array");
  std::vector<ScalarDriver> fs, slopes;
  DriverConfig out;
  std::ostringstream desc;
  desc.precision(6);
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Section t(terms[k], s.name("terms") + "[" + std::to_string(k) + "]");
    const std::string name = t.text("name");
    if (k > 0) desc << " + ";
    if (name == "constant") {
      t.expect_keys({"name", "value"});
      const double c = t.number("value");
      fs.push_back([c](double, double) { return c; });
      out.spec.bound_at_zero += std::abs(c);
      out.growth += std::abs(c);
      desc << c;
    } else if (name == "state_cost") {
      t.expect_keys({"name", "weight"});
      const double w = t.number("weight", 1.0);
      fs.push_back([w](double x, double) { return w * x * x / (1.0 + x * x); });
      out.spec.bound_at_zero += std::abs(w);
      out.growth += std::abs(w);
      desc << w << " x^2/(1+x^2)";
    } else if (name == "linear_z") {
      t.expect_keys({"name", "coefficient"});
      const double b = t.number("coefficient");
      fs.push_back([b](double, double z) { return b * z; });
      slopes.push_back([b](double, double) { return b; });
      out.spec.lipschitz_z += std::abs(b);
      out.growth += std::abs(b);
      desc << b << " z";
    } else if (name == "tanh_z") {
      t.expect_keys({"name", "kappa"});
      const double c = t.number("kappa");
      fs.push_back([c](double, double z) { return c * std::tanh(z); });
      slopes.push_back([c](double, double z) {
        const double th = std::tanh(z);
        return c * (1.0 - th * th);
      });
      out.spec.lipschitz_z += std::abs(c);
      out.growth += std::abs(c);
      desc << c << " tanh(z)";
    } else if (name == "abs_z") {
      t.expect_keys({"name", "coefficient"});
      const double c = t.number("coefficient");
      fs.push_back([c](double, double z) { return c * std::abs(z); });
      slopes.push_back([c](double, double z) { return z > 0.0 ? c : (z < 0.0 ? -c : 0.0); });
      out.spec.lipschitz_z += std::abs(c);
      out.growth += std::abs(c);
      desc << c << " |z|";
    } else if (name == "sqrt_abs_z") {
      t.expect_keys({"name", "coefficient"});
      const double c = t.number("coefficient");
      fs.push_back([c](double, double z) { return c * std::sqrt(std::abs(z)); });
      out.lipschitz = false;
      // sqrt|z| <= (1 + |z|) / 2.
      out.growth += 0.5 * std::abs(c);
      desc << c << " sqrt|z|";
    } else {
      t.fail("name", "unknown driver term '" + name +
                         "' (expected constant, state_cost, linear_z, tanh_z, abs_z or sqrt_abs_z)");
    }
  }
  out.growth = s.positive("kappa", std::max(out.growth, 1e-12));
  out.spec.f = [fs](double x, double z) {
    double v = 0.0;
    for (const auto& f : fs) v += f(x, z);
    return v;
  };
  // Missing slopes belong to z-independent terms.
  out.spec.slope = [slopes](double x, double z) {
    double v = 0.0;
    for (const auto& f : slopes) v += f(x, z);
    return v;
  };
  out.description = desc.str();
  return out;
}

Grid1D parse_grid(const Section& s) {
  s.expect_keys({"x_min", "x_max", "m", "interior_margin"});
  const double lo = s.number("x_min"), hi = s.number("x_max");
  const std::size_t m = s.count("m");
  const std::size_t margin = s.count("interior_margin", 5);
  try {
    return Grid1D(lo, hi, m, margin);
  } catch (const Error& e) {
    s.fail(e.what());
  }
}

void parse_solver(const Section& s, PicardOptions& p) {
  s.expect_keys({"tol", "picard_tol", "max_iter", "max_sweeps", "damping", "scheme", "pseudo_dt",
                 "enumeration_cap", "tie_tolerance"});
  p.inner.tol = s.positive("tol", p.inner.tol);
  p.tol = s.positive("picard_tol", p.tol);
  p.max_iter = s.count("max_iter", p.max_iter);
  if (p.max_iter == 0) s.fail("max_iter", "must be at least 1");
  p.inner.max_sweeps = s.count("max_sweeps", p.inner.max_sweeps);
  p.damping = s.number("damping", p.damping);
  if (!(p.damping > 0.0 && p.damping <= 1.0)) s.fail("damping", "must lie in (0, 1]");
  const std::string scheme = s.text("scheme", "implicit");
  if (scheme == "implicit") {
    p.inner.scheme = Scheme::linearized_implicit;
  } else if (scheme == "explicit") {
    p.inner.scheme = Scheme::explicit_relative_value;
  } else {
    s.fail("scheme", "expected implicit or explicit");
  }
  if (s.has("pseudo_dt")) p.inner.pseudo_dt = s.positive("pseudo_dt");
  p.isaac.enumeration_cap = s.count("enumeration_cap", p.isaac.enumeration_cap);
  p.isaac.tie_tolerance = s.positive("tie_tolerance", p.isaac.tie_tolerance);
}

void parse_mc(const Section& s, McConfig& mc) {
  s.expect_keys({"T", "burn_in", "h", "n_paths", "n_deviations", "grid_error_budget",
                 "tail_epsilon", "perturbation_radius", "threads"});
  McParams& p = mc.params;
  p.T = s.positive("T", p.T);
  p.burn_in = s.number("burn_in", p.burn_in);
  if (p.burn_in < 0.0) s.fail("burn_in", "must be non-negative");
  p.h = s.positive("h", p.h);
  p.n_paths = s.count("n_paths", p.n_paths);
  if (p.n_paths < 2) s.fail("n_paths", "need at least two paths for a standard error");
  p.tail_epsilon = s.positive("tail_epsilon", p.tail_epsilon);
  p.threads = static_cast<unsigned>(s.count("threads", p.threads));
  mc.deviations.n_deviations = s.count("n_deviations", mc.deviations.n_deviations);
  mc.deviations.grid_error_budget = s.number("grid_error_budget", mc.deviations.grid_error_budget);
  if (mc.deviations.grid_error_budget < 0.0) s.fail("grid_error_budget", "must be non-negative");
  mc.deviations.perturbation_radius =
      s.positive("perturbation_radius", mc.deviations.perturbation_radius);
}

}  // namespace

void set_seed(ExperimentConfig& c, std::uint64_t seed) {
  c.seed = seed;
  c.mc.params.seed = seed;
  c.mc.deviations.seed = mix64(seed ^ 0xdef1a7e5ULL);
  c.model.check_seed = mix64(seed ^ 0x5eedULL);
  if (!c.canonical.empty()) {
    json doc = json::parse(c.canonical);
    doc["seed"] = seed;
    c.canonical = doc.dump();
  }
}

ExperimentConfig parse_config(const json& document) {
  const Section root(document, "");
  root.expect_keys({"seed", "model", "game", "grid", "solver", "mc", "alpha", "alphas", "driver",
                    "continuous", "simulate", "description"});
  ExperimentConfig c;
  parse_model(root.child("model"), c.model);
  if (root.has("game")) c.game = parse_game(root.raw("game"), static_cast<std::size_t>(c.model.A.rows()));
  if (root.has("grid")) c.grid = parse_grid(root.child("grid"));
  if (root.has("solver")) parse_solver(root.child("solver"), c.solver);
  if (root.has("mc")) parse_mc(root.child("mc"), c.mc);
  if (root.has("alpha")) c.alpha = root.positive("alpha");
  if (root.has("alphas")) {
    c.alphas = root.numbers("alphas");
    for (std::size_t k = 0; k < c.alphas.size(); ++k) {
      if (!(c.alphas[k] > 0.0)) root.fail("alphas", "entries must be positive");
      if (k > 0 && !(c.alphas[k] < c.alphas[k - 1])) root.fail("alphas", "must be strictly decreasing");
    }
  }
  if (root.has("driver")) c.driver = parse_driver(root.child("driver"));
  if (root.has("continuous")) {
    const Section s = root.child("continuous");
    s.expect_keys({"max_iter", "initial_xi", "residual_ceiling"});
    c.continuous.max_iter = s.count("max_iter", c.continuous.max_iter);
    if (c.continuous.max_iter == 0) s.fail("max_iter", "must be at least 1");
    if (s.has("initial_xi")) c.continuous.initial_xi = s.numbers("initial_xi");
    if (c.continuous.initial_xi.empty()) s.fail("initial_xi", "must not be empty");
    c.continuous.residual_ceiling = s.positive("residual_ceiling", c.continuous.residual_ceiling);
  }
  if (root.has("simulate")) {
    const Section s = root.child("simulate");
    s.expect_keys({"T", "h", "n_paths", "shift", "moment_T", "moment_paths"});
    SimulateConfig& sim = c.simulate;
    sim.T = s.number("T", sim.T);
    if (sim.T < 0.0) s.fail("T", "must be non-negative");
    sim.h = s.positive("h", sim.h);
    sim.n_paths = s.count("n_paths", sim.n_paths);
    if (sim.n_paths == 0) s.fail("n_paths", "must be at least 1");
    sim.shift = s.number("shift", sim.shift);
    sim.moment_T = s.positive("moment_T", sim.moment_T);
    sim.moment_paths = s.count("moment_paths", sim.moment_paths);
    if (sim.moment_paths < 2) s.fail("moment_paths", "must be at least 2");
  }
  std::uint64_t seed = 1;
  if (root.has("seed")) {
    const json& v = root.raw("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      root.fail("seed", "expected a non-negative integer");
    seed = v.get<std::uint64_t>();
  }
  set_seed(c, seed);
  c.canonical = document.dump();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: invalid JSON in '" + path + "': " + e.what());
  }
  if (doc.is_object() && doc.contains("manifest_version")) {
    if (!doc.contains("config") || !doc.contains("seed"))
      throw ConfigError("manifest: missing config or seed");
    json embedded = doc.at("config");
    embedded["seed"] = doc.at("seed");
    return parse_config(embedded);
  }
  return parse_config(doc);
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::string> game_presets() {
  return {"quadratic_decoupled", "coupled_cross_cost", "three_player"};
}

}  // namespace egame
