#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace oracle {

/// Gauss-Hermite rule for the weight e^{-t^2} (Golub-Welsch).
inline std::pair<std::vector<double>, std::vector<double>> gauss_hermite(int n) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
  std::vector<double> nodes(n), weights(n);
  for (int k = 0; k < n; ++k) {
    nodes[k] = eig.eigenvalues()[k];
    const double v0 = eig.eigenvectors()(0, k);
    weights[k] = std::sqrt(std::numbers::pi) * v0 * v0;
  }
  return {nodes, weights};
}

/// E g(Y) for Y ~ N(mean, sd^2).
inline double normal_expectation(const std::function<double(double)>& g, double mean, double sd,
                                 int n = 120) {
  const auto [t, w] = gauss_hermite(n);
  double sum = 0.0;
  for (int k = 0; k < n; ++k) sum += w[k] * g(mean + std::sqrt(2.0) * sd * t[k]);
  return sum / std::sqrt(std::numbers::pi);
}

inline double saturating(double x) { return x * x / (1.0 + x * x); }

/// Closed form of E[Y^2 / (1 + Y^2)] for Y ~ N(0, 1).
inline double saturating_standard_normal() {
  return 1.0 - std::sqrt(std::numbers::pi / 2.0) * std::exp(0.5) * std::erfc(1.0 / std::sqrt(2.0));
}

/// Stationary variance of the Euler chain x' = (1 - mu h) x + sigma sqrt(h) N.
inline double euler_ou_variance(double mu, double sigma, double h) {
  return sigma * sigma * h / (1.0 - (1.0 - mu * h) * (1.0 - mu * h));
}

}  // namespace oracle
