#pragma once

// Reference simulation of a SISO transfer function, used as ground truth for
// the estimator. Independent of the library: its own canonical realization and RK4.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "alq/polynomial.hpp"

namespace alq::testing {

struct Tones {
  std::vector<double> amp;
  std::vector<double> freq_hz;

  double operator()(double t) const {
    double s = 0.0;
    for (std::size_t i = 0; i < amp.size(); ++i) s += amp[i] * std::sin(2.0 * M_PI * freq_hz[i] * t);
    return s;
  }
};

/// Samples y(i dt), i = 0..steps-1, of num/den driven by u(t) from rest.
/// The input is evaluated continuously; `sub` RK4 substeps per tick.
inline std::vector<double> simulate_siso(const Poly& num, const Poly& den,
                                         const std::function<double(double)>& u, double dt,
                                         int steps, int sub = 10) {
  const int n = static_cast<int>(den.size()) - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) A(i, i + 1) = 1.0;
  for (int j = 0; j < n; ++j) A(n - 1, j) = -den[static_cast<std::size_t>(n - j)] / den[0];
  Eigen::VectorXd B = Eigen::VectorXd::Zero(n);
  B[n - 1] = 1.0 / den[0];
  Eigen::RowVectorXd C = Eigen::RowVectorXd::Zero(n);
  const int m = static_cast<int>(num.size()) - 1;
  for (int j = 0; j <= m; ++j) C[j] = num[static_cast<std::size_t>(m - j)];

  std::vector<double> y;
  y.reserve(static_cast<std::size_t>(steps));
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double h = dt / sub;
  auto f = [&](const Eigen::VectorXd& v, double t) -> Eigen::VectorXd { return A * v + B * u(t); };
  for (int i = 0; i < steps; ++i) {
    y.push_back(C.dot(x));
    for (int k = 0; k < sub; ++k) {
      const double t = i * dt + k * h;
      const Eigen::VectorXd k1 = f(x, t), k2 = f(x + 0.5 * h * k1, t + 0.5 * h),
                            k3 = f(x + 0.5 * h * k2, t + 0.5 * h), k4 = f(x + h * k3, t + h);
      x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return y;
}

}  // namespace alq::testing
