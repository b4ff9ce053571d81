#include "alq/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace alq {

std::complex<double> poly_eval(std::span<const double> p, std::complex<double> s) {
  std::complex<double> acc{0.0, 0.0};
  for (double c : p) acc = acc * s + c;
  return acc;
}

std::vector<std::complex<double>> poly_roots(std::span<const double> p) {
  std::size_t first = 0;
  while (first < p.size() && p[first] == 0.0) ++first;
  if (first + 1 >= p.size()) return {};
  const auto coeffs = p.subspan(first);
  const int n = static_cast<int>(coeffs.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) companion(0, j) = -coeffs[j + 1] / coeffs[0];
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(companion, false);
  std::vector<std::complex<double>> roots(es.eigenvalues().data(), es.eigenvalues().data() + n);
  return roots;
}

Poly poly_from_roots(std::span<const std::complex<double>> roots) {
  std::vector<std::complex<double>> acc{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(acc.size() + 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      next[i] += acc[i];
      next[i + 1] -= acc[i] * r;
    }
    acc = std::move(next);
  }
  Poly out(acc.size());
  std::transform(acc.begin(), acc.end(), out.begin(), [](auto c) { return c.real(); });
  return out;
}

Poly poly_multiply(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  Poly out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Poly poly_trim(std::span<const double> p, double rel_tol) {
  double scale = 0.0;
  for (double c : p) scale = std::max(scale, std::abs(c));
  std::size_t first = 0;
  while (first + 1 < p.size() && std::abs(p[first]) <= rel_tol * scale) ++first;
  return Poly(p.begin() + static_cast<std::ptrdiff_t>(first), p.end());
}

TransferPolys transfer_function(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                const Eigen::RowVectorXd& C) {
  // adj(sI - A) = sum_k N_k s^(n-1-k), N_0 = I, N_k = A N_{k-1} + c_k I,
  // det(sI - A) = s^n + c_1 s^(n-1) + ... + c_n, c_k = -tr(A N_{k-1}) / k.
  const auto n = A.rows();
  TransferPolys tf;
  tf.denominator.assign(static_cast<std::size_t>(n) + 1, 0.0);
  tf.numerator.assign(static_cast<std::size_t>(n), 0.0);
  tf.denominator[0] = 1.0;
  Eigen::MatrixXd N = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    tf.numerator[static_cast<std::size_t>(k - 1)] = (C * N * B)(0, 0);
    const Eigen::MatrixXd AN = A * N;
    const double ck = -AN.trace() / static_cast<double>(k);
    tf.denominator[static_cast<std::size_t>(k)] = ck;
    N = AN + ck * Eigen::MatrixXd::Identity(n, n);
  }
  return tf;
}

double root_separation(std::span<const double> a, std::span<const double> b) {
  const auto ra = poly_roots(a);
  const auto rb = poly_roots(b);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& za : ra)
    for (const auto& zb : rb) best = std::min(best, std::abs(za - zb) / (1.0 + std::abs(zb)));
  return best;
}

}  // namespace alq
