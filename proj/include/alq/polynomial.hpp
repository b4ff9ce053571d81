#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace alq {

/// Coefficients in descending powers of s: {c0, c1, ..., cn} = c0 s^n + ... + cn.
using Poly = std::vector<double>;

std::complex<double> poly_eval(std::span<const double> p, std::complex<double> s);

/// Roots via the eigenvalues of the companion matrix. Leading zeros are ignored.
std::vector<std::complex<double>> poly_roots(std::span<const double> p);

/// Monic real polynomial with the given roots (complex roots must come in conjugate pairs).
Poly poly_from_roots(std::span<const std::complex<double>> roots);

Poly poly_multiply(std::span<const double> a, std::span<const double> b);

/// Drop leading coefficients whose magnitude is below rel_tol * max|coeff|.
Poly poly_trim(std::span<const double> p, double rel_tol);

/// det(sI - A) and C adj(sI - A) B for a SISO triple (Faddeev-LeVerrier).
struct TransferPolys {
  Poly numerator;    // length n (degree n-1, possibly leading zeros)
  Poly denominator;  // length n+1, monic
};
TransferPolys transfer_function(const Eigen::MatrixXd& A, const Eigen::VectorXd& B,
                                const Eigen::RowVectorXd& C);

/// Smallest relative distance between a root of `a` and a root of `b`:
/// min |za - zb| / (1 + |zb|). Large means coprime.
double root_separation(std::span<const double> a, std::span<const double> b);

}  // namespace alq
