#include "alq/lq_synthesis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "alq/errors.hpp"
#include "alq/polynomial.hpp"

namespace alq {

LqWeights LqWeights::output_penalty(const Eigen::RowVectorXd& C, double q1, double R) {
  return {q1 * C.transpose() * C, R};
}

void LqWeights::validate() const {
  if (!(R > 0.0)) throw PreconditionError("R must be positive");
  if (Q.rows() != Q.cols()) throw PreconditionError("Q must be square");
  if ((Q - Q.transpose()).norm() != 0.0) throw PreconditionError("Q must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Q, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-12 * std::max(1.0, Q.norm()))
    throw PreconditionError("Q must be positive semidefinite");
}

StateSpaceModel realize(const PolynomialPlant& plant) {
  plant.validate();
  const int n = plant.denominator_degree();
  const int m = plant.numerator_degree();
  StateSpaceModel ss;
  ss.A = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) ss.A(i, i + 1) = 1.0;
  for (int k = 0; k < n; ++k) ss.A(n - 1, k) = -plant.denominator[static_cast<std::size_t>(n - k)];
  ss.B = Eigen::VectorXd::Zero(n);
  ss.B[n - 1] = 1.0;
  ss.C = Eigen::RowVectorXd::Zero(n);
  for (int k = 0; k <= m; ++k) ss.C[k] = plant.numerator[static_cast<std::size_t>(m - k)];
  ss.coprimeness = m > 0 ? root_separation(plant.numerator, plant.denominator)
                         : std::numeric_limits<double>::infinity();
  ss.near_common_roots = ss.coprimeness < kCoprimeTolerance;
  return ss;
}

namespace {

using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Riccati defect in extended precision: with |P| large the products P S P carry
// far more magnitude than their sum, and double rounding swamps the result.
MatrixXld care_defect(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                      double R, const MatrixXld& P) {
  const MatrixXld Al = A.cast<long double>();
  const MatrixXld PB = P * B.cast<long double>();
  return Al.transpose() * P + P * Al - PB * PB.transpose() / static_cast<long double>(R) +
         Q.cast<long double>();
}

}  // namespace

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, double R, const Eigen::MatrixXd& P) {
  return static_cast<double>(care_defect(A, B, Q, R, P.cast<long double>()).norm());
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M) {
  const auto n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  // vec(A'X + XA) = (I kron A' + A' kron I) vec(X)
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      K.block(i * n, j * n, n, n) += I(i, j) * A.transpose();
      K.block(i * n, j * n, n, n) += A(j, i) * I;
    }
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(M.data(), n * n);
  const Eigen::VectorXd x = K.fullPivLu().solve(rhs);
  Eigen::MatrixXd X = Eigen::Map<const Eigen::MatrixXd>(x.data(), n, n);
  return 0.5 * (X + X.transpose());
}

namespace {

// Diagonal D (powers of two) such that D^-1 A D has comparable row and column norms.
Eigen::VectorXd balance(const Eigen::MatrixXd& A) {
  const auto n = A.rows();
  Eigen::MatrixXd M = A;
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double c = 0.0, r = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        c += std::abs(M(j, i));
        r += std::abs(M(i, j));
      }
      if (c == 0.0 || r == 0.0) continue;
      double f = 1.0;
      const double s = c + r;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (c + r < 0.95 * s) {
        done = false;
        d[i] *= f;
        M.col(i) *= f;
        M.row(i) /= f;
      }
    }
    if (done) break;
  }
  return d;
}

Eigen::MatrixXd care_hamiltonian(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                 const Eigen::MatrixXd& Q, double R) {
  const auto n = A.rows();
  const Eigen::MatrixXd S = B * B.transpose() / R;
  Eigen::MatrixXd H(2 * n, 2 * n);
  H << A, -S, -Q, -A.transpose();

  Eigen::EigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) throw IllConditioned("Hamiltonian eigendecomposition failed");
  const auto& lambda = es.eigenvalues();
  const double scale = 1.0 + lambda.cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> stable;
  for (Eigen::Index i = 0; i < 2 * n; ++i) {
    if (std::abs(lambda[i].real()) <= 1e-9 * scale)
      throw NotStabilizable("Hamiltonian eigenvalue on the imaginary axis");
    if (lambda[i].real() < 0.0) stable.push_back(i);
  }
  if (static_cast<Eigen::Index>(stable.size()) != n)
    throw NotStabilizable("Hamiltonian stable subspace has the wrong dimension");

  Eigen::MatrixXcd U(2 * n, n);
  for (Eigen::Index k = 0; k < n; ++k) U.col(k) = es.eigenvectors().col(stable[k]);
  const Eigen::MatrixXcd U1 = U.topRows(n);
  const Eigen::MatrixXcd U2 = U.bottomRows(n);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(U1);
  const auto& sv = svd.singularValues();
  if (!(sv[n - 1] > 1e-13 * sv[0])) throw IllConditioned("stable-subspace basis is singular");

  Eigen::MatrixXd P = (U2 * U1.inverse()).real();
  P = 0.5 * (P + P.transpose());

  // Newton-Kleinman refinement.
  double res = care_residual(A, B, Q, R, P);
  for (int it = 0; it < 6 && res > 1e-15 * (1.0 + P.norm()); ++it) {
    const Eigen::MatrixXd K = B.transpose() * P / R;
    const Eigen::MatrixXd Ak = A - B * K;
    if (max_real_eigenvalue(Ak) >= 0.0) break;
    const Eigen::MatrixXd next = solve_lyapunov(Ak, Q + K.transpose() * R * K);
    const double next_res = care_residual(A, B, Q, R, next);
    if (!(next_res < res)) break;
    P = next;
    res = next_res;
  }
  return P;
}

}  // namespace

Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, double R) {
  const auto n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n)
    throw PreconditionError("solve_care: dimension mismatch");
  if (!(R > 0.0)) throw PreconditionError("solve_care: R must be positive");
  if (!A.allFinite() || !B.allFinite() || !Q.allFinite())
    throw PreconditionError("solve_care: non-finite input");

  // x = D z; then (Q, R) -> (alpha Q, alpha R) leaves the gain unchanged and scales P by alpha.
  const Eigen::VectorXd d = balance(A);
  const Eigen::MatrixXd Ab = d.cwiseInverse().asDiagonal() * A * d.asDiagonal();
  const Eigen::MatrixXd Bb = d.cwiseInverse().asDiagonal() * B;
  const Eigen::MatrixXd Qb = d.asDiagonal() * Q * d.asDiagonal();
  const double sn = (Bb * Bb.transpose()).norm() / R;
  const double qn = Qb.norm();
  const double alpha = (qn > 0.0 && sn > 0.0) ? std::sqrt(sn / qn) : 1.0;

  const Eigen::MatrixXd Pb = care_hamiltonian(Ab, Bb, alpha * Qb, alpha * R) / alpha;
  Eigen::MatrixXd P = d.cwiseInverse().asDiagonal() * Pb * d.cwiseInverse().asDiagonal();
  P = 0.5 * (P + P.transpose());

  // Unscaling can cost digits. Defect correction in the original coordinates recovers them:
  // the defect is exact to long double, the Lyapunov correction only needs to contract it.
  // Single steps may overshoot, so the best iterate is kept.
  const MatrixXld Bl = B.cast<long double>();
  MatrixXld Pl = P.cast<long double>();
  double res = care_residual(A, B, Q, R, P);
  for (int it = 0; it < 6 && res > 1e-14 * (1.0 + P.norm()); ++it) {
    const Eigen::MatrixXd Ak =
        (A.cast<long double>() - Bl * (Pl * Bl).transpose() / static_cast<long double>(R))
            .cast<double>();
    if (max_real_eigenvalue(Ak) >= 0.0) break;
    const MatrixXld F = care_defect(A, B, Q, R, Pl);
    Pl += solve_lyapunov(Ak, F.cast<double>()).cast<long double>();
    Pl = ((Pl + Pl.transpose()) / 2.0L).eval();
    const Eigen::MatrixXd next = Pl.cast<double>();
    const double next_res = care_residual(A, B, Q, R, next);
    if (next_res < res) {
      P = next;
      res = next_res;
    }
  }

  const double res_b = care_residual(Ab, Bb, Qb, R, Pb);
  const double scale_b = (Ab.transpose() * Pb).norm() + (Pb * Bb * Bb.transpose() * Pb).norm() / R +
                         Qb.norm();
  if (!(res_b <= 1e-8 * scale_b))
    throw IllConditioned("Riccati residual too large for a trustworthy solution");
  return P;
}

Eigen::RowVectorXd feedback_gain(const Eigen::MatrixXd& P, const Eigen::VectorXd& B, double R) {
  return -(B.transpose() * P) / R;
}

Eigen::VectorXd observer_gain(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& C,
                              const std::vector<std::complex<double>>& poles) {
  const auto n = A.rows();
  if (static_cast<Eigen::Index>(poles.size()) != n)
    throw PreconditionError("observer_gain: need one pole per state");
  Eigen::MatrixXd O(n, n);
  Eigen::RowVectorXd row = C;
  for (Eigen::Index i = 0; i < n; ++i) {
    O.row(i) = row;
    row = row * A;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(O);
  const auto& sv = svd.singularValues();
  if (!(sv[n - 1] > 1e-14 * sv[0])) throw PlacementError("(A, C) is not observable");

  const Poly desired = poly_from_roots(poles);
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(n, n);
  for (double c : desired) phi = phi * A + c * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd en = Eigen::VectorXd::Zero(n);
  en[n - 1] = 1.0;
  return phi * O.fullPivLu().solve(en);
}

std::vector<std::complex<double>> default_observer_poles(const Eigen::MatrixXd& closed_loop,
                                                         double factor,
                                                         std::optional<double> max_magnitude) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(closed_loop, false);
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    mags.push_back(std::max(factor * std::abs(es.eigenvalues()[i]), 1e-6));
  std::sort(mags.begin(), mags.end());
  for (std::size_t i = 1; i < mags.size(); ++i)
    if (mags[i] < 1.1 * mags[i - 1]) mags[i] = 1.1 * mags[i - 1];
  if (max_magnitude && mags.back() > *max_magnitude) {
    mags.back() = *max_magnitude;
    for (std::size_t i = mags.size() - 1; i-- > 0;)
      if (mags[i] > mags[i + 1] / 1.1) mags[i] = mags[i + 1] / 1.1;
  }
  std::vector<std::complex<double>> poles;
  for (double m : mags) poles.emplace_back(-m, 0.0);
  return poles;
}

double control_torque(const Eigen::RowVectorXd& Kc, const Eigen::VectorXd& x_hat,
                      std::optional<double> limit) {
  const double u = Kc.dot(x_hat);
  if (limit) return std::clamp(u, -*limit, *limit);
  return u;
}

double max_real_eigenvalue(const Eigen::MatrixXd& M) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  return es.eigenvalues().real().maxCoeff();
}

Synthesis synthesize(const PolynomialPlant& plant, double q1, double R, double observer_factor,
                     std::optional<double> observer_pole_limit) {
  Synthesis s;
  s.model = realize(plant);
  const LqWeights w = LqWeights::output_penalty(s.model.C, q1, R);
  s.gains.P = solve_care(s.model.A, s.model.B, w.Q, w.R);
  s.gains.Kc = feedback_gain(s.gains.P, s.model.B, w.R);
  const Eigen::MatrixXd closed = s.model.A + s.model.B * s.gains.Kc;
  s.gains.Ko = observer_gain(s.model.A, s.model.C,
                             default_observer_poles(closed, observer_factor, observer_pole_limit));
  return s;
}

}  // namespace alq
