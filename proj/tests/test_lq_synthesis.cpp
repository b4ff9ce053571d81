#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "alq/errors.hpp"
#include "alq/lq_synthesis.hpp"
#include "support/random_systems.hpp"

using namespace alq;
using namespace alq::testing;

namespace {

Eigen::MatrixXd mat(int r, int c, std::initializer_list<double> v) {
  Eigen::MatrixXd m(r, c);
  auto it = v.begin();
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

}  // namespace

TEST(Realize, SecondOrderCanonicalForm) {
  const auto ss = realize({{1.0}, {1.0, 3.0, 2.0}});
  EXPECT_EQ(ss.A, mat(2, 2, {0.0, 1.0, -2.0, -3.0}));
  EXPECT_EQ(ss.B, Eigen::Vector2d(0.0, 1.0));
  EXPECT_EQ(ss.C, Eigen::RowVector2d(1.0, 0.0));
  EXPECT_FALSE(ss.near_common_roots);
}

TEST(Realize, RoundTripThroughTransferFunction) {
  const PolynomialPlant plant{{0.0997, 0.0486, 24.28}, {1.0, 760.0, 3.1e3, 4.5e4, 2.0e4}};
  const auto ss = realize(plant);
  const auto tf = transfer_function(ss.A, ss.B, ss.C);
  ASSERT_EQ(tf.denominator.size(), plant.denominator.size());
  for (std::size_t i = 0; i < plant.denominator.size(); ++i)
    EXPECT_NEAR(tf.denominator[i], plant.denominator[i], 1e-10 * (1.0 + std::abs(plant.denominator[i])));
  const Poly num = poly_trim(tf.numerator, 1e-14);
  ASSERT_EQ(num.size(), plant.numerator.size());
  for (std::size_t i = 0; i < num.size(); ++i) EXPECT_NEAR(num[i], plant.numerator[i], 1e-10);
}

TEST(Realize, RejectsNonMonicAndFlagsCommonRoots) {
  EXPECT_THROW(realize({{1.0}, {2.0, 3.0, 2.0}}), PreconditionError);
  const auto ss = realize({{1.0, 1.0}, {1.0, 3.0, 2.0}});  // (s + 1) / ((s + 1)(s + 2))
  EXPECT_TRUE(ss.near_common_roots);
}

TEST(Care, ScalarClosedForm) {
  const Eigen::MatrixXd P = solve_care(mat(1, 1, {0.0}), mat(1, 1, {1.0}), mat(1, 1, {1.0}), 1.0);
  EXPECT_NEAR(P(0, 0), 1.0, 1e-12);
  const auto Kc = feedback_gain(P, Eigen::VectorXd::Ones(1), 1.0);
  EXPECT_NEAR(Kc[0], -1.0, 1e-12);
  EXPECT_NEAR(0.0 + 1.0 * Kc[0], -1.0, 1e-12);
}

// a' P + P a - P^2 b^2 / r + q = 0 has the positive root (a + sqrt(a^2 + b^2 q / r)) r / b^2.
TEST(Care, ScalarFamily) {
  for (double a : {-3.0, -0.5, 0.0, 0.7, 4.0})
    for (double q : {0.1, 1.0, 50.0}) {
      const double b = 1.3, r = 0.4;
      const double expect = (a + std::sqrt(a * a + b * b * q / r)) * r / (b * b);
      const auto P = solve_care(mat(1, 1, {a}), mat(1, 1, {b}), mat(1, 1, {q}), r);
      EXPECT_NEAR(P(0, 0), expect, 1e-11 * (1.0 + expect)) << a << " " << q;
    }
}

TEST(Care, HurwitzWithZeroWeightGivesZero) {
  const Eigen::MatrixXd A = mat(2, 2, {-1.0, 2.0, 0.0, -3.0});
  const Eigen::MatrixXd P = solve_care(A, mat(2, 1, {0.0, 1.0}), Eigen::MatrixXd::Zero(2, 2), 1.0);
  EXPECT_LT(P.norm(), 1e-12);
  EXPECT_LT(feedback_gain(P, Eigen::Vector2d(0.0, 1.0), 1.0).norm(), 1e-12);
}

TEST(Care, RandomSystemsResidualAndStability) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_care_problem(rng);
    const Eigen::MatrixXd P = solve_care(p.A, p.B, p.Q, p.R);
    EXPECT_LE(care_residual(p.A, p.B, p.Q, p.R, P), 1e-8 * (1.0 + P.norm())) << trial;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-9 * (1.0 + P.norm())) << trial;
    const Eigen::MatrixXd K = -p.B.transpose() * P / p.R;
    EXPECT_LT(max_real_eigenvalue(p.A + p.B * K), 0.0) << trial;
  }
}

// No stabilizing gain does better than the Riccati gain.
TEST(Care, OptimalAgainstPerturbedGains) {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = random_care_problem(rng, 4);
    const Eigen::MatrixXd P = solve_care(p.A, p.B, p.Q, p.R);
    const Eigen::MatrixXd K = -p.B.transpose() * P / p.R;
    const double best = lq_cost(p, K);
    EXPECT_NEAR(best, P.trace(), 1e-6 * (1.0 + P.trace()));
    for (int k = 0; k < 10; ++k) {
      const Eigen::MatrixXd dK =
          0.05 * Eigen::MatrixXd::NullaryExpr(K.rows(), K.cols(), [&] { return nd(rng); });
      EXPECT_GE(lq_cost(p, K + dK), best * (1.0 - 1e-9));
    }
  }
}

TEST(Care, LargeOutputWeight) {
  const auto ss = realize({{0.0997, 0.0486, 24.28}, {1.0, 760.0, 3.1e3, 4.5e4, 2.0e4}});
  for (double q1 : {1.0, 1e6, 1e9, 1e12}) {
    const auto w = LqWeights::output_penalty(ss.C, q1, 1.0);
    const Eigen::MatrixXd P = solve_care(ss.A, ss.B, w.Q, w.R);
    const double scale = (ss.A.transpose() * P).norm() + (P * ss.B).squaredNorm() + w.Q.norm();
    EXPECT_LE(care_residual(ss.A, ss.B, w.Q, w.R, P), 1e-9 * scale) << q1;
    EXPECT_LT(max_real_eigenvalue(ss.A + ss.B * feedback_gain(P, ss.B, 1.0)), 0.0);
  }
}

TEST(Care, RejectsBadInput) {
  EXPECT_THROW(solve_care(mat(1, 1, {0.0}), mat(1, 1, {1.0}), mat(1, 1, {1.0}), 0.0),
               PreconditionError);
  EXPECT_THROW(solve_care(mat(2, 2, {0, 1, 0, 0}), mat(1, 1, {1.0}), mat(1, 1, {1.0}), 1.0),
               PreconditionError);
  // Uncontrollable, undamped mode: the Hamiltonian has eigenvalues on the imaginary axis.
  EXPECT_THROW(solve_care(mat(1, 1, {0.0}), mat(1, 1, {0.0}), mat(1, 1, {1.0}), 1.0), Error);
  // Uncontrollable unstable mode.
  EXPECT_THROW(solve_care(mat(1, 1, {1.0}), mat(1, 1, {0.0}), mat(1, 1, {1.0}), 1.0), Error);
}

TEST(Weights, Validation) {
  const Eigen::RowVector2d C(1.0, 0.0);
  const auto w = LqWeights::output_penalty(C, 5.0, 2.0);
  EXPECT_EQ(w.Q(0, 0), 5.0);
  EXPECT_EQ(w.Q(1, 1), 0.0);
  EXPECT_NO_THROW(w.validate());
  EXPECT_THROW((LqWeights{mat(2, 2, {1, 0, 0, -1}), 1.0}.validate()), PreconditionError);
  EXPECT_THROW((LqWeights{mat(2, 2, {1, 1, 0, 1}), 1.0}.validate()), PreconditionError);
  EXPECT_THROW((LqWeights{mat(1, 1, {1}), 0.0}.validate()), PreconditionError);
}

TEST(Lyapunov, SolvesEquation) {
  const Eigen::MatrixXd A = mat(3, 3, {-1, 2, 0, 0, -2, 1, 1, 0, -3});
  const Eigen::MatrixXd M = mat(3, 3, {2, 0.5, 0, 0.5, 1, 0, 0, 0, 3});
  const Eigen::MatrixXd X = solve_lyapunov(A, M);
  EXPECT_LT((A.transpose() * X + X * A + M).norm(), 1e-12);
}

TEST(ObserverGain, DoubleIntegrator) {
  const Eigen::MatrixXd A = mat(2, 2, {0, 1, 0, 0});
  const Eigen::RowVector2d C(1.0, 0.0);
  const auto Ko = observer_gain(A, C, {{-1.0, 0.0}, {-1.0, 0.0}});
  EXPECT_NEAR(Ko[0], 2.0, 1e-12);
  EXPECT_NEAR(Ko[1], 1.0, 1e-12);
}

TEST(ObserverGain, PlacesPoles) {
  const auto ss = realize({{4.8, 24.0}, {1.0, 10.0, 35.0, 50.0, 24.0}});
  const std::vector<std::complex<double>> poles{{-5, 0}, {-7, 2}, {-7, -2}, {-11, 0}};
  const auto Ko = observer_gain(ss.A, ss.C, poles);
  const Poly got = transfer_function(ss.A - Ko * ss.C, ss.B, ss.C).denominator;
  const Poly want = poly_from_roots(poles);
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-8 * (1.0 + std::abs(want[i])));
}

TEST(ObserverGain, StableSpectrumNeedsNoGain) {
  const Eigen::MatrixXd A = mat(2, 2, {0, 1, -2, -3});
  const auto Ko = observer_gain(A, Eigen::RowVector2d(1.0, 0.0), {{-1.0, 0.0}, {-2.0, 0.0}});
  EXPECT_LT(Ko.norm(), 1e-12);
}

TEST(ObserverGain, UnobservableThrows) {
  const Eigen::MatrixXd A = mat(2, 2, {-1, 0, 0, -2});
  EXPECT_THROW(observer_gain(A, Eigen::RowVector2d(1.0, 0.0), {{-3, 0}, {-4, 0}}), PlacementError);
}

TEST(ObserverPoles, FactorSpreadAndCap) {
  const Eigen::MatrixXd cl = mat(3, 3, {-1, 0, 0, 0, -1, 0, 0, 0, -10});
  const auto poles = default_observer_poles(cl, 3.0);
  ASSERT_EQ(poles.size(), 3u);
  EXPECT_DOUBLE_EQ(poles[0].real(), -3.0);
  EXPECT_DOUBLE_EQ(poles[1].real(), -3.3);
  EXPECT_DOUBLE_EQ(poles[2].real(), -30.0);
  const auto capped = default_observer_poles(cl, 3.0, 20.0);
  EXPECT_DOUBLE_EQ(capped[2].real(), -20.0);
  for (std::size_t i = 1; i < capped.size(); ++i)
    EXPECT_LE(1.1 * std::abs(capped[i - 1]), std::abs(capped[i]) * (1.0 + 1e-12));
  for (const auto& p : capped) EXPECT_EQ(p.imag(), 0.0);
}

TEST(ControlTorque, LinearAndClamped) {
  const Eigen::RowVectorXd Kc = Eigen::RowVectorXd::Constant(1, -1.0);
  EXPECT_EQ(control_torque(Kc, Eigen::VectorXd::Zero(1)), 0.0);
  EXPECT_EQ(control_torque(Kc, Eigen::VectorXd::Constant(1, 0.5)), -0.5);
  const Eigen::RowVectorXd big = Eigen::RowVectorXd::Constant(1, 250.0);
  EXPECT_EQ(control_torque(big, Eigen::VectorXd::Ones(1), 100.0), 100.0);
  EXPECT_EQ(control_torque(big, -Eigen::VectorXd::Ones(1), 100.0), -100.0);
}

TEST(Synthesize, ClosedLoopAndObserverStable) {
  const auto s = synthesize({{4.8, 24.0}, {1.0, 10.0, 35.0, 50.0, 24.0}}, 100.0, 1.0);
  const auto& m = s.model;
  EXPECT_LT(max_real_eigenvalue(m.A + m.B * s.gains.Kc), 0.0);
  EXPECT_LT(max_real_eigenvalue(m.A - s.gains.Ko * m.C), 0.0);
  // Observer poles sit at least `factor` times further out than the slowest closed-loop pole.
  EXPECT_LT(max_real_eigenvalue(m.A - s.gains.Ko * m.C),
            3.0 * max_real_eigenvalue(m.A + m.B * s.gains.Kc) * 0.999);
  const auto capped = synthesize({{4.8, 24.0}, {1.0, 10.0, 35.0, 50.0, 24.0}}, 1e6, 1.0, 3.0, 50.0);
  Eigen::EigenSolver<Eigen::MatrixXd> es(capped.model.A - capped.gains.Ko * capped.model.C, false);
  // Placement through the characteristic polynomial loses a few digits at q1 = 1e6.
  EXPECT_LE(es.eigenvalues().cwiseAbs().maxCoeff(), 50.0 * (1.0 + 1e-4));
}
