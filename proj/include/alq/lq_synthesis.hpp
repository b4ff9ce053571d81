#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "alq/vehicle_plant.hpp"

namespace alq {

/// Controllable canonical realization of Z_p / R_p.
struct StateSpaceModel {
  Eigen::MatrixXd A;
  Eigen::VectorXd B;
  Eigen::RowVectorXd C;
  /// Smallest relative distance between a zero and a pole.
  double coprimeness = 0.0;
  /// Set when Z_p and R_p share (nearly) a root, i.e. (A, C) is close to unobservable.
  bool near_common_roots = false;

  Eigen::Index order() const { return A.rows(); }
};

struct LqWeights {
  Eigen::MatrixXd Q;
  double R = 1.0;

  /// Q = q1 C' C, penalizing only the output (angle-error) channel.
  static LqWeights output_penalty(const Eigen::RowVectorXd& C, double q1, double R);
  void validate() const;
};

struct Gains {
  Eigen::RowVectorXd Kc;  // u = Kc x
  Eigen::VectorXd Ko;
  Eigen::MatrixXd P;
};

inline constexpr double kCoprimeTolerance = 1e-6;

StateSpaceModel realize(const PolynomialPlant& plant);

/// Stabilizing solution of A'P + PA - P B R^-1 B' P + Q = 0.
///
/// Uses the stable invariant subspace of the Hamiltonian [[A, -B R^-1 B'], [-Q, -A']]
/// from its eigendecomposition, then polishes with Newton-Kleinman steps.
Eigen::MatrixXd solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, double R);

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                     const Eigen::MatrixXd& Q, double R, const Eigen::MatrixXd& P);

/// Solves A' X + X A = -M for X.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M);

/// Kc = -R^-1 B' P, so that A + B Kc is Hurwitz.
Eigen::RowVectorXd feedback_gain(const Eigen::MatrixXd& P, const Eigen::VectorXd& B, double R);

/// Ackermann placement on the dual system: eig(A - Ko C) = poles.
Eigen::VectorXd observer_gain(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& C,
                              const std::vector<std::complex<double>>& poles);

/// Real observer poles at `factor` times the closed-loop pole magnitudes,
/// nudged apart (ratio 1.1) so that no two coincide. With `max_magnitude`, the
/// fastest pole is clipped to it and the rest are kept below at the same ratio.
std::vector<std::complex<double>> default_observer_poles(
    const Eigen::MatrixXd& closed_loop, double factor = 3.0,
    std::optional<double> max_magnitude = std::nullopt);

double control_torque(const Eigen::RowVectorXd& Kc, const Eigen::VectorXd& x_hat,
                      std::optional<double> limit = std::nullopt);

double max_real_eigenvalue(const Eigen::MatrixXd& M);

struct Synthesis {
  StateSpaceModel model;
  Gains gains;
};

/// realize -> solve_care -> feedback_gain -> observer_gain, with Q = q1 C'C.
Synthesis synthesize(const PolynomialPlant& plant, double q1, double R,
                     double observer_factor = 3.0,
                     std::optional<double> observer_pole_limit = std::nullopt);

}  // namespace alq
