#pragma once

// Normalized-gradient estimation of a SISO plant Z_p(s)/R_p(s) in the linear
// parametric form z = theta*' phi:
//
//   z   = s^n / Lambda(s) y
//   phi = [ s^m/Lambda u, ..., 1/Lambda u, -s^(n-1)/Lambda y, ..., -1/Lambda y ]
//   theta = [ b_m, ..., b_0, a_(n-1), ..., a_0 ]
//
// with a monic Hurwitz filter Lambda of degree n. The filters are discretized
// with the trapezoidal rule.

#include <cstdint>
#include <random>
#include <span>

#include <Eigen/Dense>

#include "alq/polynomial.hpp"
#include "alq/sos_filter.hpp"
#include "alq/vehicle_plant.hpp"

namespace alq {

/// Per-coefficient clamp plus a sign-preserving floor on the leading numerator coefficient.
struct ProjectionBox {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::Index lead_index = 0;
  double lead_floor = 0.0;
  double lead_sign = 1.0;

  /// [theta0 - frac |theta0|, theta0 + frac |theta0|]; components that are zero get
  /// a half-width of frac * 1e-9 * max|theta0|.
  static ProjectionBox around(const Eigen::VectorXd& theta0, double frac, double lead_floor);
  bool contains(const Eigen::VectorXd& theta) const;
};

Eigen::VectorXd project(const Eigen::VectorXd& theta, const ProjectionBox& box);

struct Regression {
  double z = 0.0;
  Eigen::VectorXd phi;
};

class ParametricModel {
 public:
  /// Lambda(s) = (s + lambda0)^n.
  ParametricModel(int n, int m, double lambda0, double dt, Eigen::VectorXd theta0,
                  ProjectionBox box);
  /// Explicit monic Lambda (descending, length n + 1); throws unless Hurwitz.
  ParametricModel(Poly lambda, int m, double dt, Eigen::VectorXd theta0, ProjectionBox box);

  /// Advance the filters with the newest samples and return (z, phi).
  Regression regress(double u, double y);
  /// theta <- project(theta + dt gamma eps phi), eps = (z - theta' phi) / m^2, m^2 = 1 + phi' phi.
  void adapt(const Regression& r, double gamma);

  const Eigen::VectorXd& theta() const { return theta_; }
  void set_theta(const Eigen::VectorXd& theta) { theta_ = project(theta, box_); }
  double last_error() const { return eps_; }
  double last_m2() const { return m2_; }
  double last_prediction_error() const { return raw_error_; }
  const ProjectionBox& box() const { return box_; }
  int n() const { return n_; }
  int m() const { return m_; }
  double dt() const { return dt_; }

  /// theta as a polynomial plant (monic denominator).
  PolynomialPlant plant() const;
  static Eigen::VectorXd theta_of(const PolynomialPlant& plant, int n, int m);

 private:
  struct Channel {
    Eigen::VectorXd state;  // w, w', ..., w^(n-1) with Lambda(s) w = input
    double last_input = 0.0;
  };
  void init_filters(double dt);
  void advance(Channel& c, double input) const;
  double highest(const Channel& c, double input) const;

  int n_;
  int m_;
  double dt_;
  Poly lambda_;
  Eigen::MatrixXd Ad_;
  Eigen::VectorXd Bd_;
  Channel u_, y_;
  Eigen::VectorXd theta_;
  ProjectionBox box_;
  double eps_ = 0.0;
  double m2_ = 1.0;
  double raw_error_ = 0.0;
};

/// Seeded white noise band-limited by 2nd-order Butterworth high- and low-pass sections.
class BandLimitedNoise {
 public:
  BandLimitedNoise(std::uint64_t seed, double f_low, double f_high, double fs, double amplitude);
  double next();

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  SosCascade band_;
  double gain_;
};

}  // namespace alq
