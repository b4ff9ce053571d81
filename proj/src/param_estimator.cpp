#include "alq/param_estimator.hpp"

#include <algorithm>
#include <cmath>

#include "alq/errors.hpp"

namespace alq {

ProjectionBox ProjectionBox::around(const Eigen::VectorXd& theta0, double frac, double lead_floor) {
  ProjectionBox box;
  const double scale = theta0.cwiseAbs().maxCoeff();
  Eigen::VectorXd half = frac * theta0.cwiseAbs();
  for (Eigen::Index i = 0; i < half.size(); ++i)
    if (half[i] == 0.0) half[i] = frac * 1e-9 * std::max(scale, 1.0);
  box.lower = theta0 - half;
  box.upper = theta0 + half;
  box.lead_index = 0;
  box.lead_floor = lead_floor;
  box.lead_sign = theta0.size() > 0 && theta0[0] < 0.0 ? -1.0 : 1.0;
  return box;
}

bool ProjectionBox::contains(const Eigen::VectorXd& theta) const {
  return (theta.array() >= lower.array()).all() && (theta.array() <= upper.array()).all();
}

Eigen::VectorXd project(const Eigen::VectorXd& theta, const ProjectionBox& box) {
  Eigen::VectorXd out = theta.cwiseMax(box.lower).cwiseMin(box.upper);
  if (box.lead_floor > 0.0 && out.size() > box.lead_index) {
    double& lead = out[box.lead_index];
    if (lead * box.lead_sign < box.lead_floor) lead = box.lead_sign * box.lead_floor;
  }
  return out;
}

ParametricModel::ParametricModel(int n, int m, double lambda0, double dt, Eigen::VectorXd theta0,
                                 ProjectionBox box)
    : ParametricModel(
          [&] {
            Poly l{1.0};
            for (int i = 0; i < n; ++i) l = poly_multiply(l, Poly{1.0, lambda0});
            return l;
          }(),
          m, dt, std::move(theta0), std::move(box)) {}

ParametricModel::ParametricModel(Poly lambda, int m, double dt, Eigen::VectorXd theta0,
                                 ProjectionBox box)
    : n_(static_cast<int>(lambda.size()) - 1),
      m_(m),
      dt_(dt),
      lambda_(std::move(lambda)),
      box_(std::move(box)) {
  if (n_ < 1 || m_ < 0 || m_ >= n_) throw PreconditionError("require 0 <= m < n");
  if (std::abs(lambda_.front() - 1.0) > 1e-12) throw PreconditionError("Lambda must be monic");
  for (const auto& r : poly_roots(lambda_))
    if (!(r.real() < 0.0)) throw PreconditionError("Lambda must be Hurwitz");
  if (!(dt > 0.0)) throw PreconditionError("dt must be positive");
  if (theta0.size() != n_ + m_ + 1) throw PreconditionError("theta length must be n + m + 1");
  if (box_.lower.size() != theta0.size() || box_.upper.size() != theta0.size())
    throw PreconditionError("projection box size mismatch");
  theta_ = project(theta0, box_);
  init_filters(dt);
}

void ParametricModel::init_filters(double dt) {
  // Controllable canonical realization of 1/Lambda: w^(n) = input - sum lambda_k w^(k).
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i + 1 < n_; ++i) F(i, i + 1) = 1.0;
  for (int k = 0; k < n_; ++k) F(n_ - 1, k) = -lambda_[static_cast<std::size_t>(n_ - k)];
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n_);
  g[n_ - 1] = 1.0;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n_, n_);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(I - 0.5 * dt * F);
  Ad_ = lu.solve(I + 0.5 * dt * F);
  Bd_ = lu.solve(0.5 * dt * g);
  u_.state = Eigen::VectorXd::Zero(n_);
  y_.state = Eigen::VectorXd::Zero(n_);
}

void ParametricModel::advance(Channel& c, double input) const {
  c.state = Ad_ * c.state + Bd_ * (c.last_input + input);
  c.last_input = input;
}

double ParametricModel::highest(const Channel& c, double input) const {
  double acc = input;
  for (int k = 0; k < n_; ++k) acc -= lambda_[static_cast<std::size_t>(n_ - k)] * c.state[k];
  return acc;
}

Regression ParametricModel::regress(double u, double y) {
  if (!std::isfinite(u) || !std::isfinite(y))
    throw PoisonedSignal("non-finite sample passed to the estimator");
  advance(u_, u);
  advance(y_, y);
  Regression r;
  r.z = highest(y_, y);
  r.phi.resize(n_ + m_ + 1);
  Eigen::Index i = 0;
  for (int k = m_; k >= 0; --k) r.phi[i++] = u_.state[k];
  for (int k = n_ - 1; k >= 0; --k) r.phi[i++] = -y_.state[k];
  return r;
}

void ParametricModel::adapt(const Regression& r, double gamma) {
  raw_error_ = r.z - theta_.dot(r.phi);
  m2_ = 1.0 + r.phi.squaredNorm();
  eps_ = raw_error_ / m2_;
  theta_ = project(theta_ + dt_ * gamma * eps_ * r.phi, box_);
}

PolynomialPlant ParametricModel::plant() const {
  PolynomialPlant p;
  p.numerator.assign(theta_.data(), theta_.data() + m_ + 1);
  p.denominator.resize(static_cast<std::size_t>(n_) + 1);
  p.denominator[0] = 1.0;
  for (int k = 0; k < n_; ++k) p.denominator[static_cast<std::size_t>(k) + 1] = theta_[m_ + 1 + k];
  return p;
}

Eigen::VectorXd ParametricModel::theta_of(const PolynomialPlant& plant, int n, int m) {
  if (plant.denominator_degree() != n || plant.numerator_degree() > m)
    throw PreconditionError("plant degrees do not match the parametric model");
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(n + m + 1);
  const int pad = m - plant.numerator_degree();
  for (int i = 0; i <= plant.numerator_degree(); ++i)
    theta[pad + i] = plant.numerator[static_cast<std::size_t>(i)];
  for (int k = 0; k < n; ++k) theta[m + 1 + k] = plant.denominator[static_cast<std::size_t>(k) + 1];
  return theta;
}

BandLimitedNoise::BandLimitedNoise(std::uint64_t seed, double f_low, double f_high, double fs,
                                   double amplitude)
    : rng_(seed),
      band_({butterworth_highpass(f_low, fs), butterworth_lowpass(f_high, fs)}),
      gain_(0.0) {
  if (!(0.0 < f_low && f_low < f_high && f_high < fs / 2))
    throw PreconditionError("noise band must satisfy 0 < f_low < f_high < fs/2");
  // Unit-variance white noise through an ideal band of width B has variance 2B/fs.
  gain_ = amplitude / std::sqrt(2.0 * (f_high - f_low) / fs);
}

double BandLimitedNoise::next() { return gain_ * band_.filter(normal_(rng_)); }

}  // namespace alq
