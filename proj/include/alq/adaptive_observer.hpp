#pragma once

// Reference-change tolerant observer.
//
// Besides the main estimate x_hat (driven by e = y - r), three anchor
// estimates x_1, x_2, x_3 run in parallel, each driven by the error against a
// fixed anchor reference r_min, r_mid, r_max:
//
//   x_k <- x_k + dt { A x_k + B Kc x_hat - Ko (C x_k - (y - r_k)) }
//   x_hat <- x_hat + dt { (A + B Kc) x_hat - Ko (C x_hat - (y - r)) }
//
// All four share the control channel B Kc x_hat. Because the updates are
// linear in the anchor offset, any convex combination of two anchor
// estimates is exactly the estimate an observer conditioned on the
// interpolated reference would hold. When the reference changes, x_hat is
// replaced by that interpolation instead of being carried over.

#include <array>

#include <Eigen/Dense>

#include "alq/lq_synthesis.hpp"

namespace alq {

struct ReferenceAnchors {
  double r_min = 0.0;
  double r_mid = 0.5;
  double r_max = 1.0;
};

/// Piecewise-linear interpolation of the anchor states at reference r.
Eigen::VectorXd blend(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                      const Eigen::VectorXd& x3, double r, const ReferenceAnchors& anchors);

class MultiObserver {
 public:
  /// All estimates start at zero.
  MultiObserver(Eigen::Index order, ReferenceAnchors anchors, double r0,
                bool allow_degenerate_anchors = false);

  /// One explicit-Euler step of all four estimates from the same previous x_hat.
  void step(double y, const Gains& gains, const StateSpaceModel& model, double dt);

  /// Replace x_hat by the anchor blend at r_new (blending on) or keep it (blending off).
  void on_reference_change(double r_new, bool blending = true);

  const Eigen::VectorXd& x_hat() const { return x_hat_; }
  const Eigen::VectorXd& anchor_state(int k) const { return x_[static_cast<std::size_t>(k)]; }
  double reference() const { return r_; }
  const ReferenceAnchors& anchors() const { return anchors_; }
  /// Delta_k = r_k - r.
  std::array<double, 3> deltas() const;
  double anchor_reference(int k) const;

  void set_x_hat(const Eigen::VectorXd& x) { x_hat_ = x; }
  void reset();

 private:
  ReferenceAnchors anchors_;
  double r_;
  Eigen::VectorXd x_hat_;
  std::array<Eigen::VectorXd, 3> x_;
};

}  // namespace alq
