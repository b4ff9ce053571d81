#include "alq/adaptive_observer.hpp"

#include <cmath>

#include "alq/errors.hpp"

namespace alq {
namespace {

void check_in_range(double r, const ReferenceAnchors& a) {
  if (!(r >= a.r_min && r <= a.r_max))
    throw OutOfRange("reference " + std::to_string(r) + " outside [r_min, r_max]");
}

}  // namespace

Eigen::VectorXd blend(const Eigen::VectorXd& x1, const Eigen::VectorXd& x2,
                      const Eigen::VectorXd& x3, double r, const ReferenceAnchors& a) {
  check_in_range(r, a);
  if (r >= a.r_mid) {
    if (a.r_max == a.r_mid) return x2;
    const double span = a.r_max - a.r_mid;
    return x3 * ((r - a.r_mid) / span) + x2 * ((a.r_max - r) / span);
  }
  const double span = a.r_mid - a.r_min;
  return x1 * ((a.r_mid - r) / span) + x2 * ((r - a.r_min) / span);
}

MultiObserver::MultiObserver(Eigen::Index order, ReferenceAnchors anchors, double r0,
                             bool allow_degenerate_anchors)
    : anchors_(anchors), r_(r0) {
  const bool ordered = anchors.r_min < anchors.r_mid && anchors.r_mid < anchors.r_max;
  const bool degenerate = anchors.r_min == anchors.r_mid && anchors.r_mid == anchors.r_max;
  if (!ordered && !(allow_degenerate_anchors && degenerate))
    throw PreconditionError("anchors must satisfy r_min < r_mid < r_max");
  check_in_range(r0, anchors);
  x_hat_ = Eigen::VectorXd::Zero(order);
  for (auto& x : x_) x = Eigen::VectorXd::Zero(order);
}

double MultiObserver::anchor_reference(int k) const {
  switch (k) {
    case 0: return anchors_.r_min;
    case 1: return anchors_.r_mid;
    default: return anchors_.r_max;
  }
}

std::array<double, 3> MultiObserver::deltas() const {
  return {anchors_.r_min - r_, anchors_.r_mid - r_, anchors_.r_max - r_};
}

void MultiObserver::step(double y, const Gains& g, const StateSpaceModel& m, double dt) {
  if (!std::isfinite(y)) throw PoisonedSignal("non-finite measurement passed to the observer");
  const Eigen::VectorXd control = m.B * g.Kc.dot(x_hat_);
  std::array<Eigen::VectorXd, 3> next;
  for (int k = 0; k < 3; ++k) {
    const auto& xk = x_[static_cast<std::size_t>(k)];
    const double ek = y - anchor_reference(k);
    next[static_cast<std::size_t>(k)] =
        xk + dt * (m.A * xk + control - g.Ko * (m.C.dot(xk) - ek));
  }
  const double e = y - r_;
  x_hat_ = x_hat_ + dt * (m.A * x_hat_ + control - g.Ko * (m.C.dot(x_hat_) - e));
  x_ = std::move(next);
}

void MultiObserver::on_reference_change(double r_new, bool blending) {
  check_in_range(r_new, anchors_);
  if (blending) x_hat_ = blend(x_[0], x_[1], x_[2], r_new, anchors_);
  r_ = r_new;
}

void MultiObserver::reset() {
  x_hat_.setZero();
  for (auto& x : x_) x.setZero();
}

}  // namespace alq
