#include "alq/vehicle_plant.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/roots.hpp>

#include "alq/errors.hpp"

namespace alq {
namespace {

struct Kinematics {
  Eigen::Vector2d d1;  // d p / d a
  Eigen::Vector2d d2;  // d^2 p / d a^2
};

struct MassTerms {
  double J = 0.0;
  double Sz = 0.0;
  double Ca = 0.0;
  double Cy = 0.0;
  double gravity_height = 0.0;  // sum m_i z_i
};

MassTerms mass_terms(const PhysicalParams& p, double a) {
  const double beta = link_angle(p, a);
  const double kappa = p.link_ratio;
  const double phi = p.linkage_offset_angle;

  const double ca = std::cos(a), sa = std::sin(a);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cpa = std::cos(phi - a), spa = std::sin(phi - a);

  const Kinematics arm{p.arm_com_radius * Eigen::Vector2d(-sa, -ca),
                       p.arm_com_radius * Eigen::Vector2d(-ca, sa)};
  const Kinematics crank{p.link_offset_d * Eigen::Vector2d(spa, -cpa),
                         p.link_offset_d * Eigen::Vector2d(-cpa, -spa)};
  const Kinematics link{kappa * Eigen::Vector2d(-sb, cb),
                        kappa * kappa * Eigen::Vector2d(-cb, -sb)};
  const Kinematics damper{crank.d1 + p.link_offset_b * link.d1,
                          crank.d2 + p.link_offset_b * link.d2};
  const Kinematics upper{p.upper_link_length * link.d1, p.upper_link_length * link.d2};

  const double z_arm = -p.arm_com_radius * sa;
  const double z_d = p.link_offset_d * spa + p.link_offset_b * sb;
  const double z_u = p.upper_link_length * sb;

  MassTerms t;
  t.J = p.arm_inertia;
  auto add = [&t](double m, const Kinematics& k, double z) {
    t.J += m * k.d1.squaredNorm();
    t.Sz += m * k.d1.y();
    t.Ca += m * k.d1.dot(k.d2);
    t.Cy += m * k.d2.y();
    t.gravity_height += m * z;
  };
  add(p.arm_mass, arm, z_arm);
  add(p.damper_mass, damper, z_d);
  add(p.upper_link_mass, upper, z_u);
  return t;
}

double wheel_height(const PhysicalParams& p, const PlantState& x) {
  return x.body_heave - p.arm_length * std::sin(x.arm_angle);
}

}  // namespace

CylinderLaw GasSpring::law() const {
  return [s = *this](double arm_angle, double) { return s.force(arm_angle); };
}

double PhysicalParams::cylinder_force(double arm_angle, double arm_rate) const {
  if (cylinder_law) return cylinder_law(arm_angle, arm_rate);
  return cylinder.force(arm_angle);
}

void PhysicalParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw InvalidParameter(std::string(name) + " must be finite and strictly positive");
  };
  positive(arm_inertia, "arm_inertia");
  positive(arm_mass, "arm_mass");
  positive(arm_com_radius, "arm_com_radius");
  positive(arm_length, "arm_length");
  positive(body_mass, "body_mass");
  positive(upper_link_mass, "upper_link_mass");
  positive(upper_link_length, "upper_link_length");
  positive(damper_mass, "damper_mass");
  positive(link_offset_b, "link_offset_b");
  positive(link_offset_d, "link_offset_d");
  if (!(linkage_offset_angle > 0.0 && linkage_offset_angle < M_PI / 2))
    throw InvalidParameter("linkage_offset_angle must lie in (0, pi/2)");
  if (!(gravity >= 0.0)) throw InvalidParameter("gravity must be non-negative");
  if (passive_stiffness < 0.0 || passive_damping < 0.0 || contact_stiffness < 0.0 ||
      contact_damping < 0.0)
    throw InvalidParameter("stiffness and damping coefficients must be non-negative");
  if (!(arm_angle_min < arm_angle_max))
    throw InvalidParameter("arm_angle_min must be below arm_angle_max");
  constexpr int kProbes = 64;
  for (int i = 0; i <= kProbes; ++i) {
    const double a = arm_angle_min + (arm_angle_max - arm_angle_min) * i / kProbes;
    if (!std::isfinite(cylinder_force(a, 0.0)))
      throw InvalidParameter("cylinder force is not finite inside the arm-angle range");
  }
}

double link_angle(const PhysicalParams& p, double arm_angle) {
  return p.link_angle_ref + p.link_ratio * (arm_angle - p.linkage_ref_angle);
}

PlantStateDerivative eval_dynamics(const PlantState& x, double torque, double road_height,
                                   double road_rate, const PhysicalParams& p) {
  const double a = x.arm_angle;
  const double ad = x.arm_rate;
  const MassTerms m = mass_terms(p, a);
  const double M = p.total_mass();

  const double y_w = wheel_height(p, x);
  const double y_w_rate = x.body_rate - p.arm_length * std::cos(a) * ad;
  const double contact =
      p.contact_stiffness * (road_height - y_w) + p.contact_damping * (road_rate - y_w_rate);

  const double beta = link_angle(p, a);
  const double cylinder_torque = p.cylinder_force(a, ad) * p.link_offset_d *
                                 std::sin(beta + a - p.linkage_offset_angle);
  const double passive = -p.passive_stiffness * (a - p.passive_rest_angle) - p.passive_damping * ad;
  const double Qa = torque + cylinder_torque + passive - contact * p.arm_length * std::cos(a);
  const double Qy = contact;

  const double rhs_a = Qa - p.gravity * m.Sz - m.Ca * ad * ad;
  const double rhs_y = Qy - p.gravity * M - m.Cy * ad * ad;

  const double det = m.J * M - m.Sz * m.Sz;
  if (!(std::abs(det) > 1e-12 * m.J * M))
    throw DegenerateGeometry("effective inertia matrix is singular at arm angle " +
                             std::to_string(a));

  PlantStateDerivative d;
  d.arm_rate = ad;
  d.body_rate = x.body_rate;
  d.arm_accel = (M * rhs_a - m.Sz * rhs_y) / det;
  d.body_accel = (m.J * rhs_y - m.Sz * rhs_a) / det;
  return d;
}

double mechanical_energy(const PlantState& x, double road_height, const PhysicalParams& p) {
  const MassTerms m = mass_terms(p, x.arm_angle);
  const double M = p.total_mass();
  const double kinetic = 0.5 * m.J * x.arm_rate * x.arm_rate +
                         m.Sz * x.arm_rate * x.body_rate + 0.5 * M * x.body_rate * x.body_rate;
  const double gravity = p.gravity * (M * x.body_heave + m.gravity_height);
  const double da = x.arm_angle - p.passive_rest_angle;
  const double dc = road_height - wheel_height(p, x);
  const double elastic = 0.5 * p.passive_stiffness * da * da + 0.5 * p.contact_stiffness * dc * dc;
  return kinetic + gravity + elastic;
}

PlantState rk4_step(const PlantState& x, double torque, double t, double dt,
                    const std::function<std::pair<double, double>(double)>& road,
                    const PhysicalParams& p) {
  auto f = [&](const Eigen::Vector4d& v, double tt) {
    const auto [h, hd] = road(tt);
    return eval_dynamics(PlantState::from(v), torque, h, hd, p).vec();
  };
  const Eigen::Vector4d x0 = x.vec();
  const Eigen::Vector4d k1 = f(x0, t);
  const Eigen::Vector4d k2 = f(x0 + 0.5 * dt * k1, t + 0.5 * dt);
  const Eigen::Vector4d k3 = f(x0 + 0.5 * dt * k2, t + 0.5 * dt);
  const Eigen::Vector4d k4 = f(x0 + dt * k3, t + dt);
  return PlantState::from(x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

Equilibrium equilibrium(const PhysicalParams& p, double target_arm_angle, double road_height) {
  if (!(target_arm_angle >= p.arm_angle_min && target_arm_angle <= p.arm_angle_max))
    throw OutOfRange("equilibrium target arm angle outside [arm_angle_min, arm_angle_max]");

  // Unknowns (body heave, torque); residual (arm accel, body accel) at rest.
  const double M = p.total_mass();
  const double k = p.contact_stiffness > 0.0 ? p.contact_stiffness : 1.0;
  Eigen::Vector2d z(road_height + p.arm_length * std::sin(target_arm_angle) - M * p.gravity / k,
                    0.0);
  auto residual = [&](const Eigen::Vector2d& v) {
    const PlantState s{target_arm_angle, 0.0, v[0], 0.0};
    const auto d = eval_dynamics(s, v[1], road_height, 0.0, p);
    return Eigen::Vector2d(d.arm_accel, d.body_accel);
  };

  constexpr int kMaxIter = 50;
  for (int it = 0; it < kMaxIter; ++it) {
    const Eigen::Vector2d r = residual(z);
    if (r.cwiseAbs().maxCoeff() < 1e-13 * (1.0 + p.gravity)) {
      return {PlantState{target_arm_angle, 0.0, z[0], 0.0}, z[1]};
    }
    Eigen::Matrix2d jac;
    for (int j = 0; j < 2; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(z[j]));
      Eigen::Vector2d zp = z, zm = z;
      zp[j] += h;
      zm[j] -= h;
      jac.col(j) = (residual(zp) - residual(zm)) / (2.0 * h);
    }
    const Eigen::Vector2d step = jac.fullPivLu().solve(r);
    if (!step.allFinite()) break;
    z -= step;
    if (step.cwiseAbs().maxCoeff() <= 1e-15 * (1.0 + z.cwiseAbs().maxCoeff())) {
      return {PlantState{target_arm_angle, 0.0, z[0], 0.0}, z[1]};
    }
  }
  throw NoEquilibrium("equilibrium solve did not converge at arm angle " +
                      std::to_string(target_arm_angle));
}

double passive_equilibrium_angle(const PhysicalParams& p) {
  auto torque = [&p](double a) { return equilibrium(p, a).holding_torque; };
  const double lo = p.arm_angle_min, hi = p.arm_angle_max;
  const double f_lo = torque(lo), f_hi = torque(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if ((f_lo > 0.0) == (f_hi > 0.0))
    throw NoEquilibrium("holding torque does not change sign inside the arm-angle range");
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      torque, lo, hi, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 0.5 * (a + b);
}

void PolynomialPlant::validate(double lead_floor) const {
  if (denominator.empty() || numerator.empty())
    throw PreconditionError("empty plant polynomial");
  if (std::abs(denominator.front() - 1.0) > 1e-12)
    throw PreconditionError("denominator polynomial must be monic");
  if (!(denominator_degree() > numerator_degree()))
    throw PreconditionError("plant must be strictly proper");
  if (std::abs(numerator.front()) < lead_floor || numerator.front() == 0.0)
    throw PreconditionError("leading numerator coefficient below floor");
}

Linearization linearize(const PhysicalParams& p, const PlantState& eq, double holding_torque) {
  auto f = [&](const Eigen::Vector4d& v, double tau) {
    return eval_dynamics(PlantState::from(v), tau, 0.0, 0.0, p).vec();
  };
  const Eigen::Vector4d x0 = eq.vec();
  Linearization lin;
  for (int j = 0; j < 4; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(x0[j]));
    Eigen::Vector4d xp = x0, xm = x0;
    xp[j] += h;
    xm[j] -= h;
    lin.A.col(j) = (f(xp, holding_torque) - f(xm, holding_torque)) / (2.0 * h);
  }
  const double ht = 1e-6 * std::max(1.0, std::abs(holding_torque));
  lin.B = (f(x0, holding_torque + ht) - f(x0, holding_torque - ht)) / (2.0 * ht);

  Eigen::JacobiSVD<Eigen::Matrix4d> svd(lin.A);
  const auto& sv = svd.singularValues();
  lin.jacobian_condition = sv[3] > 0.0 ? sv[0] / sv[3] : std::numeric_limits<double>::infinity();
  if (lin.jacobian_condition > 1e12)
    lin.warning = "state Jacobian ill-conditioned (cond = " +
                  std::to_string(lin.jacobian_condition) + ")";

  const Eigen::RowVector4d C(1.0, 0.0, 0.0, 0.0);
  const auto tf = transfer_function(lin.A, lin.B, C);
  lin.plant.denominator = tf.denominator;
  lin.plant.numerator = poly_trim(tf.numerator, 1e-14);
  return lin;
}

}  // namespace alq
