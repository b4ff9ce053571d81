#pragma once

// Trailing-arm quarter-car plant.
//
// Nominal equation of motion
// --------------------------
// Generalized coordinates q = (a, y_b): arm angle a (rad, measured downward
// from the horizontal through the arm pivot, so increasing a lowers the wheel
// relative to the body) and body heave y_b (m, pivot height, up positive).
// Planar positions relative to the pivot (x forward, z up):
//
//   arm centre of mass   p_arm(a) = r_arm (cos a, -sin a)
//   wheel contact        p_w(a)   = L_a   (cos a, -sin a)
//   cylinder crank       p_c(a)   = l_d   (cos(phi0 - a), sin(phi0 - a))
//   damper mass m_d      p_d(a)   = p_c(a) + l_b (cos beta, sin beta)
//   upper link mass m_u  p_u(a)   = l_u (cos beta, sin beta)
//   link angle           beta(a)  = beta0 + kappa (a - a_ref)
//
// With the moving point masses i in {arm, d, u} and M_all = M_tot + m_arm + m_d + m_u:
//
//   J   = I_arm + sum_i m_i |p_i'|^2            Sz = sum_i m_i z_i'
//   Ca  = sum_i m_i (p_i' . p_i'')              Cy = sum_i m_i z_i''
//
//   [ J   Sz    ] [ a''  ]   [ Q_a - g Sz - Ca a'^2     ]
//   [ Sz  M_all ] [ y_b''] = [ Q_y - g M_all - Cy a'^2  ]
//
// Generalized forces:
//
//   F_c = k_t (y_0 - y_w) + c_t (y_0' - y_w'),    y_w = y_b - L_a sin a   (road contact)
//   Q_a = tau + f_e(a, a') l_d sin(beta + a - phi0)
//         - k_p (a - a_p0) - c_p a' - F_c L_a cos a
//   Q_y = F_c
//
// tau is the actuator torque at the pivot; f_e is the hydraulic cylinder force
// (positive pushes the arm towards larger a); k_p/c_p is the passive torsional
// spring-damper at the pivot. The system is affine in tau at fixed state.
// The default parameter set is a desk-scale vehicle, not measured data.

#include <array>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "alq/polynomial.hpp"

namespace alq {

/// Cylinder force (N) as a function of arm angle (rad) and arm rate (rad/s).
using CylinderLaw = std::function<double(double arm_angle, double arm_rate)>;

/// Linear gas spring: f_e = preload + rate * stroke(a), stroke(a) = l_d (a_ref - a).
struct GasSpring {
  double preload = 0.0;  // N
  double rate = 0.0;     // N/m
  double ref_angle = 0.0;
  double crank = 0.0;    // l_d

  double stroke(double arm_angle) const { return crank * (ref_angle - arm_angle); }
  double force(double arm_angle) const { return preload + rate * stroke(arm_angle); }
  CylinderLaw law() const;
};

struct PhysicalParams {
  double arm_inertia = 2.0;         // I_arm about the arm centre of mass, kg m^2
  double arm_mass = 80.0;           // kg
  double arm_com_radius = 0.30;     // m
  double arm_length = 0.55;         // m
  double body_mass = 4000.0;        // M_tot, kg
  double upper_link_mass = 10.0;    // kg
  double upper_link_length = 0.40;  // m
  double damper_mass = 15.0;        // kg
  double link_offset_b = 0.20;      // m
  double link_offset_d = 0.25;      // m
  double linkage_offset_angle = 0.7155849933176751;  // 41 deg
  double gravity = 9.81;

  double link_angle_ref = 1.2;  // beta at a_ref
  double link_ratio = 0.5;      // kappa = d beta / d a
  double linkage_ref_angle = 0.35;

  GasSpring cylinder{};
  /// Overrides the gas spring when set.
  CylinderLaw cylinder_law{};

  double passive_stiffness = 0.0;  // k_p, N m/rad
  double passive_damping = 0.0;    // c_p, N m s/rad
  double passive_rest_angle = 0.35;

  double contact_stiffness = 1.0e6;  // k_t, N/m
  double contact_damping = 2.0e3;    // c_t, N s/m

  double arm_angle_min = 0.0;
  double arm_angle_max = 0.7;

  double cylinder_force(double arm_angle, double arm_rate) const;
  double total_mass() const { return body_mass + arm_mass + damper_mass + upper_link_mass; }
  /// Throws InvalidParameter when an invariant fails.
  void validate() const;
};

struct PlantState {
  double arm_angle = 0.0;
  double arm_rate = 0.0;
  double body_heave = 0.0;
  double body_rate = 0.0;

  Eigen::Vector4d vec() const { return {arm_angle, arm_rate, body_heave, body_rate}; }
  static PlantState from(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

struct PlantStateDerivative {
  double arm_rate = 0.0;
  double arm_accel = 0.0;
  double body_rate = 0.0;
  double body_accel = 0.0;

  Eigen::Vector4d vec() const { return {arm_rate, arm_accel, body_rate, body_accel}; }
};

double link_angle(const PhysicalParams& p, double arm_angle);

PlantStateDerivative eval_dynamics(const PlantState& x, double torque, double road_height,
                                   double road_rate, const PhysicalParams& p);

/// Kinetic + gravitational + elastic energy (cylinder work excluded).
double mechanical_energy(const PlantState& x, double road_height, const PhysicalParams& p);

/// One fixed-step RK4 step; road sampled at t, t + dt/2, t + dt.
PlantState rk4_step(const PlantState& x, double torque, double t, double dt,
                    const std::function<std::pair<double, double>(double)>& road,
                    const PhysicalParams& p);

struct Equilibrium {
  PlantState state;
  double holding_torque = 0.0;
};

/// Static equilibrium at the target arm angle on a road at `road_height`.
Equilibrium equilibrium(const PhysicalParams& p, double target_arm_angle,
                        double road_height = 0.0);

/// Arm angle at which the holding torque vanishes (passive rest position).
double passive_equilibrium_angle(const PhysicalParams& p);

/// Strictly proper SISO model from torque perturbation to arm-angle perturbation.
struct PolynomialPlant {
  Poly numerator;    // Z_p, descending powers
  Poly denominator;  // R_p, descending powers, monic

  int numerator_degree() const { return static_cast<int>(numerator.size()) - 1; }
  int denominator_degree() const { return static_cast<int>(denominator.size()) - 1; }
  /// Throws PreconditionError unless monic, strictly proper and |Z_p lead| >= lead_floor.
  void validate(double lead_floor = 0.0) const;
  double dc_gain() const { return numerator.back() / denominator.back(); }
};

struct Linearization {
  PolynomialPlant plant;
  Eigen::Matrix4d A;
  Eigen::Vector4d B;
  double jacobian_condition = 0.0;
  std::optional<std::string> warning;
};

/// Central-difference linearization around an equilibrium.
Linearization linearize(const PhysicalParams& p, const PlantState& eq, double holding_torque);

}  // namespace alq
