#pragma once

// Force-aware Cartesian admittance controller.
//
// Translational law, integrated at the controller rate:
//
//   M x_r'' + D_eff x_r' + K_eff (x_r - x_cmd) = F_ext - F_cmd
//
// With contact predicted (c = 1) and normal regulation enabled, the commanded
// force F_cmd = f n uses
//
//   f = f_H + n . K (x_cmd - x_r) + n . D x_r'
//
// which cancels the spring and damping terms along n and leaves
// m x_n'' + 2 d x_n' = f_ext,n - f_H. Tangent stiffening scales the stiffness
// along the projected motion direction t by `tangent_scale` and recomputes the
// matching over-damped damping.
//
// Sign convention: n is the outward contact normal (environment -> tool), so
// the robot presses along -n and the environment reaction F_ext points along
// +n.

#include "forcesim/geometry.hpp"

#include <array>
#include <optional>

namespace forcesim {

struct AdmittanceConfig {
  double mass = 1.0;             // kg
  double stiffness = 50.0;       // N/m
  double damping_ratio = 2.0;    // xi
  double rot_mass = 0.1;         // kg m^2
  double rot_stiffness = 10.0;   // Nm/rad
  double tangent_scale = 4.0;
  bool enable_normal_regulation = false;
  bool enable_tangent_stiffening = false;
  double target_force = 0.0;     // f_H, N
  double force_deadband = 2.0;   // N
  double torque_deadband = 1.0;  // Nm

  /// Throws NonPositiveParameter on any violated invariant.
  void validate() const;
  double damping() const;
  double rot_damping() const;
};

struct ControllerState {
  Vec3 position = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  Rotation orientation;
  Vec3 angular_velocity = Vec3::Zero();
};

struct ControllerCommand {
  Vec3 position = Vec3::Zero();
  Rotation orientation;
  double gripper = 0.0;
  /// Unit when `contact`; the zero vector is the out-of-contact placeholder.
  Vec3 normal = Vec3::Zero();
  bool contact = false;
};

struct WrenchSample {
  Vec3 force = Vec3::Zero();
  Vec3 torque = Vec3::Zero();
};

/// d = 2 xi sqrt(m k). Throws NonPositiveParameter unless all inputs > 0.
double compute_damping(double mass, double stiffness, double damping_ratio);

/// Radial deadband: magnitudes below the band map to zero, larger ones shrink
/// by the band along the same direction. Applied to force and torque.
WrenchSample apply_deadband(const WrenchSample& w, const AdmittanceConfig& cfg);

/// F_cmd; zero when c = 0 or normal regulation is disabled.
Vec3 commanded_force(const ControllerCommand& cmd, const ControllerState& st,
                     const AdmittanceConfig& cfg);

/// Stiffening direction t, or nullopt when stiffening does not apply (disabled,
/// c = 0, or degenerate projection).
std::optional<UnitVec3> stiffening_direction(const ControllerCommand& cmd, const ControllerState& st,
                                             const AdmittanceConfig& cfg);

Mat3 effective_stiffness(const ControllerCommand& cmd, const ControllerState& st,
                         const AdmittanceConfig& cfg);
Mat3 effective_damping(const ControllerCommand& cmd, const ControllerState& st,
                       const AdmittanceConfig& cfg);

/// Values computed during one translational step, for logging.
struct TranslationDiagnostics {
  Vec3 commanded_force = Vec3::Zero();
  Mat3 stiffness = Mat3::Zero();
  /// Ascending eigenvalues of the effective stiffness.
  std::array<double, 3> stiffness_eigenvalues{};
};

/// Semi-implicit Euler step of the translational law. `force_ext` must already
/// be deadbanded. dt in (0, 0.01]. Throws NonFiniteState.
ControllerState step_translation(const ControllerState& st, const ControllerCommand& cmd,
                                 const Vec3& force_ext, double dt, const AdmittanceConfig& cfg,
                                 TranslationDiagnostics* diag = nullptr);

/// Semi-implicit Euler step of the rotational law
///   rot_mass w' + d_rot w + rot_stiffness theta_err = tau_ext
/// where theta_err is the world-frame rotation vector of q_r q_cmd^-1.
ControllerState step_rotation(const ControllerState& st, const ControllerCommand& cmd,
                              const Vec3& torque_ext, double dt, const AdmittanceConfig& cfg);

/// One controller tick: deadband, commanded force, impedance, integrate.
ControllerState admittance_step(const ControllerState& st, const ControllerCommand& cmd,
                                const WrenchSample& raw_wrench, double dt,
                                const AdmittanceConfig& cfg,
                                TranslationDiagnostics* diag = nullptr,
                                WrenchSample* filtered = nullptr);

}  // namespace forcesim
