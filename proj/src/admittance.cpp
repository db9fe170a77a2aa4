#include "forcesim/admittance.hpp"

#include "forcesim/errors.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace forcesim {
namespace {

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw NonPositiveParameter(std::string(name) + " must be positive and finite");
  }
}

Vec3 shrink(const Vec3& v, double band) {
  const double mag = v.norm();
  if (mag <= band) return Vec3::Zero();
  return v * ((mag - band) / mag);
}

void check_dt(double dt) {
  if (!(dt > 0.0 && dt <= 0.01)) throw std::invalid_argument("dt must lie in (0, 0.01] s");
}

}  // namespace

void AdmittanceConfig::validate() const {
  require_positive(mass, "mass");
  require_positive(stiffness, "stiffness");
  require_positive(damping_ratio, "damping_ratio");
  require_positive(rot_mass, "rot_mass");
  require_positive(rot_stiffness, "rot_stiffness");
  if (!(tangent_scale >= 1.0)) throw NonPositiveParameter("tangent_scale must be >= 1");
  if (!(target_force >= 0.0)) throw NonPositiveParameter("target_force must be >= 0");
  if (!(force_deadband >= 0.0) || !(torque_deadband >= 0.0)) {
    throw NonPositiveParameter("deadbands must be >= 0");
  }
}

double AdmittanceConfig::damping() const { return compute_damping(mass, stiffness, damping_ratio); }

double AdmittanceConfig::rot_damping() const {
  return compute_damping(rot_mass, rot_stiffness, damping_ratio);
}

double compute_damping(double mass, double stiffness, double damping_ratio) {
  require_positive(mass, "mass");
  require_positive(stiffness, "stiffness");
  require_positive(damping_ratio, "damping_ratio");
  return 2.0 * damping_ratio * std::sqrt(mass * stiffness);
}

WrenchSample apply_deadband(const WrenchSample& w, const AdmittanceConfig& cfg) {
  return WrenchSample{shrink(w.force, cfg.force_deadband), shrink(w.torque, cfg.torque_deadband)};
}

Vec3 commanded_force(const ControllerCommand& cmd, const ControllerState& st,
                     const AdmittanceConfig& cfg) {
  if (!cmd.contact || !cfg.enable_normal_regulation) return Vec3::Zero();
  const UnitVec3 n(cmd.normal);
  const double k = cfg.stiffness;
  const double d = cfg.damping();
  const double f = cfg.target_force + n.dot(k * (cmd.position - st.position)) + n.dot(d * st.velocity);
  return f * n.vec();
}

std::optional<UnitVec3> stiffening_direction(const ControllerCommand& cmd, const ControllerState& st,
                                             const AdmittanceConfig& cfg) {
  if (!cfg.enable_tangent_stiffening || !cmd.contact) return std::nullopt;
  return try_tangent_direction(cmd.normal, cmd.position, st.position);
}

namespace {

struct Impedance {
  Mat3 stiffness;
  Mat3 damping;
  bool stiffened;
};

Impedance impedance(const ControllerCommand& cmd, const ControllerState& st, const AdmittanceConfig& cfg) {
  const double k = cfg.stiffness;
  const double d = cfg.damping();
  Impedance out{k * Mat3::Identity(), d * Mat3::Identity(), false};
  if (auto t = stiffening_direction(cmd, st, cfg)) {
    const Mat3 tt = t->vec() * t->vec().transpose();
    const double k_t = cfg.tangent_scale * k;
    const double d_t = compute_damping(cfg.mass, k_t, cfg.damping_ratio);
    out.stiffness += (k_t - k) * tt;
    out.damping += (d_t - d) * tt;
    out.stiffened = true;
  }
  return out;
}

}  // namespace

Mat3 effective_stiffness(const ControllerCommand& cmd, const ControllerState& st,
                         const AdmittanceConfig& cfg) {
  return impedance(cmd, st, cfg).stiffness;
}

Mat3 effective_damping(const ControllerCommand& cmd, const ControllerState& st,
                       const AdmittanceConfig& cfg) {
  return impedance(cmd, st, cfg).damping;
}

ControllerState step_translation(const ControllerState& st, const ControllerCommand& cmd,
                                 const Vec3& force_ext, double dt, const AdmittanceConfig& cfg,
                                 TranslationDiagnostics* diag) {
  check_dt(dt);
  const Vec3 f_cmd = commanded_force(cmd, st, cfg);
  const Impedance imp = impedance(cmd, st, cfg);

  const Vec3 accel = (force_ext - f_cmd - imp.damping * st.velocity -
                      imp.stiffness * (st.position - cmd.position)) /
                     cfg.mass;
  ControllerState next = st;
  next.velocity = st.velocity + dt * accel;
  next.position = st.position + dt * next.velocity;
  if (!next.position.allFinite() || !next.velocity.allFinite()) {
    throw NonFiniteState("translational admittance state became non-finite");
  }
  if (diag) {
    diag->commanded_force = f_cmd;
    diag->stiffness = imp.stiffness;
    const double k = cfg.stiffness;
    diag->stiffness_eigenvalues = imp.stiffened ? std::array<double, 3>{k, k, cfg.tangent_scale * k}
                                                : std::array<double, 3>{k, k, k};
  }
  return next;
}

ControllerState step_rotation(const ControllerState& st, const ControllerCommand& cmd,
                              const Vec3& torque_ext, double dt, const AdmittanceConfig& cfg) {
  check_dt(dt);
  const Vec3 theta_err = (st.orientation * cmd.orientation.inverse()).log();
  const Vec3 alpha =
      (torque_ext - cfg.rot_damping() * st.angular_velocity - cfg.rot_stiffness * theta_err) /
      cfg.rot_mass;
  ControllerState next = st;
  next.angular_velocity = st.angular_velocity + dt * alpha;
  if (!next.angular_velocity.allFinite()) {
    throw NonFiniteState("rotational admittance state became non-finite");
  }
  next.orientation = Rotation::exp(next.angular_velocity * dt) * st.orientation;
  return next;
}

ControllerState admittance_step(const ControllerState& st, const ControllerCommand& cmd,
                                const WrenchSample& raw_wrench, double dt,
                                const AdmittanceConfig& cfg, TranslationDiagnostics* diag,
                                WrenchSample* filtered) {
  const WrenchSample w = apply_deadband(raw_wrench, cfg);
  if (filtered) *filtered = w;
  ControllerState next = step_translation(st, cmd, w.force, dt, cfg, diag);
  const ControllerState rot = step_rotation(st, cmd, w.torque, dt, cfg);
  next.orientation = rot.orientation;
  next.angular_velocity = rot.angular_velocity;
  return next;
}

}  // namespace forcesim
