#include "forcesim/environment.hpp"

#include "forcesim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace forcesim {

// ---------------------------------------------------------------------------
// InkGrid

InkGrid::InkGrid(double width, double height, double cell_size) : cell_(cell_size) {
  if (!(cell_size > 0.0) || !(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument("ink grid extent and cell size must be positive");
  }
  const double fc = width / cell_size;
  const double fr = height / cell_size;
  cols_ = static_cast<int>(std::lround(fc));
  rows_ = static_cast<int>(std::lround(fr));
  if (std::abs(fc - cols_) > 1e-6 || std::abs(fr - rows_) > 1e-6) {
    throw std::invalid_argument("board extent must be a whole number of ink cells");
  }
  cells_.assign(static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_), 0);
}

int InkGrid::inked_count() const {
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

Eigen::Vector2d InkGrid::cell_center(int col, int row) const {
  return {-0.5 * width() + (col + 0.5) * cell_, -0.5 * height() + (row + 0.5) * cell_};
}

void InkGrid::paint_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const double len = (b - a).norm();
  const int samples = std::max(1, static_cast<int>(std::ceil(len / (0.25 * cell_))));
  for (int s = 0; s <= samples; ++s) {
    const Eigen::Vector2d p = a + (b - a) * (static_cast<double>(s) / samples);
    const int col = static_cast<int>(std::floor((p.x() + 0.5 * width()) / cell_));
    const int row = static_cast<int>(std::floor((p.y() + 0.5 * height()) / cell_));
    if (col >= 0 && col < cols_ && row >= 0 && row < rows_) set(col, row, true);
  }
}

int InkGrid::clean_rectangle(const Eigen::Vector2d& center, double half_u, double half_v) {
  // Cell centers sit at -W/2 + (i + 0.5) c.
  const auto lo = [&](double x, double extent) {
    return static_cast<int>(std::ceil((x + 0.5 * extent) / cell_ - 0.5));
  };
  const auto hi = [&](double x, double extent) {
    return static_cast<int>(std::floor((x + 0.5 * extent) / cell_ - 0.5));
  };
  const int c0 = std::max(0, lo(center.x() - half_u, width()));
  const int c1 = std::min(cols_ - 1, hi(center.x() + half_u, width()));
  const int r0 = std::max(0, lo(center.y() - half_v, height()));
  const int r1 = std::min(rows_ - 1, hi(center.y() + half_v, height()));
  int flipped = 0;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      auto& cell = cells_[index(c, r)];
      if (cell) {
        cell = 0;
        ++flipped;
      }
    }
  }
  return flipped;
}

// ---------------------------------------------------------------------------
// TaskEnvironment

double HingedDoor::radius() const {
  const Vec3 r = grip_point - hinge_pivot;
  return (r - hinge_axis.vec() * hinge_axis.dot(r)).norm();
}

TaskVariant TaskEnvironment::variant() const {
  return static_cast<TaskVariant>(geometry.index());
}

void TaskEnvironment::validate() const {
  if (!(spring.stiffness > 0.0)) throw std::invalid_argument("k_e must be positive");
  if (friction.coulomb_mu < 0.0 || friction.viscous_c < 0.0) {
    throw std::invalid_argument("friction coefficients must be non-negative");
  }
  if (const auto* h = std::get_if<HoleFixture>(&geometry)) {
    if (!(h->depth > 0.0)) throw std::invalid_argument("hole depth must be positive");
    if (h->clearance < 0.0 || h->chamfer < 0.0) throw std::invalid_argument("hole clearance/chamfer < 0");
  }
  if (const auto* d = std::get_if<HingedDoor>(&geometry)) {
    if (std::abs(d->hinge_axis.vec().norm() - 1.0) > 1e-9) throw std::invalid_argument("hinge axis not unit");
    if (!(d->radius() > 0.0)) throw std::invalid_argument("grip point lies on the hinge axis");
  }
  if (const auto* b = std::get_if<PlaneBoard>(&geometry)) {
    if (std::abs(b->ink.width() - b->width) > 1e-9 || std::abs(b->ink.height() - b->height) > 1e-9) {
      throw std::invalid_argument("ink grid must cover the board exactly");
    }
  }
}

#define FORCESIM_VARIANT_ACCESSOR(Type, name)                                        \
  Type& TaskEnvironment::name() {                                                    \
    if (auto* p = std::get_if<Type>(&geometry)) return *p;                          \
    throw WrongVariant("environment is not a " #Type);                               \
  }                                                                                  \
  const Type& TaskEnvironment::name() const {                                        \
    if (const auto* p = std::get_if<Type>(&geometry)) return *p;                    \
    throw WrongVariant("environment is not a " #Type);                               \
  }

FORCESIM_VARIANT_ACCESSOR(PlaneBoard, board)
FORCESIM_VARIANT_ACCESSOR(HoleFixture, hole)
FORCESIM_VARIANT_ACCESSOR(HingedDoor, door)

#undef FORCESIM_VARIANT_ACCESSOR

namespace {

Pose nominal_surface_frame(const TaskEnvironment& env) {
  if (const auto* b = std::get_if<PlaneBoard>(&env.geometry)) return b->frame;
  if (const auto* h = std::get_if<HoleFixture>(&env.geometry)) return h->frame;
  const auto& d = std::get<HingedDoor>(env.geometry);
  return Pose{d.hinge_pivot, Rotation()};
}

void refresh_spring(TaskEnvironment& env) {
  if (env.variant() == TaskVariant::HingedDoor) {
    const auto& d = env.door();
    env.spring.rest_point = d.hinge_pivot + env.disturbance.translation;
    env.spring.surface_normal = d.face_normal;
    return;
  }
  const Pose f = env.surface_frame();
  env.spring.rest_point = f.position;
  env.spring.surface_normal = UnitVec3::normalized(f.orientation.rotate(Vec3::UnitZ()));
}

}  // namespace

Pose TaskEnvironment::surface_frame() const {
  const Pose nominal = nominal_surface_frame(*this);
  Pose out = nominal;
  out.position += disturbance.translation;
  if (disturbance.tilt != 0.0) {
    const Rotation tilt = Rotation::from_axis_angle(UnitVec3::normalized(disturbance.tilt_axis), disturbance.tilt);
    out.orientation = tilt * nominal.orientation;
  }
  return out;
}

TaskEnvironment make_board_environment(PlaneBoard board, double k_e, FrictionModel friction) {
  TaskEnvironment env;
  env.spring.stiffness = k_e;
  env.friction = friction;
  env.geometry = std::move(board);
  refresh_spring(env);
  env.validate();
  return env;
}

TaskEnvironment make_hole_environment(HoleFixture hole, double k_e, FrictionModel friction) {
  TaskEnvironment env;
  env.spring.stiffness = k_e;
  env.friction = friction;
  env.geometry = hole;
  refresh_spring(env);
  env.validate();
  return env;
}

TaskEnvironment make_door_environment(HingedDoor door, FrictionModel friction) {
  TaskEnvironment env;
  env.spring.stiffness = door.grasp_stiffness;
  env.friction = friction;
  env.geometry = door;
  refresh_spring(env);
  env.validate();
  return env;
}

// ---------------------------------------------------------------------------
// Door kinematics

Vec3 door_hinge_pivot(const TaskEnvironment& env) {
  return env.door().hinge_pivot + env.disturbance.translation;
}

UnitVec3 door_handle_axis(const TaskEnvironment& env) {
  const auto& d = env.door();
  return UnitVec3::normalized(Rotation::from_axis_angle(d.hinge_axis, d.door_angle).rotate(d.handle_axis.vec()));
}

Vec3 door_handle_pivot(const TaskEnvironment& env) {
  const auto& d = env.door();
  return rodrigues_rotate(d.handle_pivot, d.hinge_axis, d.hinge_pivot, d.door_angle) + env.disturbance.translation;
}

Vec3 door_grip_point(const TaskEnvironment& env) {
  const auto& d = env.door();
  Vec3 g = d.grip_point;
  if (d.kind == DoorKind::Door) g = rodrigues_rotate(g, d.handle_axis, d.handle_pivot, d.handle_angle);
  return rodrigues_rotate(g, d.hinge_axis, d.hinge_pivot, d.door_angle) + env.disturbance.translation;
}

Vec3 door_grip_velocity(const TaskEnvironment& env) {
  const auto& d = env.door();
  const Vec3 g = door_grip_point(env);
  Vec3 v = d.door_rate * d.hinge_axis.vec().cross(g - door_hinge_pivot(env));
  if (d.kind == DoorKind::Door) {
    v += d.handle_rate * door_handle_axis(env).vec().cross(g - door_handle_pivot(env));
  }
  return v + env.disturbance.velocity;
}

Rotation door_grip_orientation(const TaskEnvironment& env) {
  const auto& d = env.door();
  Rotation q = d.grasp_orientation;
  if (d.kind == DoorKind::Door) q = Rotation::from_axis_angle(d.handle_axis, d.handle_angle) * q;
  return Rotation::from_axis_angle(d.hinge_axis, d.door_angle) * q;
}

// ---------------------------------------------------------------------------
// Contact forces

namespace {

struct PointContact {
  Vec3 normal;  // outward, unit
  double penetration;
};

Vec3 friction_force(const FrictionModel& fr, const Vec3& normal, double normal_force, const Vec3& rel_vel) {
  const Vec3 v_t = rel_vel - normal * normal.dot(rel_vel);
  const double speed = v_t.norm();
  Vec3 f = -fr.viscous_c * v_t;
  if (fr.coulomb_mu > 0.0 && speed > 0.0) {
    f -= fr.coulomb_mu * normal_force * v_t / std::max(speed, FrictionModel::kVelocityRegularization);
  }
  return f;
}

int board_contacts(const TaskEnvironment& env, const Pose& eef, PointContact* out) {
  const auto& b = env.board();
  const Pose f = env.surface_frame();
  const Vec3 local = f.orientation.inverse().rotate(eef.position - f.position);
  if (std::abs(local.x()) > 0.5 * b.width || std::abs(local.y()) > 0.5 * b.height) return 0;
  const double pen = -local.z();
  if (!(pen > 0.0)) return 0;
  out[0] = PointContact{f.orientation.rotate(Vec3::UnitZ()), pen};
  return 1;
}

int hole_contacts(const TaskEnvironment& env, const Pose& eef, PointContact* out) {
  const auto& h = env.hole();
  const Pose f = env.surface_frame();
  const Vec3 local = f.orientation.inverse().rotate(eef.position - f.position);
  const double depth = -local.z();
  if (!(depth > 0.0)) return 0;
  const Eigen::Vector2d radial(local.x(), local.y());
  const double rho = radial.norm();
  const Vec3 up = f.orientation.rotate(Vec3::UnitZ());
  const Vec3 outward_radial =
      rho > 1e-12 ? f.orientation.rotate(Vec3(radial.x() / rho, radial.y() / rho, 0.0)) : Vec3::Zero();
  const double bore = h.clearance;
  const double mouth = h.clearance + h.chamfer;
  int n = 0;
  if (rho >= mouth) {
    out[n++] = PointContact{up, depth};
    return n;
  }
  if (rho > bore) {
    if (depth <= h.chamfer) {
      const double surface = mouth - rho;  // chamfer depth below the rim at this radius
      if (depth > surface) {
        const Vec3 cone_normal = (up - outward_radial) / std::numbers::sqrt2;
        out[n++] = PointContact{cone_normal, (depth - surface) / std::numbers::sqrt2};
      }
    } else {
      out[n++] = PointContact{-outward_radial, rho - bore};
    }
  }
  if (depth > h.depth) out[n++] = PointContact{up, depth - h.depth};
  return n;
}

WrenchSample surface_wrench(const TaskEnvironment& env, const PointContact* contacts, int count,
                            const Vec3& vel) {
  WrenchSample w;
  const Vec3 rel = vel - env.disturbance.velocity;
  for (int i = 0; i < count; ++i) {
    const double fn = env.spring.stiffness * contacts[i].penetration;
    w.force += fn * contacts[i].normal;
    w.force += friction_force(env.friction, contacts[i].normal, fn, rel);
  }
  return w;
}

}  // namespace

WrenchSample external_wrench(const TaskEnvironment& env, const Pose& eef, const Vec3& vel) {
  PointContact contacts[3];
  switch (env.variant()) {
    case TaskVariant::PlaneBoard:
      return surface_wrench(env, contacts, board_contacts(env, eef, contacts), vel);
    case TaskVariant::HoleFixture:
      return surface_wrench(env, contacts, hole_contacts(env, eef, contacts), vel);
    case TaskVariant::HingedDoor: {
      const auto& d = env.door();
      WrenchSample w;
      if (!d.grasped) return w;
      w.force = -d.grasp_stiffness * (eef.position - door_grip_point(env)) -
                d.grasp_damping * (vel - door_grip_velocity(env));
      w.torque = -d.grasp_rot_stiffness * (eef.orientation * door_grip_orientation(env).inverse()).log();
      return w;
    }
  }
  return {};
}

double contact_normal_force(const TaskEnvironment& env, const Pose& eef) {
  PointContact contacts[3];
  int n = 0;
  if (env.variant() == TaskVariant::PlaneBoard) n = board_contacts(env, eef, contacts);
  else if (env.variant() == TaskVariant::HoleFixture) n = hole_contacts(env, eef, contacts);
  else return 0.0;
  Vec3 total = Vec3::Zero();
  for (int i = 0; i < n; ++i) total += env.spring.stiffness * contacts[i].penetration * contacts[i].normal;
  return total.norm();
}

// ---------------------------------------------------------------------------
// Hinged objects

Vec3 latch_resistance(const TaskEnvironment& env, double handle_angle, double door_angle) {
  const auto& d = env.door();
  if (d.latch_released) return Vec3::Zero();
  if (d.kind == DoorKind::Door && handle_angle >= d.latch_handle_threshold) return Vec3::Zero();
  if (door_angle >= d.latch_release_angle) return Vec3::Zero();
  const Vec3 lever = door_grip_point(env) - door_hinge_pivot(env);
  const Vec3 opening = d.hinge_axis.vec().cross(lever);
  return -d.latch_force * opening.normalized();
}

void advance_environment(TaskEnvironment& env, const Pose& eef, const Vec3& vel, double gripper, double dt) {
  if (env.variant() != TaskVariant::HingedDoor) return;
  auto& d = env.door();

  const Vec3 grip = door_grip_point(env);
  if (!d.grasped && gripper >= 0.5 && (eef.position - grip).norm() <= d.grasp_capture_radius) {
    d.grasped = true;
  }
  Vec3 on_door = env.disturbance.force;
  if (d.grasped) {
    const Vec3 coupling = d.grasp_stiffness * (eef.position - grip) + d.grasp_damping * (vel - door_grip_velocity(env));
    if (gripper < 0.5 || coupling.norm() > d.grasp_slip_force) {
      d.grasped = false;
    } else {
      on_door += coupling;
    }
  }

  if (d.kind == DoorKind::Door) {
    const double tau = door_handle_axis(env).dot((grip - door_handle_pivot(env)).cross(on_door));
    const double accel = (tau - d.handle_spring * d.handle_angle - d.handle_viscous * d.handle_rate) / d.handle_inertia;
    d.handle_rate += dt * accel;
    d.handle_angle += dt * d.handle_rate;
    if (d.handle_angle < 0.0) {
      d.handle_angle = 0.0;
      d.handle_rate = std::max(0.0, d.handle_rate);
    } else if (d.handle_angle > d.max_handle_angle) {
      d.handle_angle = d.max_handle_angle;
      d.handle_rate = std::min(0.0, d.handle_rate);
    }
  }

  const Vec3 arm = grip - door_hinge_pivot(env);
  const Vec3 latch = latch_resistance(env, d.handle_angle, d.door_angle);
  double tau = d.hinge_axis.dot(arm.cross(on_door + latch)) - d.hinge_viscous * d.door_rate;
  if (d.hinge_coulomb > 0.0) tau -= d.hinge_coulomb * d.door_rate / std::max(std::abs(d.door_rate), 1e-3);
  if (d.door_angle <= 0.0 && tau <= 0.0 && d.door_rate <= 0.0) {
    d.door_angle = 0.0;
    d.door_rate = 0.0;
  } else {
    d.door_rate += dt * tau / d.door_inertia;
    d.door_angle += dt * d.door_rate;
    if (d.door_angle < 0.0) {
      d.door_angle = 0.0;
      d.door_rate = 0.0;
    } else if (d.door_angle > d.max_door_angle) {
      d.door_angle = d.max_door_angle;
      d.door_rate = std::min(0.0, d.door_rate);
    }
  }
  if ((d.kind == DoorKind::Door && d.handle_angle >= d.latch_handle_threshold) ||
      d.door_angle >= d.latch_release_angle) {
    d.latch_released = true;
  }
  if (!std::isfinite(d.door_angle) || !std::isfinite(d.handle_angle)) {
    throw NonFiniteState("door state became non-finite");
  }
}

// ---------------------------------------------------------------------------
// Ink

int update_ink(TaskEnvironment& env, const Pose& eef, bool contact_active, double normal_force) {
  auto& b = env.board();
  if (!contact_active || normal_force < b.min_wipe_force) return 0;
  const Pose f = env.surface_frame();
  const Vec3 local = f.orientation.inverse().rotate(eef.position - f.position);
  return b.ink.clean_rectangle({local.x(), local.y()}, 0.5 * b.eraser_length, 0.5 * b.eraser_width);
}

double remaining_ink_length(const TaskEnvironment& env) {
  const auto& b = env.board();
  return b.ink.inked_count() * b.ink.cell_size() * 100.0;
}

// ---------------------------------------------------------------------------
// Disturbances

void DisturbanceEvent::validate() const {
  if (!(duration > 0.0)) throw std::invalid_argument("disturbance duration must be positive");
  if (!(ramp >= 0.0 && ramp <= duration)) throw std::invalid_argument("disturbance ramp must lie in [0, duration]");
  if (kind == DisturbanceKind::Sinusoid && !(omega > 0.0)) {
    throw std::invalid_argument("sinusoid disturbance needs omega > 0");
  }
}

namespace {

/// Ramp-in level in [0, 1] and its time derivative.
std::pair<double, double> ramp_in(double t, double start, double ramp) {
  if (t < start) return {0.0, 0.0};
  if (ramp <= 0.0) return {1.0, 0.0};
  const double s = (t - start) / ramp;
  if (s >= 1.0) return {1.0, 0.0};
  return {s, 1.0 / ramp};
}

/// Trapezoid envelope over [start, start + duration] with ramps at both ends.
std::pair<double, double> trapezoid(double t, double start, double duration, double ramp) {
  const double end = start + duration;
  if (t < start || t >= end) return {0.0, 0.0};
  if (ramp <= 0.0) return {1.0, 0.0};
  if (t < start + ramp) return {(t - start) / ramp, 1.0 / ramp};
  if (t > end - ramp) return {(end - t) / ramp, -1.0 / ramp};
  return {1.0, 0.0};
}

Vec3 direction_or(const Vec3& dir, const Vec3& fallback) {
  return dir.squaredNorm() > 0.0 ? Vec3(dir.normalized()) : fallback;
}

}  // namespace

DisturbanceOffset disturbance_profile(const DisturbanceEvent& ev, double t, const UnitVec3& surface_normal,
                                      const Vec3& surface_u) {
  DisturbanceOffset out;
  out.active = t >= ev.start && t < ev.start + ev.duration;
  switch (ev.kind) {
    case DisturbanceKind::Raise:
    case DisturbanceKind::Lower:
    case DisturbanceKind::Shift: {
      const Vec3 fallback = ev.kind == DisturbanceKind::Raise   ? Vec3::UnitZ()
                            : ev.kind == DisturbanceKind::Lower ? Vec3(-Vec3::UnitZ())
                                                                : Vec3::UnitY();
      const Vec3 dir = direction_or(ev.direction, fallback);
      const auto [level, rate] = ramp_in(t, ev.start, ev.ramp);
      out.translation = dir * (ev.magnitude * level);
      out.velocity = dir * (ev.magnitude * rate);
      break;
    }
    case DisturbanceKind::Tilt: {
      const auto [level, rate] = ramp_in(t, ev.start, ev.ramp);
      out.tilt = ev.magnitude * level;
      out.tilt_axis = direction_or(ev.direction, surface_u);
      break;
    }
    case DisturbanceKind::ForcePulse: {
      const auto [level, rate] = trapezoid(t, ev.start, ev.duration, ev.ramp);
      out.force = direction_or(ev.direction, surface_normal.vec()) * (ev.magnitude * level);
      break;
    }
    case DisturbanceKind::Sinusoid: {
      const auto [env_level, env_rate] = trapezoid(t, ev.start, ev.duration, ev.ramp);
      const Vec3 dir = direction_or(ev.direction, surface_normal.vec());
      const double phase = ev.omega * (t - ev.start);
      const double s = std::sin(phase);
      const double c = std::cos(phase);
      out.translation = dir * (ev.magnitude * env_level * s);
      out.velocity = dir * (ev.magnitude * (env_rate * s + env_level * ev.omega * c));
      break;
    }
  }
  return out;
}

namespace {

Vec3 surface_u_axis(const TaskEnvironment& env) {
  return nominal_surface_frame(env).orientation.rotate(Vec3::UnitX());
}

UnitVec3 nominal_normal(const TaskEnvironment& env) {
  if (env.variant() == TaskVariant::HingedDoor) return env.door().face_normal;
  return UnitVec3::normalized(nominal_surface_frame(env).orientation.rotate(Vec3::UnitZ()));
}

}  // namespace

TaskEnvironment apply_disturbance(TaskEnvironment env, const DisturbanceEvent& ev, double t) {
  env.disturbance = disturbance_profile(ev, t, nominal_normal(env), surface_u_axis(env));
  refresh_spring(env);
  return env;
}

void apply_disturbances(TaskEnvironment& env, std::span<const DisturbanceEvent> events, double t) {
  DisturbanceOffset total;
  const UnitVec3 normal = nominal_normal(env);
  const Vec3 u = surface_u_axis(env);
  for (const auto& ev : events) {
    const DisturbanceOffset d = disturbance_profile(ev, t, normal, u);
    total.translation += d.translation;
    total.velocity += d.velocity;
    total.force += d.force;
    if (d.tilt != 0.0) {
      total.tilt += d.tilt;
      total.tilt_axis = d.tilt_axis;
    }
    total.active = total.active || d.active;
  }
  env.disturbance = total;
  refresh_spring(env);
}

// ---------------------------------------------------------------------------
// Metrics

double insertion_depth(const TaskEnvironment& env, const Pose& eef) {
  const auto& h = env.hole();
  const Pose f = env.surface_frame();
  const Vec3 local = f.orientation.inverse().rotate(eef.position - f.position);
  if (std::hypot(local.x(), local.y()) >= h.clearance + h.chamfer) return 0.0;
  return std::clamp(-local.z(), 0.0, h.depth) * 1000.0;
}

double opening_angle(const TaskEnvironment& env) {
  return env.door().door_angle * 180.0 / std::numbers::pi;
}

}  // namespace forcesim
