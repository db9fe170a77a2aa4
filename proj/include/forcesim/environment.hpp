#pragma once

// Task environments that produce the external wrench seen by the controller.
//
// Surfaces are linear springs with stiffness k_e around a rest point x_e.
// Unlike the bilateral model used by the stability verifier, contact here is
// unilateral: springs push and never pull.

#include "forcesim/admittance.hpp"
#include "forcesim/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace forcesim {

enum class TaskVariant { PlaneBoard, HoleFixture, HingedDoor };

struct SpringContact {
  double stiffness = 1000.0;  // k_e, N/m
  Vec3 rest_point = Vec3::Zero();
  UnitVec3 surface_normal{0.0, 0.0, 1.0};
};

struct FrictionModel {
  /// Coulomb friction is regularized below this sliding speed.
  static constexpr double kVelocityRegularization = 1e-4;  // m/s

  double coulomb_mu = 0.0;
  double viscous_c = 0.0;  // N s/m
};

/// Regular grid of ink cells spanning a board exactly. Cell (i, j) covers
/// board-local u in [-W/2 + i c, -W/2 + (i+1) c], v likewise with rows.
class InkGrid {
 public:
  InkGrid() = default;
  /// Throws std::invalid_argument unless the extent is a whole number of cells.
  InkGrid(double width, double height, double cell_size);

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double cell_size() const { return cell_; }
  double width() const { return cols_ * cell_; }
  double height() const { return rows_ * cell_; }

  bool inked(int col, int row) const { return cells_[index(col, row)] != 0; }
  void set(int col, int row, bool inked) { cells_[index(col, row)] = inked ? 1 : 0; }
  int inked_count() const;
  Eigen::Vector2d cell_center(int col, int row) const;

  /// Marks every cell crossed by the board-local segment a -> b.
  void paint_segment(const Eigen::Vector2d& a, const Eigen::Vector2d& b);
  /// Cleans cells whose centers lie in the axis-aligned rectangle; returns the
  /// number of cells flipped.
  int clean_rectangle(const Eigen::Vector2d& center, double half_u, double half_v);

 private:
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(col);
  }

  int cols_ = 0;
  int rows_ = 0;
  double cell_ = 0.005;
  std::vector<std::uint8_t> cells_;
};

/// Flat board. Frame origin is the surface center; local z is the outward
/// normal, local x (u) and y (v) span the surface.
struct PlaneBoard {
  Pose frame;
  double width = 0.6;
  double height = 0.4;
  InkGrid ink;
  double eraser_width = 0.04;   // across wiping lanes (board v)
  double eraser_length = 0.02;  // along wiping lanes (board u)
  double min_wipe_force = 1.0;  // N
};

/// Cylindrical hole with a 45 degree entry chamfer. Frame origin is the rim
/// center; local z points out of the hole, so the hole axis is -z.
struct HoleFixture {
  Pose frame;
  double depth = 0.025;     // m
  double clearance = 0.001;  // radial play of the peg tip, m
  double chamfer = 0.003;    // radial chamfer width, m
  double alignment_tolerance = 0.035;  // rad
};

enum class DoorKind { Microwave, Door };

/// Revolute door, optionally with a lever handle that must be turned before
/// the latch lets go. Angles grow in the opening direction.
struct HingedDoor {
  DoorKind kind = DoorKind::Microwave;
  Vec3 hinge_pivot = Vec3::Zero();
  UnitVec3 hinge_axis{0.0, 0.0, 1.0};
  /// Outward normal of the closed door face.
  UnitVec3 face_normal{-1.0, 0.0, 0.0};
  Vec3 grip_point = Vec3::Zero();        // closed door, handle at rest
  Rotation grasp_orientation;            // tool orientation when grasping
  Vec3 handle_pivot = Vec3::Zero();      // lever pivot (Door only)
  UnitVec3 handle_axis{-1.0, 0.0, 0.0};  // lever axis, closed door (Door only)

  double door_inertia = 0.02;    // kg m^2
  double hinge_viscous = 0.05;   // Nm s/rad
  double hinge_coulomb = 0.0;    // Nm
  double max_door_angle = 1.92;  // rad
  double handle_inertia = 1e-3;  // kg m^2
  double handle_spring = 0.3;    // Nm/rad
  double handle_viscous = 0.01;  // Nm s/rad
  double max_handle_angle = 1.05;

  double latch_force = 15.0;              // N
  double latch_handle_threshold = 0.5236;  // rad, 30 deg
  double latch_release_angle = 0.0873;    // rad, 5 deg

  double grasp_stiffness = 2000.0;     // N/m
  double grasp_damping = 20.0;         // N s/m
  double grasp_rot_stiffness = 5.0;    // Nm/rad
  double grasp_capture_radius = 0.015;  // m
  double grasp_slip_force = 100.0;     // N

  // Dynamic state.
  double door_angle = 0.0;
  double door_rate = 0.0;
  double handle_angle = 0.0;
  double handle_rate = 0.0;
  bool latch_released = false;
  bool grasped = false;

  double radius() const;
};

enum class DisturbanceKind { Raise, Lower, Shift, Tilt, ForcePulse, Sinusoid };

struct DisturbanceEvent {
  DisturbanceKind kind = DisturbanceKind::Lower;
  double start = 0.0;      // s
  double duration = 1.0;   // s, > 0
  double magnitude = 0.0;  // m, rad or N by kind
  double ramp = 0.0;       // s, <= duration
  /// Displacement / force direction; zero selects the kind's default
  /// (world z for raise/lower, world y for shift, surface normal for
  /// sinusoid, tilt axis = surface u axis).
  Vec3 direction = Vec3::Zero();
  double omega = 0.0;  // rad/s, sinusoid only

  void validate() const;
};

/// Superposed disturbance state at one instant.
struct DisturbanceOffset {
  Vec3 translation = Vec3::Zero();
  Vec3 velocity = Vec3::Zero();
  double tilt = 0.0;
  Vec3 tilt_axis = Vec3::UnitX();
  Vec3 force = Vec3::Zero();
  bool active = false;
};

struct TaskEnvironment {
  SpringContact spring;  // current rest point and normal (disturbance applied)
  FrictionModel friction;
  std::variant<PlaneBoard, HoleFixture, HingedDoor> geometry;
  DisturbanceOffset disturbance;

  TaskVariant variant() const;
  /// Throws std::invalid_argument when geometry is inconsistent.
  void validate() const;

  PlaneBoard& board();
  const PlaneBoard& board() const;
  HoleFixture& hole();
  const HoleFixture& hole() const;
  HingedDoor& door();
  const HingedDoor& door() const;

  /// Nominal surface frame (board or hole) with the disturbance applied.
  Pose surface_frame() const;
};

TaskEnvironment make_board_environment(PlaneBoard board, double k_e, FrictionModel friction);
TaskEnvironment make_hole_environment(HoleFixture hole, double k_e, FrictionModel friction);
TaskEnvironment make_door_environment(HingedDoor door, FrictionModel friction);

/// Door-side kinematics, including any disturbance translation.
Vec3 door_grip_point(const TaskEnvironment& env);
Vec3 door_grip_velocity(const TaskEnvironment& env);
Rotation door_grip_orientation(const TaskEnvironment& env);
/// Handle lever axis and pivot at the current door angle.
UnitVec3 door_handle_axis(const TaskEnvironment& env);
Vec3 door_handle_pivot(const TaskEnvironment& env);
Vec3 door_hinge_pivot(const TaskEnvironment& env);

/// Wrench exerted by the environment on the end-effector.
WrenchSample external_wrench(const TaskEnvironment& env, const Pose& eef, const Vec3& vel);

/// Normal spring force magnitude at the tool (0 when separated).
double contact_normal_force(const TaskEnvironment& env, const Pose& eef);

/// Latch force on the handle, along the closing direction. Throws WrongVariant.
Vec3 latch_resistance(const TaskEnvironment& env, double handle_angle, double door_angle);

/// Integrates the door and handle joints for one tick and updates grasp and
/// latch state. No-op for boards and holes.
void advance_environment(TaskEnvironment& env, const Pose& eef, const Vec3& vel, double gripper,
                         double dt);

/// Cleans cells under the eraser footprint when in contact with at least
/// min_wipe_force. Throws WrongVariant.
int update_ink(TaskEnvironment& env, const Pose& eef, bool contact_active, double normal_force);

/// Returns env with a single event's profile at time t applied.
TaskEnvironment apply_disturbance(TaskEnvironment env, const DisturbanceEvent& ev, double t);
/// Superposes all events at time t onto env (in place).
void apply_disturbances(TaskEnvironment& env, std::span<const DisturbanceEvent> events, double t);
/// Offset contributed by a single event at time t.
DisturbanceOffset disturbance_profile(const DisturbanceEvent& ev, double t, const UnitVec3& surface_normal,
                                      const Vec3& surface_u);

/// Peg tip depth below the rim along the hole axis, mm, clamped to [0, depth].
double insertion_depth(const TaskEnvironment& env, const Pose& eef);
/// Inked cells times cell size, in cm.
double remaining_ink_length(const TaskEnvironment& env);
/// Door angle in degrees.
double opening_angle(const TaskEnvironment& env);

}  // namespace forcesim
