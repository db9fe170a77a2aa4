#pragma once

// Privileged-state expert: free-motion key pose chains, per-task contact
// plans, and extraction of per-step supervision tuples.

#include "forcesim/environment.hpp"
#include "forcesim/geometry.hpp"
#include "forcesim/task.hpp"

#include <array>
#include <vector>

namespace forcesim {

enum class PhaseLabel { Approach, Grasp, ContactInteraction, Retract };

/// Which constraint manifold defines the contact normal.
enum class Manifold { None, Surface, HoleAxis, Hinge, Handle };

std::string_view to_string(PhaseLabel label);

struct FsmPhase {
  PhaseLabel label = PhaseLabel::Approach;
  Manifold manifold = Manifold::None;

  /// 1 exactly during ContactInteraction.
  int contact_flag() const { return label == PhaseLabel::ContactInteraction ? 1 : 0; }
};

struct KeyPose {
  Pose pose;
  double gripper = 0.0;
  PhaseLabel phase = PhaseLabel::Approach;
};

using KeyPoseSchedule = std::vector<KeyPose>;

/// Per-step training target: 10-d reference (position, 6D rotation, gripper),
/// contact normal (zero placeholder when c = 0) and contact flag.
struct SupervisionTuple {
  std::array<double, 10> reference{};
  Vec3 normal = Vec3::Zero();
  int contact = 0;

  Vec3 position() const { return {reference[0], reference[1], reference[2]}; }
  Rot6D rotation6d() const;
  double gripper() const { return reference[9]; }
  Pose pose() const;
  bool operator==(const SupervisionTuple&) const = default;
};

std::array<double, 10> encode_reference(const Pose& pose, double gripper);

/// Expert rollout at the policy rate (one entry per 0.1 s step).
struct Demonstration {
  Task task = Task::WW;
  std::vector<Pose> poses;
  std::vector<double> gripper;
  std::vector<FsmPhase> phases;

  std::size_t size() const { return poses.size(); }
  void push(const Pose& pose, double grip, FsmPhase phase);
};

/// Piecewise interpolation through the schedule; (N-1) * steps + 1 poses.
/// Throws EmptySchedule.
std::vector<Pose> plan_free_motion(const KeyPoseSchedule& schedule, int steps_per_segment);

/// Descent along the hole axis from `start_height` above the bottom to the
/// bottom. Throws NotAligned when the tool z axis deviates from the hole axis.
std::vector<Pose> plan_insertion(const TaskEnvironment& env, double start_height, double step,
                                 const Rotation& peg_orientation);

struct WipingOptions {
  double step = 0.004;         // m between consecutive poses
  double press_depth = 0.0;    // m below the surface
  double lane_overlap = 0.25;  // fraction of eraser width
};

/// Boustrophedon sweep over the bounding box of inked cells. Throws
/// NothingToWipe.
std::vector<Pose> plan_wiping(const TaskEnvironment& env, const WipingOptions& options = {});

/// Tool orientation for wiping: z into the board, x along the board u axis.
Rotation wiping_orientation(const TaskEnvironment& env);

struct ArcPlan {
  std::vector<Pose> poses;
  std::vector<Manifold> manifolds;
};

/// Circular sweep of the grasp pose about the hinge (and, for doors, first
/// about the handle axis by `handle_turn`).
ArcPlan plan_articulated(const TaskEnvironment& env, double target_angle, double step,
                         double handle_turn = 0.8727);

/// Outward normal of the active manifold at the tool position. Throws
/// NoContactManifold.
UnitVec3 manifold_normal(const TaskEnvironment& env, const Pose& eef, Manifold manifold);

/// tuple[t] = (pose[t+1] with gripper[t], normal of phase[t+1]'s manifold at
/// pose[t+1] when in contact, contact flag of phase[t]). Throws LengthMismatch.
std::vector<SupervisionTuple> extract_supervision(const Demonstration& demo, const TaskEnvironment& env);

/// Sweeps the eraser along `poses` with ideal tracking on a copy of env and
/// reports whether every inked cell is cleaned.
bool wiping_covers_all_ink(const TaskEnvironment& env, const std::vector<Pose>& poses);

struct ExpertOptions {
  double step_period = 0.1;    // s per demonstration step
  double free_speed = 0.1;     // m/s
  double hover = 0.03;         // m above the contact start
  double descent_speed = 0.02;  // m/s
  double insertion_speed = 0.01;
  double door_angular_step = 0.01745;  // rad per step
  double microwave_target = 1.2217;    // 70 deg
  double door_target = 0.7854;         // 45 deg
  double handle_turn = 0.8727;         // 50 deg
  WipingOptions wiping;
};

/// Full expert episode from the robot start pose.
Demonstration generate_demonstration(Task task, const TaskEnvironment& env, const Pose& start,
                                     const ExpertOptions& options = {});

}  // namespace forcesim
