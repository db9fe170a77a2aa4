#include "forcesim/expert.hpp"

#include "forcesim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace forcesim {

std::string_view to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::Approach: return "Approach";
    case PhaseLabel::Grasp: return "Grasp";
    case PhaseLabel::ContactInteraction: return "ContactInteraction";
    case PhaseLabel::Retract: return "Retract";
  }
  return "?";
}

Rot6D SupervisionTuple::rotation6d() const {
  Rot6D r;
  std::copy(reference.begin() + 3, reference.begin() + 9, r.v.begin());
  return r;
}

Pose SupervisionTuple::pose() const { return Pose{position(), rot6d_decode(rotation6d())}; }

std::array<double, 10> encode_reference(const Pose& pose, double gripper) {
  const Rot6D r = rot6d_encode(pose.orientation);
  return {pose.position.x(), pose.position.y(), pose.position.z(), r[0], r[1], r[2], r[3], r[4], r[5], gripper};
}

void Demonstration::push(const Pose& pose, double grip, FsmPhase phase) {
  poses.push_back(pose);
  gripper.push_back(grip);
  phases.push_back(phase);
}

// ---------------------------------------------------------------------------
// Planners

std::vector<Pose> plan_free_motion(const KeyPoseSchedule& schedule, int steps_per_segment) {
  if (schedule.empty()) throw EmptySchedule("free-motion schedule has no key poses");
  if (steps_per_segment < 1) throw std::invalid_argument("steps_per_segment must be >= 1");
  std::vector<Pose> out;
  out.reserve((schedule.size() - 1) * static_cast<std::size_t>(steps_per_segment) + 1);
  out.push_back(schedule.front().pose);
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    for (int i = 1; i <= steps_per_segment; ++i) {
      out.push_back(interpolate_pose(schedule[k - 1].pose, schedule[k].pose,
                                     static_cast<double>(i) / steps_per_segment));
    }
  }
  return out;
}

std::vector<Pose> plan_insertion(const TaskEnvironment& env, double start_height, double step,
                                 const Rotation& peg_orientation) {
  const auto& hole = env.hole();
  if (!(step > 0.0) || start_height < 0.0) throw std::invalid_argument("insertion needs step > 0, height >= 0");
  const Pose frame = env.surface_frame();
  const Vec3 up = frame.orientation.rotate(Vec3::UnitZ());
  const Vec3 tool_axis = peg_orientation.rotate(Vec3::UnitZ());
  const double misalignment = std::acos(std::clamp(tool_axis.dot(-up), -1.0, 1.0));
  if (misalignment > hole.alignment_tolerance) throw NotAligned("peg axis is not aligned with the hole axis");

  const Vec3 bottom = frame.position - up * hole.depth;
  const int n = static_cast<int>(std::ceil(start_height / step - 1e-9));
  std::vector<Pose> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    const double h = std::max(0.0, start_height - i * step);
    out.push_back(Pose{bottom + up * h, peg_orientation});
  }
  return out;
}

Rotation wiping_orientation(const TaskEnvironment& env) {
  const Pose f = env.surface_frame();
  const Mat3 b = f.orientation.matrix();
  Mat3 r;
  r.col(0) = b.col(0);
  r.col(1) = -b.col(1);
  r.col(2) = -b.col(2);
  return Rotation::from_matrix(r);
}

namespace {

void append_segment(std::vector<Eigen::Vector2d>& out, const Eigen::Vector2d& to, double step) {
  const Eigen::Vector2d from = out.back();
  const double len = (to - from).norm();
  const int n = std::max(1, static_cast<int>(std::ceil(len / step - 1e-9)));
  for (int i = 1; i <= n; ++i) out.push_back(from + (to - from) * (static_cast<double>(i) / n));
}

}  // namespace

std::vector<Pose> plan_wiping(const TaskEnvironment& env, const WipingOptions& options) {
  const auto& b = env.board();
  const InkGrid& ink = b.ink;
  double u_min = std::numeric_limits<double>::infinity(), u_max = -u_min;
  double v_min = u_min, v_max = -u_min;
  for (int r = 0; r < ink.rows(); ++r) {
    for (int c = 0; c < ink.cols(); ++c) {
      if (!ink.inked(c, r)) continue;
      const Eigen::Vector2d p = ink.cell_center(c, r);
      u_min = std::min(u_min, p.x());
      u_max = std::max(u_max, p.x());
      v_min = std::min(v_min, p.y());
      v_max = std::max(v_max, p.y());
    }
  }
  if (!std::isfinite(u_min)) throw NothingToWipe("board has no ink");

  // Lanes run along u. Centers span [v_min + w/4, v_max - w/4] with spacing
  // at most (1 - overlap) * w, so every cell center is within w/2 of a lane.
  const double w = b.eraser_width;
  const double spacing = (1.0 - options.lane_overlap) * w;
  const double span = (v_max - v_min) - 0.5 * w;
  std::vector<double> lanes;
  if (span <= 0.0) {
    lanes.push_back(0.5 * (v_min + v_max));
  } else {
    const int count = static_cast<int>(std::ceil(span / spacing - 1e-9)) + 1;
    for (int i = 0; i < count; ++i) lanes.push_back(v_min + 0.25 * w + span * i / (count - 1));
  }
  // Lanes overrun the ink by half the eraser length, within the board.
  const double overrun = 0.5 * b.eraser_length;
  const double u_lo = std::max(u_min - overrun, -0.5 * b.width + 0.5 * b.eraser_length);
  const double u_hi = std::min(u_max + overrun, 0.5 * b.width - 0.5 * b.eraser_length);

  std::vector<Eigen::Vector2d> path{{u_lo, lanes.front()}};
  for (std::size_t i = 0; i < lanes.size(); ++i) {
    const bool forward = i % 2 == 0;
    if (i > 0) append_segment(path, {path.back().x(), lanes[i]}, options.step);
    append_segment(path, {forward ? u_hi : u_lo, lanes[i]}, options.step);
  }

  const Pose frame = env.surface_frame();
  const Rotation orientation = wiping_orientation(env);
  const Vec3 normal = frame.orientation.rotate(Vec3::UnitZ());
  std::vector<Pose> out;
  out.reserve(path.size());
  for (const auto& p : path) {
    const Vec3 on_surface = frame.position + frame.orientation.rotate(Vec3(p.x(), p.y(), 0.0));
    out.push_back(Pose{on_surface - normal * options.press_depth, orientation});
  }
  return out;
}

namespace {

Pose door_grasp_pose(const TaskEnvironment& env, double door_angle, double handle_angle) {
  TaskEnvironment probe = env;
  probe.door().door_angle = door_angle;
  probe.door().handle_angle = handle_angle;
  return Pose{door_grip_point(probe), door_grip_orientation(probe)};
}

std::vector<double> sweep(double from, double to, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("angular step must be positive");
  if (to <= from) return {from};
  const int n = static_cast<int>(std::ceil((to - from) / step - 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) out.push_back(std::min(from + i * step, to));
  return out;
}

}  // namespace

ArcPlan plan_articulated(const TaskEnvironment& env, double target_angle, double step, double handle_turn) {
  const auto& door = env.door();
  const double theta0 = door.door_angle;
  const double phi0 = door.handle_angle;
  ArcPlan plan;
  if (target_angle <= theta0) {
    plan.poses.push_back(door_grasp_pose(env, theta0, phi0));
    plan.manifolds.push_back(door.kind == DoorKind::Door ? Manifold::Handle : Manifold::Hinge);
    return plan;
  }
  double phi = phi0;
  if (door.kind == DoorKind::Door) {
    const double phi_target = std::max(phi0, std::min(handle_turn, door.max_handle_angle));
    for (double a : sweep(phi0, phi_target, step)) {
      plan.poses.push_back(door_grasp_pose(env, theta0, a));
      plan.manifolds.push_back(Manifold::Handle);
    }
    phi = phi_target;
  }
  const auto hinge = sweep(theta0, target_angle, step);
  // The handle arc already ends at the first hinge pose.
  for (std::size_t i = plan.poses.empty() ? 0 : 1; i < hinge.size(); ++i) {
    plan.poses.push_back(door_grasp_pose(env, hinge[i], phi));
    plan.manifolds.push_back(Manifold::Hinge);
  }
  return plan;
}

UnitVec3 manifold_normal(const TaskEnvironment& env, const Pose& eef, Manifold manifold) {
  const auto radial = [&](const Vec3& axis, const Vec3& pivot) {
    const Vec3 r = eef.position - pivot;
    const Vec3 perp = r - axis * axis.dot(r);
    if (perp.norm() < 1e-9) throw NoContactManifold("tool lies on the joint axis");
    return UnitVec3::normalized(perp);
  };
  switch (manifold) {
    case Manifold::Surface:
      if (env.variant() != TaskVariant::PlaneBoard) break;
      return env.spring.surface_normal;
    case Manifold::HoleAxis:
      if (env.variant() != TaskVariant::HoleFixture) break;
      return env.spring.surface_normal;
    case Manifold::Hinge:
      if (env.variant() != TaskVariant::HingedDoor) break;
      return radial(env.door().hinge_axis.vec(), door_hinge_pivot(env));
    case Manifold::Handle:
      if (env.variant() != TaskVariant::HingedDoor || env.door().kind != DoorKind::Door) break;
      return radial(door_handle_axis(env).vec(), door_handle_pivot(env));
    case Manifold::None:
      break;
  }
  throw NoContactManifold("no contact manifold for this phase");
}

std::vector<SupervisionTuple> extract_supervision(const Demonstration& demo, const TaskEnvironment& env) {
  if (demo.poses.size() != demo.phases.size() || demo.poses.size() != demo.gripper.size()) {
    throw LengthMismatch("poses, gripper commands and phases differ in length");
  }
  std::vector<SupervisionTuple> out;
  if (demo.size() < 2) return out;
  out.reserve(demo.size() - 1);
  for (std::size_t t = 0; t + 1 < demo.size(); ++t) {
    SupervisionTuple tuple;
    tuple.reference = encode_reference(demo.poses[t + 1], demo.gripper[t]);
    tuple.contact = demo.phases[t].contact_flag();
    if (tuple.contact) {
      // At a manifold switch the incoming (t+1) manifold defines the normal.
      const Manifold m = demo.phases[t + 1].manifold != Manifold::None ? demo.phases[t + 1].manifold
                                                                        : demo.phases[t].manifold;
      tuple.normal = manifold_normal(env, demo.poses[t + 1], m).vec();
    }
    out.push_back(tuple);
  }
  return out;
}

bool wiping_covers_all_ink(const TaskEnvironment& env, const std::vector<Pose>& poses) {
  TaskEnvironment sim = env;
  auto& board = sim.board();
  const double force = board.min_wipe_force;
  const double fine = 0.25 * board.ink.cell_size();
  for (std::size_t i = 0; i < poses.size(); ++i) {
    if (i == 0) {
      update_ink(sim, poses[0], true, force);
      continue;
    }
    const Vec3 a = poses[i - 1].position;
    const Vec3 b = poses[i].position;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a).norm() / fine)));
    for (int k = 1; k <= n; ++k) {
      update_ink(sim, Pose{a + (b - a) * (static_cast<double>(k) / n), poses[i].orientation}, true, force);
    }
  }
  return board.ink.inked_count() == 0;
}

// ---------------------------------------------------------------------------
// Full episodes

namespace {

class DemoBuilder {
 public:
  DemoBuilder(Task task, const Pose& start, const ExpertOptions& options) : opt_(options) {
    demo_.task = task;
    demo_.push(start, 0.0, FsmPhase{PhaseLabel::Approach, Manifold::None});
  }

  const Pose& last() const { return demo_.poses.back(); }
  void set_gripper(double g) { demo_.gripper.back() = g; }

  /// Straight move to `target` at `speed`.
  void move(const Pose& target, double speed, double gripper, FsmPhase phase) {
    const double dist = (target.position - last().position).norm();
    const double angle = (target.orientation * last().orientation.inverse()).angle();
    const double per_step = speed * opt_.step_period;
    const int steps = std::max({1, static_cast<int>(std::ceil(dist / per_step - 1e-9)),
                                static_cast<int>(std::ceil(angle / (0.5 * opt_.step_period) - 1e-9))});
    const Pose from = last();
    const auto path = plan_free_motion({KeyPose{from}, KeyPose{target}}, steps);
    for (std::size_t i = 1; i < path.size(); ++i) demo_.push(path[i], gripper, phase);
  }

  void hold(int steps, double gripper, FsmPhase phase) {
    for (int i = 0; i < steps; ++i) demo_.push(last(), gripper, phase);
  }

  void follow(const std::vector<Pose>& poses, double gripper, FsmPhase phase) {
    for (const auto& p : poses) demo_.push(p, gripper, phase);
  }

  Demonstration take() { return std::move(demo_); }

 private:
  const ExpertOptions& opt_;
  Demonstration demo_;
};

constexpr FsmPhase kApproach{PhaseLabel::Approach, Manifold::None};
constexpr FsmPhase kGrasp{PhaseLabel::Grasp, Manifold::None};
constexpr FsmPhase kRetract{PhaseLabel::Retract, Manifold::None};
constexpr FsmPhase contact(Manifold m) { return FsmPhase{PhaseLabel::ContactInteraction, m}; }

Demonstration wiping_demo(const TaskEnvironment& env, const Pose& start, const ExpertOptions& opt) {
  const auto wipe = plan_wiping(env, opt.wiping);
  const Vec3 n = env.spring.surface_normal.vec();
  DemoBuilder b(Task::WW, start, opt);
  b.set_gripper(1.0);
  const Pose hover{wipe.front().position + n * opt.hover, wipe.front().orientation};
  b.move(hover, opt.free_speed, 1.0, kApproach);
  b.hold(5, 1.0, kApproach);
  b.move(wipe.front(), opt.descent_speed, 1.0, contact(Manifold::Surface));
  b.follow(std::vector<Pose>(wipe.begin() + 1, wipe.end()), 1.0, contact(Manifold::Surface));
  b.hold(5, 1.0, contact(Manifold::Surface));
  b.move(Pose{wipe.back().position + n * opt.hover, wipe.back().orientation}, opt.descent_speed, 1.0, kRetract);
  b.hold(3, 1.0, kRetract);
  return b.take();
}

Demonstration insertion_demo(const TaskEnvironment& env, const Pose& start, const ExpertOptions& opt) {
  const Pose frame = env.surface_frame();
  const Vec3 up = frame.orientation.rotate(Vec3::UnitZ());
  // Peg hangs straight down the hole axis, tool x along the fixture x.
  Mat3 r;
  r.col(0) = frame.orientation.rotate(Vec3::UnitX());
  r.col(2) = -up;
  r.col(1) = r.col(2).cross(r.col(0));
  const Rotation peg = Rotation::from_matrix(r);
  const double start_height = env.hole().depth + opt.hover;
  const auto descent = plan_insertion(env, start_height, opt.insertion_speed * opt.step_period, peg);

  DemoBuilder b(Task::PH, start, opt);
  b.set_gripper(1.0);
  b.move(descent.front(), opt.free_speed, 1.0, kApproach);
  b.hold(10, 1.0, kApproach);
  b.follow(std::vector<Pose>(descent.begin() + 1, descent.end()), 1.0, contact(Manifold::HoleAxis));
  b.hold(10, 1.0, contact(Manifold::HoleAxis));
  return b.take();
}

Demonstration articulated_demo(Task task, const TaskEnvironment& env, const Pose& start, const ExpertOptions& opt) {
  const auto& door = env.door();
  const double target = door.kind == DoorKind::Door ? opt.door_target : opt.microwave_target;
  const ArcPlan arc = plan_articulated(env, target, opt.door_angular_step, opt.handle_turn);
  const Pose grasp = arc.poses.front();
  const Vec3 back = door.face_normal.vec();

  DemoBuilder b(task, start, opt);
  b.move(Pose{grasp.position + back * 0.08, grasp.orientation}, opt.free_speed, 0.0, kApproach);
  b.hold(5, 0.0, kApproach);
  b.move(grasp, 0.5 * opt.free_speed, 0.0, kApproach);
  b.hold(10, 1.0, kGrasp);
  for (std::size_t i = 1; i < arc.poses.size(); ++i) b.follow({arc.poses[i]}, 1.0, contact(arc.manifolds[i]));
  b.hold(5, 1.0, contact(arc.manifolds.back()));
  // Back off along the swung face normal with the gripper open.
  const Vec3 swung_back = Rotation::from_axis_angle(door.hinge_axis, target).rotate(back);
  b.hold(3, 0.0, kRetract);
  b.move(Pose{b.last().position + swung_back * 0.1, b.last().orientation}, 0.5 * opt.free_speed, 0.0, kRetract);
  return b.take();
}

}  // namespace

Demonstration generate_demonstration(Task task, const TaskEnvironment& env, const Pose& start,
                                     const ExpertOptions& options) {
  switch (task) {
    case Task::WW: return wiping_demo(env, start, options);
    case Task::PH: return insertion_demo(env, start, options);
    case Task::MO:
    case Task::DO: return articulated_demo(task, env, start, options);
  }
  throw std::invalid_argument("unknown task");
}

}  // namespace forcesim
