#include "forcesim/harness.hpp"

#include "forcesim/errors.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <map>
#include <numbers>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace forcesim {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Rotation about_z(double a) { return Rotation::from_axis_angle(UnitVec3(0.0, 0.0, 1.0), a); }

}  // namespace

std::mt19937_64 rng_stream(std::uint64_t seed, std::uint32_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
  return std::mt19937_64(seq);
}

std::string_view to_string(ControllerMode mode) {
  switch (mode) {
    case ControllerMode::ForceAware: return "force_aware";
    case ControllerMode::BaselineLow: return "baseline_low";
    case ControllerMode::BaselineMid: return "baseline_mid";
    case ControllerMode::BaselineHigh: return "baseline_high";
  }
  return "?";
}

std::optional<ControllerMode> parse_mode(std::string_view name) {
  for (auto m : {ControllerMode::ForceAware, ControllerMode::BaselineLow, ControllerMode::BaselineMid,
                 ControllerMode::BaselineHigh}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

void ScenarioConfig::validate() const {
  admittance.validate();
  noise.validate();
  if (!(duration >= 0.0)) throw std::invalid_argument("duration must be >= 0");
  if (duration > task_time_limit(task) + 1e-9) {
    throw std::invalid_argument("duration exceeds the task time limit");
  }
  if (!(dt > 0.0 && dt <= 0.01)) throw std::invalid_argument("dt must lie in (0, 0.01]");
  if (ticks_per_action < 1) throw std::invalid_argument("ticks_per_action must be >= 1");
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(safety.force > 0.0) || !(safety.torque > 0.0) || !(safety.debounce >= 0.0)) {
    throw NonPositiveParameter("safety limits must be > 0");
  }
  if (!(environment.k_e > 0.0)) throw NonPositiveParameter("k_e must be > 0");
  if (!(disturbance_jitter >= 0.0 && disturbance_jitter < 1.0)) {
    throw std::invalid_argument("disturbance jitter must lie in [0, 1)");
  }
  if (target_force && !(*target_force >= 0.0)) throw NonPositiveParameter("target force must be >= 0");
  for (const auto& ev : disturbances) ev.validate();
}

AdmittanceConfig controller_for(Task task, ControllerMode mode, const AdmittanceConfig& base,
                                std::optional<double> target_force) {
  AdmittanceConfig c = base;
  switch (mode) {
    case ControllerMode::ForceAware:
      c.enable_tangent_stiffening = task != Task::PH;
      c.enable_normal_regulation = task == Task::PH || task == Task::WW;
      c.target_force = task == Task::PH ? 2.0 : task == Task::WW ? 4.0 : 0.0;
      if (target_force && c.enable_normal_regulation) c.target_force = *target_force;
      break;
    case ControllerMode::BaselineLow:
    case ControllerMode::BaselineMid:
    case ControllerMode::BaselineHigh:
      c.enable_tangent_stiffening = false;
      c.enable_normal_regulation = false;
      c.target_force = 0.0;
      c.stiffness = mode == ControllerMode::BaselineLow ? 50.0 : mode == ControllerMode::BaselineMid ? 200.0 : 800.0;
      break;
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Scene construction

namespace {

void scribble(InkGrid& ink, std::mt19937_64& rng, bool randomize) {
  if (!randomize) {
    const std::array<Eigen::Vector2d, 5> pts{{{-0.09, -0.04}, {-0.04, 0.05}, {0.0, -0.03}, {0.05, 0.04}, {0.09, -0.05}}};
    for (std::size_t i = 1; i < pts.size(); ++i) ink.paint_segment(pts[i - 1], pts[i]);
    return;
  }
  const Eigen::Vector2d center(uniform(rng, -0.04, 0.04), uniform(rng, -0.03, 0.03));
  const int strokes = static_cast<int>(uniform(rng, 2.0, 5.0));
  for (int s = 0; s < strokes; ++s) {
    const int points = static_cast<int>(uniform(rng, 3.0, 6.0));
    Eigen::Vector2d prev = center + Eigen::Vector2d(uniform(rng, -0.1, 0.1), uniform(rng, -0.06, 0.06));
    for (int p = 1; p < points; ++p) {
      const Eigen::Vector2d next = center + Eigen::Vector2d(uniform(rng, -0.1, 0.1), uniform(rng, -0.06, 0.06));
      ink.paint_segment(prev, next);
      prev = next;
    }
  }
}

HingedDoor make_door(Task task, std::mt19937_64& rng, bool randomize) {
  HingedDoor d;
  const bool door = task == Task::DO;
  d.kind = door ? DoorKind::Door : DoorKind::Microwave;
  const double yaw = randomize ? uniform(rng, -15.0, 15.0) * kDeg : 0.0;
  Vec3 offset = Vec3::Zero();
  if (randomize) {
    offset = door ? Vec3(uniform(rng, -0.05, 0.05), uniform(rng, -0.15, 0.15), uniform(rng, -0.05, 0.05))
                  : Vec3(uniform(rng, -0.05, 0.05), uniform(rng, -0.1, 0.1), uniform(rng, -0.05, 0.05));
  }
  const Rotation r = about_z(yaw);
  const Vec3 pivot = (door ? Vec3(0.65, -0.35, 0.3) : Vec3(0.6, -0.15, 0.2)) + offset;
  const double radius = door ? 0.5 : 0.3;
  d.hinge_pivot = pivot;
  d.hinge_axis = UnitVec3(0.0, 0.0, 1.0);
  d.face_normal = UnitVec3::normalized(r.rotate(Vec3(-1.0, 0.0, 0.0)));
  d.grip_point = pivot + r.rotate(Vec3(-0.03, radius, 0.0));
  // Tool z into the door face, tool x along the door width.
  Mat3 g;
  g.col(0) = r.rotate(Vec3::UnitY());
  g.col(1) = Vec3::UnitZ();
  g.col(2) = r.rotate(Vec3::UnitX());
  d.grasp_orientation = Rotation::from_matrix(g);
  if (door) {
    d.handle_pivot = d.grip_point + r.rotate(Vec3(0.0, 0.1, 0.0));
    d.handle_axis = UnitVec3::normalized(r.rotate(Vec3(1.0, 0.0, 0.0)));
    d.door_inertia = 0.2;
    d.hinge_viscous = 0.2;
    d.max_door_angle = 1.6;
  }
  return d;
}

}  // namespace

TaskEnvironment build_environment(Task task, const EnvironmentParams& params, std::mt19937_64& rng) {
  const bool rnd = params.randomize;
  FrictionModel friction;
  friction.coulomb_mu = task == Task::WW ? 0.2 : task == Task::PH ? 0.1 : 0.0;
  friction.viscous_c = 0.0;
  if (params.coulomb_mu >= 0.0) friction.coulomb_mu = params.coulomb_mu;
  if (params.viscous_c >= 0.0) friction.viscous_c = params.viscous_c;

  switch (task) {
    case Task::WW: {
      PlaneBoard b;
      b.ink = InkGrid(b.width, b.height, 0.005);
      const double height = rnd ? uniform(rng, 0.1, 0.2) : 0.15;
      const double tilt = rnd ? uniform(rng, -20.0, 20.0) * kDeg : 0.0;
      b.frame = Pose{Vec3(0.55, 0.0, height), Rotation::from_axis_angle(UnitVec3(1.0, 0.0, 0.0), tilt)};
      scribble(b.ink, rng, rnd);
      return make_board_environment(std::move(b), params.k_e, friction);
    }
    case Task::PH: {
      HoleFixture h;
      const Vec3 p = rnd ? Vec3(uniform(rng, 0.35, 0.75), uniform(rng, -0.2, 0.2), uniform(rng, 0.0, 0.2))
                         : Vec3(0.55, 0.0, 0.1);
      h.frame = Pose{p, about_z(rnd ? uniform(rng, -90.0, 90.0) * kDeg : 0.0)};
      return make_hole_environment(h, params.k_e, friction);
    }
    case Task::MO:
    case Task::DO:
      return make_door_environment(make_door(task, rng, rnd), friction);
  }
  throw std::invalid_argument("unknown task");
}

Pose sample_start_pose(Task task, const TaskEnvironment& env, std::mt19937_64& rng, bool randomize) {
  const auto jitter = [&](double r) { return randomize ? uniform(rng, -r, r) : 0.0; };
  switch (task) {
    case Task::WW: {
      const Pose f = env.surface_frame();
      const Vec3 n = env.spring.surface_normal.vec();
      const Vec3 p = f.position + n * (0.15 + jitter(0.03)) + f.orientation.rotate(Vec3(jitter(0.05), jitter(0.05), 0.0));
      const Rotation yaw = Rotation::from_axis_angle(env.spring.surface_normal, jitter(0.3));
      return Pose{p, yaw * wiping_orientation(env)};
    }
    case Task::PH: {
      const Pose f = env.surface_frame();
      const Vec3 p = f.position + Vec3(jitter(0.1), jitter(0.1), 0.2 + jitter(0.05));
      const Rotation down = Rotation::from_axis_angle(UnitVec3(1.0, 0.0, 0.0), std::numbers::pi);
      return Pose{p, about_z(jitter(0.5)) * down};
    }
    case Task::MO:
    case Task::DO: {
      const auto& d = env.door();
      const Vec3 p = d.grip_point + d.face_normal.vec() * (0.2 + jitter(0.05)) + Vec3(0.0, jitter(0.08), jitter(0.05));
      return Pose{p, about_z(jitter(0.2)) * d.grasp_orientation};
    }
  }
  throw std::invalid_argument("unknown task");
}

// ---------------------------------------------------------------------------
// Safety and success

SafetyMonitor::SafetyMonitor(SafetyLimits limits, double dt) : limits_(limits), dt_(dt) {
  if (!(limits_.force > 0.0) || !(limits_.torque > 0.0)) throw NonPositiveParameter("safety limits must be > 0");
}

SafetyState SafetyMonitor::update(const WrenchSample& raw) {
  if (state_ == SafetyState::Stopped) return state_;
  const bool over = raw.force.norm() > limits_.force || raw.torque.norm() > limits_.torque;
  over_ = over ? over_ + 1 : 0;
  // Stop once the violation has lasted longer than the debounce window.
  if (over && over_ * dt_ > limits_.debounce + 1e-12) state_ = SafetyState::Stopped;
  return state_;
}

SafetyState safety_monitor(std::span<const Vec3> forces, const SafetyLimits& limits, double dt) {
  SafetyMonitor m(limits, dt);
  for (const auto& f : forces) {
    if (m.update(WrenchSample{f, Vec3::Zero()}) == SafetyState::Stopped) break;
  }
  return m.state();
}

bool success_check(Task task, const EpisodeMetrics& m) {
  if (m.safety_stop || m.aborted) return false;
  switch (task) {
    case Task::MO: return m.opening_angle_deg >= 50.0;
    case Task::PH: return m.insertion_depth_mm >= 10.0;
    case Task::WW: return m.remaining_ink_cm < 5.0;
    case Task::DO: return m.opening_angle_deg >= 30.0;
  }
  return false;
}

void RunLog::reserve(std::size_t n) {
  t.reserve(n);
  position.reserve(n);
  velocity.reserve(n);
  force_ext.reserve(n);
  force_cmd.reserve(n);
  stiffness_eigenvalues.reserve(n);
  phase.reserve(n);
  contact.reserve(n);
  disturbance.reserve(n);
}

// ---------------------------------------------------------------------------
// Episodes

namespace {

void fill_metrics(Task task, const TaskEnvironment& env, const Pose& eef, EpisodeMetrics& m) {
  switch (task) {
    case Task::PH: m.insertion_depth_mm = insertion_depth(env, eef); break;
    case Task::WW: m.remaining_ink_cm = remaining_ink_length(env); break;
    case Task::MO:
    case Task::DO: m.opening_angle_deg = opening_angle(env); break;
  }
  m.success = success_check(task, m);
}

}  // namespace

RunLog run_episode(const ScenarioConfig& cfg) {
  cfg.validate();
  const AdmittanceConfig ctrl = controller_for(cfg.task, cfg.mode, cfg.admittance, cfg.target_force);

  auto scene_rng = rng_stream(cfg.seed, 1);
  TaskEnvironment env = build_environment(cfg.task, cfg.environment, scene_rng);
  const Pose start = sample_start_pose(cfg.task, env, scene_rng, cfg.environment.randomize);
  const Demonstration demo = generate_demonstration(cfg.task, env, start, cfg.expert);

  NoiseSpec noise = cfg.noise;
  noise.seed = cfg.noise.seed ^ (cfg.seed * 0x9E3779B97F4A7C15ULL);
  ChunkedReplay policy(extract_supervision(demo, env), noise, cfg.horizon);

  std::vector<DisturbanceEvent> events = cfg.disturbances;
  {
    double shift = 0.0;
    if (cfg.anchor == DisturbanceAnchor::ContactStart) {
      for (std::size_t k = 0; k < demo.size(); ++k) {
        if (demo.phases[k].contact_flag()) {
          shift = static_cast<double>(k) * cfg.expert.step_period;
          break;
        }
      }
    }
    auto jitter_rng = rng_stream(cfg.seed, 2);
    for (auto& ev : events) {
      ev.start += shift;
      if (cfg.disturbance_jitter > 0.0) {
        ev.magnitude *= uniform(jitter_rng, 1.0 - cfg.disturbance_jitter, 1.0 + cfg.disturbance_jitter);
      }
    }
  }

  RunLog log;
  log.task = cfg.task;
  log.demo_steps = demo.size();
  const long ticks = std::lround(cfg.duration / cfg.dt);
  log.reserve(static_cast<std::size_t>(ticks));
  if (cfg.task == Task::WW) log.metrics.initial_ink_cm = remaining_ink_length(env);

  ControllerState st;
  st.position = start.position;
  st.orientation = start.orientation;
  ControllerCommand cmd;
  cmd.position = start.position;
  cmd.orientation = start.orientation;
  PhaseLabel phase = PhaseLabel::Approach;
  SafetyMonitor monitor(cfg.safety, cfg.dt);

  try {
    for (long i = 0; i < ticks; ++i) {
      const double t = static_cast<double>(i) * cfg.dt;
      const Pose eef{st.position, st.orientation};
      if (i % cfg.ticks_per_action == 0) {
        const std::size_t k = static_cast<std::size_t>(i / cfg.ticks_per_action);
        if (cfg.stop_on_success && k > 0) {
          fill_metrics(cfg.task, env, eef, log.metrics);
          if (log.metrics.success) break;
        }
        const SupervisionTuple& a = policy.step(make_observation(eef, cmd.gripper, k));
        ++log.policy_steps;
        const Pose target = a.pose();
        cmd.position = target.position;
        cmd.orientation = target.orientation;
        cmd.gripper = a.gripper();
        // A predicted contact without a direction cannot be regulated.
        cmd.contact = a.contact == 1 && a.normal.squaredNorm() > 0.0;
        cmd.normal = cmd.contact ? Vec3(a.normal.normalized()) : Vec3::Zero();
        if (demo.size() >= 2) phase = demo.phases[std::min(k, demo.size() - 2)].label;
      }

      apply_disturbances(env, events, t);
      WrenchSample raw = external_wrench(env, eef, st.velocity);
      if (env.variant() != TaskVariant::HingedDoor) raw.force += env.disturbance.force;
      log.metrics.peak_force = std::max(log.metrics.peak_force, raw.force.norm());

      TranslationDiagnostics diag;
      WrenchSample filtered;
      const ControllerState next = admittance_step(st, cmd, raw, cfg.dt, ctrl, &diag, &filtered);

      log.t.push_back(t);
      log.position.push_back(st.position);
      log.velocity.push_back(st.velocity);
      log.force_ext.push_back(filtered.force);
      log.force_cmd.push_back(diag.commanded_force);
      log.stiffness_eigenvalues.push_back(diag.stiffness_eigenvalues);
      log.phase.push_back(phase);
      log.contact.push_back(cmd.contact ? 1 : 0);
      log.disturbance.push_back(env.disturbance.active ? 1 : 0);

      if (monitor.update(raw) == SafetyState::Stopped) {
        log.metrics.safety_stop = true;
        log.metrics.stop_time = t;
        log.diagnostic = "safety stop: force or torque limit exceeded";
        break;
      }

      st = next;
      const Pose moved{st.position, st.orientation};
      advance_environment(env, moved, st.velocity, cmd.gripper, cfg.dt);
      if (cfg.task == Task::WW) update_ink(env, moved, true, contact_normal_force(env, moved));
    }
  } catch (const NonFiniteState& e) {
    log.metrics.aborted = true;
    log.diagnostic = e.what();
  }

  log.policy_queries = policy.queries();
  fill_metrics(cfg.task, env, Pose{st.position, st.orientation}, log.metrics);
  return log;
}

// ---------------------------------------------------------------------------
// Suites

std::vector<SuiteRow> run_suite(const std::vector<ScenarioConfig>& cfgs, std::vector<EpisodeMetrics>* per_run) {
  struct Acc {
    SuiteRow row;
    int undisturbed_ok = 0, disturbed_ok = 0, disturbed_stops = 0;
    double ink[2] = {0, 0}, depth[2] = {0, 0}, angle[2] = {0, 0}, peak[2] = {0, 0};
  };
  // Episodes are independent; results land by index so the summary does not
  // depend on scheduling.
  std::vector<EpisodeMetrics> metrics(cfgs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfgs.size(); i = next++) {
      try {
        metrics[i] = run_episode(cfgs[i]).metrics;
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    const std::size_t n_threads =
        std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(cfgs.size(), 1));
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
  if (per_run) per_run->insert(per_run->end(), metrics.begin(), metrics.end());

  std::vector<Acc> acc;
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const ScenarioConfig& cfg = cfgs[i];
    const EpisodeMetrics& m = metrics[i];
    auto it = std::find_if(acc.begin(), acc.end(), [&](const Acc& a) { return a.row.mode == cfg.mode; });
    if (it == acc.end()) {
      acc.push_back({});
      acc.back().row.mode = cfg.mode;
      it = acc.end() - 1;
    }
    const bool disturbed = !cfg.disturbances.empty();
    if (disturbed) {
      ++it->row.disturbed_runs;
      it->disturbed_ok += m.success;
      it->disturbed_stops += m.safety_stop;
    } else {
      ++it->row.undisturbed_runs;
      it->undisturbed_ok += m.success;
    }
    it->row.safety_stops += m.safety_stop;
    const int g = disturbed ? 1 : 0;
    it->ink[g] += m.remaining_ink_cm;
    it->depth[g] += m.insertion_depth_mm;
    it->angle[g] += m.opening_angle_deg;
    it->peak[g] += m.peak_force;
  }
  std::vector<SuiteRow> rows;
  for (auto& a : acc) {
    SuiteRow& r = a.row;
    if (r.undisturbed_runs) r.undisturbed_success = static_cast<double>(a.undisturbed_ok) / r.undisturbed_runs;
    if (r.disturbed_runs) {
      r.disturbed_success = static_cast<double>(a.disturbed_ok) / r.disturbed_runs;
      r.disturbed_safety_stop_rate = static_cast<double>(a.disturbed_stops) / r.disturbed_runs;
    }
    const bool use_undisturbed = r.undisturbed_runs > 0;
    const int g = use_undisturbed ? 0 : 1;
    const double n = use_undisturbed ? r.undisturbed_runs : r.disturbed_runs;
    if (n > 0) {
      r.mean_remaining_ink_cm = a.ink[g] / n;
      r.mean_insertion_depth_mm = a.depth[g] / n;
      r.mean_opening_angle_deg = a.angle[g] / n;
      r.mean_peak_force = a.peak[g] / n;
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace forcesim
