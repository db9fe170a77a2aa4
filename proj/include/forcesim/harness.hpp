#pragma once

// Closed-loop episodes: chunked replay policy at 10 Hz, admittance controller
// at 1 kHz, environment contact and disturbances, safety monitor and metrics.

#include "forcesim/admittance.hpp"
#include "forcesim/environment.hpp"
#include "forcesim/expert.hpp"
#include "forcesim/policy.hpp"
#include "forcesim/task.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace forcesim {

enum class ControllerMode { ForceAware, BaselineLow, BaselineMid, BaselineHigh };

std::string_view to_string(ControllerMode mode);
std::optional<ControllerMode> parse_mode(std::string_view name);

struct EnvironmentParams {
  double k_e = 1000.0;  // N/m
  /// Negative selects the task default.
  double coulomb_mu = -1.0;
  double viscous_c = -1.0;
  bool randomize = true;
};

struct SafetyLimits {
  double force = 25.0;     // N
  double torque = 10.0;    // Nm
  double debounce = 0.02;  // s
};

enum class DisturbanceAnchor { EpisodeStart, ContactStart };

struct ScenarioConfig {
  Task task = Task::WW;
  EnvironmentParams environment;
  AdmittanceConfig admittance;
  /// Overrides the per-task target force when set.
  std::optional<double> target_force;
  ControllerMode mode = ControllerMode::ForceAware;
  NoiseSpec noise;
  std::vector<DisturbanceEvent> disturbances;
  DisturbanceAnchor anchor = DisturbanceAnchor::EpisodeStart;
  /// Each event's magnitude is scaled by U(1 - j, 1 + j) per seed.
  double disturbance_jitter = 0.0;
  ExpertOptions expert;
  SafetyLimits safety;
  double duration = 60.0;  // s
  double dt = 0.001;       // s
  int ticks_per_action = 100;
  std::size_t horizon = kDefaultHorizon;
  std::uint64_t seed = 0;
  bool stop_on_success = false;

  /// Throws std::invalid_argument / NonPositiveParameter.
  void validate() const;
};

/// Controller configuration for a task and mode: per-task force settings for
/// the force-aware controller, isotropic 50/200/800 N/m for the baselines.
AdmittanceConfig controller_for(Task task, ControllerMode mode, const AdmittanceConfig& base,
                                std::optional<double> target_force = std::nullopt);

/// Independent generator per (seed, tag). Tag 1 draws the scene, tag 2 the
/// disturbance jitter.
std::mt19937_64 rng_stream(std::uint64_t seed, std::uint32_t tag);

/// Task environment with the object pose (and ink) drawn from rng.
TaskEnvironment build_environment(Task task, const EnvironmentParams& params, std::mt19937_64& rng);
/// Robot start pose for the environment, drawn from rng.
Pose sample_start_pose(Task task, const TaskEnvironment& env, std::mt19937_64& rng, bool randomize);

struct EpisodeMetrics {
  bool success = false;
  bool safety_stop = false;
  bool aborted = false;
  double stop_time = 0.0;
  double insertion_depth_mm = 0.0;
  double initial_ink_cm = 0.0;
  double remaining_ink_cm = 0.0;
  double opening_angle_deg = 0.0;
  double peak_force = 0.0;  // N, raw contact force
};

struct RunLog {
  Task task = Task::WW;
  std::vector<double> t;
  std::vector<Vec3> position;
  std::vector<Vec3> velocity;
  /// External force after the deadband, as used by the controller.
  std::vector<Vec3> force_ext;
  std::vector<Vec3> force_cmd;
  std::vector<std::array<double, 3>> stiffness_eigenvalues;
  std::vector<PhaseLabel> phase;
  std::vector<int> contact;
  std::vector<int> disturbance;
  std::size_t policy_steps = 0;
  std::size_t policy_queries = 0;
  std::size_t demo_steps = 0;
  EpisodeMetrics metrics;
  std::string diagnostic;

  std::size_t size() const { return t.size(); }
  void reserve(std::size_t n);
};

enum class SafetyState { Ok, Stopped };

/// Stops when |F| or |tau| stays above its limit for longer than the
/// debounce window.
class SafetyMonitor {
 public:
  SafetyMonitor(SafetyLimits limits, double dt);
  SafetyState update(const WrenchSample& raw);
  SafetyState state() const { return state_; }

 private:
  SafetyLimits limits_;
  double dt_;
  long over_ = 0;
  SafetyState state_ = SafetyState::Ok;
};

/// Runs the monitor over a window of force samples.
SafetyState safety_monitor(std::span<const Vec3> forces, const SafetyLimits& limits, double dt);

/// Task threshold on the final metrics; any safety stop or abort fails.
bool success_check(Task task, const EpisodeMetrics& metrics);

/// One full episode. Never throws for numerical blow-ups: those end the run
/// with metrics.aborted and a diagnostic. Throws on invalid configs.
RunLog run_episode(const ScenarioConfig& cfg);

struct SuiteRow {
  ControllerMode mode = ControllerMode::ForceAware;
  int undisturbed_runs = 0;
  double undisturbed_success = 0.0;
  int disturbed_runs = 0;
  double disturbed_success = 0.0;
  double disturbed_safety_stop_rate = 0.0;
  int safety_stops = 0;
  /// Means over undisturbed runs (all runs when there are none).
  double mean_remaining_ink_cm = 0.0;
  double mean_insertion_depth_mm = 0.0;
  double mean_opening_angle_deg = 0.0;
  double mean_peak_force = 0.0;
};

/// Groups by mode in order of first appearance. A run counts as disturbed
/// when its config has disturbance events.
std::vector<SuiteRow> run_suite(const std::vector<ScenarioConfig>& cfgs,
                                std::vector<EpisodeMetrics>* per_run = nullptr);

}  // namespace forcesim
