#pragma once

// Numerical checks of the closed-loop normal dynamics
//
//   m x'' + 2 d x' = k_e (x_e - x) - f_H
//
// against a bilateral spring: equilibrium and Lyapunov decrease, free-flight
// velocity, input-to-state bounds under a moving surface, and agreement of the
// full 3-D controller with the reduced 1-D law.

#include "forcesim/admittance.hpp"
#include "forcesim/environment.hpp"

#include <array>
#include <string>
#include <vector>

namespace forcesim {

/// Surface rest position along n over time.
struct SurfaceProfile {
  enum class Kind { Constant, Step, Sinusoid };
  Kind kind = Kind::Constant;
  double offset = 0.0;     // m
  double amplitude = 0.0;  // m; step size or sinusoid amplitude
  double omega = 0.0;      // rad/s
  double step_time = 0.0;  // s

  double value(double t) const;
  double rate(double t) const;
  double accel(double t) const;
};

struct NormalDynamicsParams {
  double m = 1.0;
  double d = 28.284271247461902;
  double k_e = 1000.0;
  double f_H = 4.0;
  SurfaceProfile x_e;

  /// Throws NonPositiveParameter unless m, d, k_e > 0 and f_H >= 0.
  void validate() const;
  /// 1 / |largest real part| of the closed-loop poles with the spring.
  double slowest_time_constant() const;
};

struct VerificationCheck {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct VerificationReport {
  std::string proposition;
  std::vector<VerificationCheck> checks;
  /// Every 1/200th sample of (t, x, x').
  std::vector<std::array<double, 3>> excerpt;
  bool skipped = false;
  bool pass = false;

  /// The check with the largest measured / bound ratio.
  const VerificationCheck& worst() const;
  void finish();
};

struct VerifierSettings {
  double dt = 1e-4;
  double tol_x = 1e-4;        // m
  double tol_v = 1e-4;        // m/s
  double tol_f_rel = 0.01;    // fraction of f_H
  double analytic_tol = 1e-5;  // m/s, free-flight velocity against closed form
  double lyapunov_band = 1e-6;
  double inequality_slack = 1e-6;
  double linearity_slack = 0.05;
};

/// Constant surface. T <= 0 selects 20 slowest time constants.
VerificationReport verify_prop1(const NormalDynamicsParams& p, double x0, double v0, double T = 0.0,
                                const VerifierSettings& s = {});

/// Free flight (no contact force). T <= 0 selects 20 m / (2 d).
VerificationReport verify_prop2(const NormalDynamicsParams& p, double v0, double T = 0.0,
                                const VerifierSettings& s = {});

/// Sinusoidal surface x_e = offset + A sin(w t), starting on the moving
/// equilibrium. Includes the half-amplitude gain check.
VerificationReport verify_prop3(const NormalDynamicsParams& p, double amplitude, double omega, double T = 60.0,
                                const VerifierSettings& s = {});

/// Runs the 3-D controller with contact predicted along `n` against a
/// bilateral spring and the 1-D law side by side with the same semi-implicit
/// Euler step; reports the largest per-step gap along n. Skipped when
/// `contact` is false.
VerificationReport equivalence_check(const AdmittanceConfig& cfg, const SpringContact& env, double T = 2.0,
                                     double dt = 1e-3, bool contact = true,
                                     const Vec3& tangent_offset = Vec3::Zero());

/// Response sup norms of m e'' + 2 d e' + k_e e = u for |u| <= 1: the L1
/// norms of the impulse response and of its derivative.
std::array<double, 2> impulse_response_gains(const NormalDynamicsParams& p, double dt = 1e-5);

/// sup |u| for the sinusoidal surface: A sqrt((m w^2)^2 + (2 d w)^2).
double sinusoid_input_bound(const NormalDynamicsParams& p, double amplitude, double omega);

/// Default grid: m in {0.5, 1, 2}, k_e in {100, 1000, 5000}, f_H in
/// {2, 4, 8}; d from the controller damping rule with k = 50, xi = 2.
std::vector<NormalDynamicsParams> default_parameter_grid();

struct GridRow {
  NormalDynamicsParams params;
  VerificationReport report;
};

struct GridOptions {
  double prop2_v0 = 0.05;        // m/s
  double amplitude = 0.005;      // m, sinusoidal surface
  double omega = 6.283185307179586;  // rad/s
  double prop3_duration = 60.0;  // s
};

/// Prop 1, 2, 3 and the equivalence check for every grid point.
std::vector<GridRow> verify_grid(const std::vector<NormalDynamicsParams>& grid, const VerifierSettings& s = {},
                                 const GridOptions& options = {});

}  // namespace forcesim
