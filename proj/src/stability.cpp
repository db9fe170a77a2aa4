#include "forcesim/stability.hpp"

#include "forcesim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <numbers>

namespace forcesim {

double SurfaceProfile::value(double t) const {
  switch (kind) {
    case Kind::Constant: return offset;
    case Kind::Step: return offset + (t >= step_time ? amplitude : 0.0);
    case Kind::Sinusoid: return offset + amplitude * std::sin(omega * t);
  }
  return offset;
}

double SurfaceProfile::rate(double t) const {
  return kind == Kind::Sinusoid ? amplitude * omega * std::cos(omega * t) : 0.0;
}

double SurfaceProfile::accel(double t) const {
  return kind == Kind::Sinusoid ? -amplitude * omega * omega * std::sin(omega * t) : 0.0;
}

void NormalDynamicsParams::validate() const {
  if (!(m > 0.0)) throw NonPositiveParameter("m must be > 0");
  if (!(d > 0.0)) throw NonPositiveParameter("d must be > 0");
  if (!(k_e > 0.0)) throw NonPositiveParameter("k_e must be > 0");
  if (!(f_H >= 0.0)) throw NonPositiveParameter("f_H must be >= 0");
}

namespace {

/// Roots of m s^2 + 2 d s + k_e.
std::array<std::complex<double>, 2> poles(const NormalDynamicsParams& p) {
  const std::complex<double> disc = std::sqrt(std::complex<double>(p.d * p.d - p.m * p.k_e));
  return {(-p.d + disc) / p.m, (-p.d - disc) / p.m};
}

struct State {
  double x;
  double v;
};

template <class Accel>
State rk4(const State& s, double t, double dt, Accel&& a) {
  const double k1x = s.v, k1v = a(t, s.x, s.v);
  const double k2x = s.v + 0.5 * dt * k1v, k2v = a(t + 0.5 * dt, s.x + 0.5 * dt * k1x, s.v + 0.5 * dt * k1v);
  const double k3x = s.v + 0.5 * dt * k2v, k3v = a(t + 0.5 * dt, s.x + 0.5 * dt * k2x, s.v + 0.5 * dt * k2v);
  const double k4x = s.v + dt * k3v, k4v = a(t + dt, s.x + dt * k3x, s.v + dt * k3v);
  return {s.x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x), s.v + dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)};
}

void require_finite(const State& s, const char* what) {
  if (!std::isfinite(s.x) || !std::isfinite(s.v)) throw NonFiniteState(std::string(what) + ": state became non-finite");
}

long step_count(double T, double dt) { return std::max(1L, std::lround(T / dt)); }

class Excerpt {
 public:
  Excerpt(long steps, std::vector<std::array<double, 3>>& out) : every_(std::max(1L, steps / 200)), out_(out) {}
  void add(long i, double t, const State& s) {
    if (i % every_ == 0) out_.push_back({t, s.x, s.v});
  }

 private:
  long every_;
  std::vector<std::array<double, 3>>& out_;
};

void add_check(VerificationReport& r, std::string name, double measured, double bound) {
  r.checks.push_back({std::move(name), measured, bound, measured <= bound});
}

}  // namespace

double NormalDynamicsParams::slowest_time_constant() const {
  const auto p = poles(*this);
  return 1.0 / std::min(std::abs(p[0].real()), std::abs(p[1].real()));
}

const VerificationCheck& VerificationReport::worst() const {
  static const VerificationCheck none{"none", 0.0, 0.0, true};
  if (checks.empty()) return none;
  const auto ratio = [](const VerificationCheck& c) {
    if (!c.pass) return std::numeric_limits<double>::infinity();
    return c.bound > 0.0 ? c.measured / c.bound : 0.0;
  };
  return *std::max_element(checks.begin(), checks.end(),
                           [&](const auto& a, const auto& b) { return ratio(a) < ratio(b); });
}

void VerificationReport::finish() {
  pass = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
}

VerificationReport verify_prop1(const NormalDynamicsParams& p, double x0, double v0, double T,
                                const VerifierSettings& s) {
  p.validate();
  if (p.x_e.kind != SurfaceProfile::Kind::Constant) throw std::invalid_argument("prop1 needs a constant surface");
  if (T <= 0.0) T = 20.0 * p.slowest_time_constant();
  const double xe = p.x_e.offset;
  const double x_eq = xe - p.f_H / p.k_e;
  const auto accel = [&](double, double x, double v) { return (p.k_e * (xe - x) - p.f_H - 2.0 * p.d * v) / p.m; };
  const auto lyapunov = [&](const State& st) {
    const double e = st.x - x_eq;
    return 0.5 * p.m * st.v * st.v + 0.5 * p.k_e * e * e;
  };

  VerificationReport r;
  r.proposition = "prop1";
  const long n = step_count(T, s.dt);
  Excerpt excerpt(n, r.excerpt);
  State st{x0, v0};
  const double V0 = lyapunov(st);
  double V = V0;
  long increases = 0;
  excerpt.add(0, 0.0, st);
  for (long i = 1; i <= n; ++i) {
    st = rk4(st, (i - 1) * s.dt, s.dt, accel);
    require_finite(st, "prop1");
    const double Vn = lyapunov(st);
    if (V > s.lyapunov_band * V0 && !(Vn < V)) ++increases;
    V = Vn;
    excerpt.add(i, i * s.dt, st);
  }
  add_check(r, "position_error", std::abs(st.x - x_eq), s.tol_x);
  // A relative force tolerance is empty at f_H = 0; fall back to the force
  // that matches the position tolerance.
  const double force_tol = p.f_H > 0.0 ? s.tol_f_rel * p.f_H : p.k_e * s.tol_x;
  add_check(r, "force_error", std::abs(p.k_e * (xe - st.x) - p.f_H), force_tol);
  r.checks.push_back({"lyapunov_nonincreasing_steps", static_cast<double>(increases), 0.0, increases == 0});
  r.finish();
  return r;
}

VerificationReport verify_prop2(const NormalDynamicsParams& p, double v0, double T, const VerifierSettings& s) {
  p.validate();
  if (T <= 0.0) T = 20.0 * p.m / (2.0 * p.d);
  const double v_ss = -p.f_H / (2.0 * p.d);
  const auto accel = [&](double, double, double v) { return (-p.f_H - 2.0 * p.d * v) / p.m; };
  const auto analytic = [&](double t) { return v_ss + (v0 - v_ss) * std::exp(-2.0 * p.d * t / p.m); };

  VerificationReport r;
  r.proposition = "prop2";
  const long n = step_count(T, s.dt);
  const long late = n - n / 10;
  Excerpt excerpt(n, r.excerpt);
  State st{0.0, v0};
  double max_err = 0.0;
  double x_late = 0.0;
  excerpt.add(0, 0.0, st);
  for (long i = 1; i <= n; ++i) {
    st = rk4(st, (i - 1) * s.dt, s.dt, accel);
    require_finite(st, "prop2");
    max_err = std::max(max_err, std::abs(st.v - analytic(i * s.dt)));
    if (i == late) x_late = st.x;
    excerpt.add(i, i * s.dt, st);
  }
  const double slope = (st.x - x_late) / ((n - late) * s.dt);
  add_check(r, "velocity_error", std::abs(st.v - v_ss), s.tol_v);
  add_check(r, "analytic_max_error", max_err, s.analytic_tol);
  add_check(r, "late_slope_error", std::abs(slope - v_ss), s.tol_v);
  r.finish();
  return r;
}

std::array<double, 2> impulse_response_gains(const NormalDynamicsParams& p, double dt) {
  p.validate();
  const auto pl = poles(p);
  const double fast = std::max({std::abs(pl[0]), std::abs(pl[1])});
  if (dt <= 0.0) dt = 1.0 / (1000.0 * fast);
  dt = std::min(dt, 1.0 / (200.0 * fast));
  const double T = 40.0 * p.slowest_time_constant();
  const auto accel = [&](double, double x, double v) { return (-p.k_e * x - 2.0 * p.d * v) / p.m; };
  State st{0.0, 1.0 / p.m};
  double g1 = 0.0, dg1 = 0.0;
  const long n = step_count(T, dt);
  for (long i = 0; i < n; ++i) {
    const State next = rk4(st, i * dt, dt, accel);
    g1 += 0.5 * dt * (std::abs(st.x) + std::abs(next.x));
    dg1 += 0.5 * dt * (std::abs(st.v) + std::abs(next.v));
    st = next;
  }
  return {g1, dg1};
}

double sinusoid_input_bound(const NormalDynamicsParams& p, double amplitude, double omega) {
  return std::abs(amplitude) * std::hypot(p.m * omega * omega, 2.0 * p.d * omega);
}

namespace {

struct SinusoidRun {
  double sup_e = 0.0;
  double sup_edot = 0.0;
  double late_sup_e = 0.0;  // last five periods
  double max_inequality_residual = 0.0;
  double max_dissipation_residual = 0.0;
};

SinusoidRun run_sinusoid(const NormalDynamicsParams& base, double A, double omega, double T,
                         const VerifierSettings& s, std::vector<std::array<double, 3>>* excerpt_out) {
  NormalDynamicsParams p = base;
  p.x_e.kind = SurfaceProfile::Kind::Sinusoid;
  p.x_e.amplitude = A;
  p.x_e.omega = omega;
  const double shift = p.f_H / p.k_e;
  const auto accel = [&](double t, double x, double v) {
    return (p.k_e * (p.x_e.value(t) - x) - p.f_H - 2.0 * p.d * v) / p.m;
  };
  const auto u_at = [&](double t) { return -(p.m * p.x_e.accel(t) + 2.0 * p.d * p.x_e.rate(t)); };

  const long n = step_count(T, s.dt);
  const double late_start = T - 5.0 * 2.0 * std::numbers::pi / omega;
  std::vector<std::array<double, 3>> scratch;
  Excerpt excerpt(n, excerpt_out ? *excerpt_out : scratch);

  // u^2/(4d) sets the scale of the inequality residual.
  const double u_sup = sinusoid_input_bound(p, A, omega);
  const double scale = std::max(u_sup * u_sup / (4.0 * p.d), std::numeric_limits<double>::min());

  SinusoidRun out;
  State st{p.x_e.value(0.0) - shift, p.x_e.rate(0.0)};
  // Sliding window of (t, e, e', V) for the five-point derivative of V.
  std::deque<std::array<double, 4>> window;
  const auto record = [&](long i, const State& x) {
    const double t = i * s.dt;
    const double e = x.x - (p.x_e.value(t) - shift);
    const double edot = x.v - p.x_e.rate(t);
    const double V = 0.5 * p.m * edot * edot + 0.5 * p.k_e * e * e;
    out.sup_e = std::max(out.sup_e, std::abs(e));
    out.sup_edot = std::max(out.sup_edot, std::abs(edot));
    if (t >= late_start) out.late_sup_e = std::max(out.late_sup_e, std::abs(e));
    window.push_back({t, e, edot, V});
    if (window.size() > 5) window.pop_front();
    if (window.size() == 5) {
      const auto& c = window[2];
      const double Vdot = (window[0][3] - 8.0 * window[1][3] + 8.0 * window[3][3] - window[4][3]) / (12.0 * s.dt);
      const double u = u_at(c[0]);
      const double rhs = -p.d * c[2] * c[2] + u * u / (4.0 * p.d);
      out.max_inequality_residual = std::max(out.max_inequality_residual, (Vdot - rhs) / scale);
      if (std::abs(c[2]) >= std::abs(u) / (2.0 * p.d)) {
        out.max_dissipation_residual = std::max(out.max_dissipation_residual, Vdot / scale);
      }
    }
    excerpt.add(i, t, x);
  };
  record(0, st);
  for (long i = 1; i <= n; ++i) {
    st = rk4(st, (i - 1) * s.dt, s.dt, accel);
    require_finite(st, "prop3");
    record(i, st);
  }
  return out;
}

}  // namespace

VerificationReport verify_prop3(const NormalDynamicsParams& p, double amplitude, double omega, double T,
                                const VerifierSettings& s) {
  p.validate();
  if (!(omega > 0.0)) throw NonPositiveParameter("omega must be > 0");
  VerificationReport r;
  r.proposition = "prop3";
  const SinusoidRun full = run_sinusoid(p, amplitude, omega, T, s, &r.excerpt);
  const SinusoidRun half = run_sinusoid(p, 0.5 * amplitude, omega, T, s, nullptr);
  const auto gains = impulse_response_gains(p);
  const double u_sup = sinusoid_input_bound(p, amplitude, omega);
  // Zero initial error: |e| <= |g|_1 sup|u|, |e'| <= |g'|_1 sup|u|.
  add_check(r, "sup_error", full.sup_e, gains[0] * u_sup * (1.0 + 1e-6) + 1e-15);
  add_check(r, "sup_error_rate", full.sup_edot, gains[1] * u_sup * (1.0 + 1e-6) + 1e-15);
  add_check(r, "dissipation_inequality", full.max_inequality_residual, s.inequality_slack);
  add_check(r, "decrease_outside_ball", full.max_dissipation_residual, s.inequality_slack);
  const double ratio = full.late_sup_e > 0.0 ? half.late_sup_e / full.late_sup_e : 0.5;
  add_check(r, "half_amplitude_gain", ratio, 0.5 * (1.0 + s.linearity_slack));
  r.finish();
  return r;
}

VerificationReport equivalence_check(const AdmittanceConfig& cfg, const SpringContact& env, double T, double dt,
                                     bool contact, const Vec3& tangent_offset) {
  cfg.validate();
  VerificationReport r;
  r.proposition = "equivalence";
  if (!contact) {
    r.skipped = true;
    r.checks.push_back({"skipped_without_contact", 0.0, 0.0, true});
    r.finish();
    return r;
  }
  const Vec3 n = env.surface_normal.vec();
  const double k_e = env.stiffness;
  const double xe = n.dot(env.rest_point);
  const double d = cfg.damping();

  ControllerState st;
  st.position = env.rest_point;
  ControllerCommand cmd;
  cmd.position = env.rest_point + tangent_offset;
  cmd.normal = n;
  cmd.contact = true;

  double x1 = xe, v1 = 0.0;
  double max_gap = 0.0;
  const long steps = step_count(T, dt);
  Excerpt excerpt(steps, r.excerpt);
  for (long i = 1; i <= steps; ++i) {
    const double f_raw = k_e * (xe - n.dot(st.position));
    st = admittance_step(st, cmd, WrenchSample{f_raw * n, Vec3::Zero()}, dt, cfg);

    const double f1 = k_e * (xe - x1);
    const double f1_db = std::abs(f1) <= cfg.force_deadband ? 0.0 : f1 - std::copysign(cfg.force_deadband, f1);
    v1 += dt * (f1_db - cfg.target_force - 2.0 * d * v1) / cfg.mass;
    x1 += dt * v1;
    if (!std::isfinite(x1)) throw NonFiniteState("equivalence: reduced law became non-finite");
    max_gap = std::max(max_gap, std::abs(n.dot(st.position) - x1));
    excerpt.add(i, i * dt, State{x1, v1});
  }
  add_check(r, "max_normal_gap", max_gap, 1e-9);
  r.finish();
  return r;
}

std::vector<NormalDynamicsParams> default_parameter_grid() {
  std::vector<NormalDynamicsParams> grid;
  for (double m : {0.5, 1.0, 2.0}) {
    for (double k_e : {100.0, 1000.0, 5000.0}) {
      for (double f_H : {2.0, 4.0, 8.0}) {
        NormalDynamicsParams p;
        p.m = m;
        p.d = compute_damping(m, 50.0, 2.0);
        p.k_e = k_e;
        p.f_H = f_H;
        grid.push_back(p);
      }
    }
  }
  return grid;
}

std::vector<GridRow> verify_grid(const std::vector<NormalDynamicsParams>& grid, const VerifierSettings& s,
                                 const GridOptions& options) {
  std::vector<GridRow> rows;
  rows.reserve(grid.size() * 4);
  for (const auto& p : grid) {
    p.validate();
    NormalDynamicsParams constant = p;
    constant.x_e.kind = SurfaceProfile::Kind::Constant;
    rows.push_back({p, verify_prop1(constant, constant.x_e.offset, 0.0, 0.0, s)});
    rows.push_back({p, verify_prop2(p, options.prop2_v0, 0.0, s)});
    rows.push_back({p, verify_prop3(p, options.amplitude, options.omega, options.prop3_duration, s)});

    AdmittanceConfig cfg;
    cfg.mass = p.m;
    // Stiffness that reproduces d under the damping rule.
    cfg.stiffness = std::pow(p.d / (2.0 * cfg.damping_ratio), 2) / p.m;
    cfg.enable_normal_regulation = true;
    cfg.target_force = p.f_H;
    SpringContact spring;
    spring.stiffness = p.k_e;
    spring.rest_point = Vec3(0.0, 0.0, p.x_e.offset);
    rows.push_back({p, equivalence_check(cfg, spring)});
  }
  return rows;
}

}  // namespace forcesim
