#include <catch_amalgamated.hpp>

#include "forcesim/errors.hpp"
#include "forcesim/stability.hpp"

#include <cmath>
#include <numbers>

using namespace forcesim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

NormalDynamicsParams params(double m, double k_e, double f_H) {
  NormalDynamicsParams p;
  p.m = m;
  p.d = compute_damping(m, 50.0, 2.0);
  p.k_e = k_e;
  p.f_H = f_H;
  return p;
}

const VerificationCheck& check_named(const VerificationReport& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return c;
  }
  FAIL("missing check " << name);
  return r.checks.front();
}

}  // namespace

TEST_CASE("parameter validation") {
  NormalDynamicsParams p;
  CHECK_NOTHROW(p.validate());
  p.d = 0.0;
  CHECK_THROWS_AS(p.validate(), NonPositiveParameter);
  p = {};
  p.f_H = -1.0;
  CHECK_THROWS_AS(p.validate(), NonPositiveParameter);
  p = {};
  p.k_e = 0.0;
  CHECK_THROWS_AS(verify_prop1(p, 0.0, 0.0), NonPositiveParameter);
}

TEST_CASE("slowest time constant of the closed loop") {
  // m s^2 + 2 d s + k_e = 0 with m = 1, d = 28.28, k_e = 100: both roots real.
  const NormalDynamicsParams p = params(1.0, 100.0, 4.0);
  const double disc = std::sqrt(p.d * p.d - p.m * p.k_e);
  const double slow_root = (-p.d + disc) / p.m;
  CHECK_THAT(p.slowest_time_constant(), WithinRel(-1.0 / slow_root, 1e-12));
  // Under-damped: real part -d/m.
  const NormalDynamicsParams q = params(1.0, 5000.0, 4.0);
  CHECK_THAT(q.slowest_time_constant(), WithinRel(q.m / q.d, 1e-12));
}

TEST_CASE("prop1 converges to the force equilibrium") {
  const auto r = verify_prop1(params(1.0, 100.0, 4.0), 0.0, 0.0);
  CHECK(r.pass);
  REQUIRE(!r.excerpt.empty());
  CHECK_THAT(r.excerpt.back()[1], WithinAbs(-0.04, 1e-4));
  CHECK(check_named(r, "lyapunov_nonincreasing_steps").measured == 0.0);

  NormalDynamicsParams zero = params(1.0, 1000.0, 0.0);
  zero.x_e.offset = 0.02;
  const auto rz = verify_prop1(zero, 0.05, -0.1);
  CHECK(rz.pass);
  CHECK_THAT(rz.excerpt.back()[1], WithinAbs(0.02, 1e-4));
}

TEST_CASE("prop1 Lyapunov value ends below its start") {
  const NormalDynamicsParams p = params(2.0, 1000.0, 8.0);
  const double x_eq = -p.f_H / p.k_e;
  const auto V = [&](const std::array<double, 3>& s) {
    return 0.5 * p.m * s[2] * s[2] + 0.5 * p.k_e * (s[1] - x_eq) * (s[1] - x_eq);
  };
  for (double x0 : {-0.05, 0.0, 0.03}) {
    const auto r = verify_prop1(p, x0, 0.1);
    CHECK(V(r.excerpt.back()) < V(r.excerpt.front()));
  }
}

TEST_CASE("prop1 residual shrinks as the horizon doubles") {
  const NormalDynamicsParams p = params(1.0, 1000.0, 4.0);
  const double tau = p.slowest_time_constant();
  const auto short_run = verify_prop1(p, 0.0, 0.0, 3.0 * tau);
  const auto long_run = verify_prop1(p, 0.0, 0.0, 6.0 * tau);
  CHECK(check_named(long_run, "position_error").measured < check_named(short_run, "position_error").measured);
}

TEST_CASE("prop2 free-flight velocity") {
  const NormalDynamicsParams p = params(1.0, 1000.0, 4.0);
  REQUIRE_THAT(p.d, WithinAbs(28.2843, 1e-4));
  const auto r = verify_prop2(p, 0.05);
  CHECK(r.pass);
  CHECK_THAT(r.excerpt.back()[2], WithinAbs(-0.07071, 1e-5));
  CHECK(check_named(r, "analytic_max_error").measured < 1e-5);

  const auto rest = verify_prop2(params(1.0, 1000.0, 0.0), 0.0);
  CHECK(rest.pass);
  for (const auto& s : rest.excerpt) {
    CHECK(s[1] == 0.0);
    CHECK(s[2] == 0.0);
  }
}

TEST_CASE("prop2 residual shrinks as the horizon doubles") {
  const NormalDynamicsParams p = params(1.0, 1000.0, 4.0);
  const double tau = p.m / (2.0 * p.d);
  const auto a = verify_prop2(p, 0.1, 3.0 * tau);
  const auto b = verify_prop2(p, 0.1, 6.0 * tau);
  CHECK(check_named(b, "velocity_error").measured < check_named(a, "velocity_error").measured);
}

TEST_CASE("integrator error falls with the step at fourth order") {
  const NormalDynamicsParams p = params(1.0, 1000.0, 4.0);
  VerifierSettings coarse;
  coarse.dt = 4e-3;
  VerifierSettings fine = coarse;
  fine.dt = 2e-3;
  const double e1 = check_named(verify_prop2(p, 0.1, 0.5, coarse), "analytic_max_error").measured;
  const double e2 = check_named(verify_prop2(p, 0.1, 0.5, fine), "analytic_max_error").measured;
  const double ratio = e1 / e2;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("prop3 input bound") {
  const NormalDynamicsParams p = params(1.0, 1000.0, 4.0);
  const double A = 0.005, w = 2.0 * std::numbers::pi;
  CHECK_THAT(sinusoid_input_bound(p, A, w), WithinRel(A * std::sqrt(std::pow(p.m * w * w, 2) + std::pow(2 * p.d * w, 2)), 1e-14));
}

TEST_CASE("prop3 bounded response to a moving surface") {
  const auto r = verify_prop3(params(1.0, 1000.0, 4.0), 0.005, 2.0 * std::numbers::pi);
  CHECK(r.pass);
  CHECK(check_named(r, "dissipation_inequality").pass);
  const auto& gain = check_named(r, "half_amplitude_gain");
  CHECK(gain.measured <= 0.525);
  CHECK(gain.measured >= 0.475);
}

TEST_CASE("prop3 with zero amplitude is prop1 at rest") {
  const auto r = verify_prop3(params(1.0, 1000.0, 4.0), 0.0, 2.0 * std::numbers::pi, 5.0);
  CHECK(r.pass);
  CHECK(check_named(r, "sup_error").measured < 1e-12);
}

TEST_CASE("impulse response gains match a hand-computed case") {
  // Critically damped: m = 1, d = 10, k_e = 100 gives g(t) = t e^{-10 t}.
  // int g = 1/100; int |g'| = 2 g(0.1) = 0.2 / e.
  NormalDynamicsParams p;
  p.m = 1.0;
  p.d = 10.0;
  p.k_e = 100.0;
  const auto g = impulse_response_gains(p);
  CHECK_THAT(g[0], WithinRel(0.01, 1e-4));
  CHECK_THAT(g[1], WithinRel(0.2 / std::exp(1.0), 1e-4));
}

TEST_CASE("controller pipeline matches the reduced normal law") {
  for (const auto& p : default_parameter_grid()) {
    AdmittanceConfig cfg;
    cfg.mass = p.m;
    cfg.enable_normal_regulation = true;
    cfg.target_force = p.f_H;
    SpringContact spring;
    spring.stiffness = p.k_e;
    const auto r = equivalence_check(cfg, spring);
    CHECK(r.pass);
    CHECK(check_named(r, "max_normal_gap").measured < 1e-9);
  }
}

TEST_CASE("equivalence check gating and tangent decoupling") {
  AdmittanceConfig cfg;
  cfg.enable_normal_regulation = true;
  cfg.target_force = 4.0;
  SpringContact spring;
  const auto skipped = equivalence_check(cfg, spring, 2.0, 1e-3, false);
  CHECK(skipped.skipped);
  CHECK(skipped.pass);

  const auto offset = equivalence_check(cfg, spring, 2.0, 1e-3, true, Vec3(0.05, -0.03, 0.0));
  CHECK(offset.pass);
  CHECK(check_named(offset, "max_normal_gap").measured < 1e-9);
}

TEST_CASE("default grid and full verification") {
  const auto grid = default_parameter_grid();
  CHECK(grid.size() == 27);
  std::vector<NormalDynamicsParams> small(grid.begin(), grid.begin() + 2);
  const auto rows = verify_grid(small);
  CHECK(rows.size() == 8);
  for (const auto& row : rows) CHECK(row.report.pass);
  const auto again = verify_grid(small);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].report.checks.size() == again[i].report.checks.size());
    for (std::size_t j = 0; j < rows[i].report.checks.size(); ++j) {
      CHECK(rows[i].report.checks[j].measured == again[i].report.checks[j].measured);
    }
  }
}

TEST_CASE("report pass flag follows the checks") {
  VerificationReport r;
  r.checks.push_back({"a", 0.5, 1.0, true});
  r.checks.push_back({"b", 3.0, 1.0, false});
  r.finish();
  CHECK_FALSE(r.pass);
  CHECK(r.worst().name == "b");
}
