#include <catch_amalgamated.hpp>

#include "forcesim/admittance.hpp"
#include "forcesim/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

using namespace forcesim;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

AdmittanceConfig force_aware(double f_H = 4.0) {
  AdmittanceConfig cfg;
  cfg.enable_normal_regulation = true;
  cfg.enable_tangent_stiffening = true;
  cfg.target_force = f_H;
  return cfg;
}

ControllerCommand contact_cmd(const Vec3& position, const Vec3& normal) {
  ControllerCommand cmd;
  cmd.position = position;
  cmd.normal = normal;
  cmd.contact = true;
  return cmd;
}

}  // namespace

TEST_CASE("damping from mass, stiffness and ratio") {
  CHECK_THAT(compute_damping(1.0, 50.0, 2.0), WithinAbs(4.0 * std::sqrt(50.0), 1e-12));
  CHECK_THAT(compute_damping(1.0, 50.0, 2.0), WithinAbs(28.2843, 1e-4));
  CHECK_THAT(compute_damping(1.0, 1.0, 0.5), WithinAbs(1.0, 1e-15));
  CHECK_THAT(compute_damping(1.0, 800.0, 2.0), WithinAbs(113.137, 1e-3));
  CHECK_THROWS_AS(compute_damping(0.0, 50.0, 2.0), NonPositiveParameter);
  CHECK_THROWS_AS(compute_damping(1.0, -1.0, 2.0), NonPositiveParameter);
}

TEST_CASE("config validation") {
  AdmittanceConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tangent_scale = 0.5;
  CHECK_THROWS_AS(cfg.validate(), NonPositiveParameter);
  cfg = {};
  cfg.target_force = -1.0;
  CHECK_THROWS_AS(cfg.validate(), NonPositiveParameter);
  cfg = {};
  cfg.force_deadband = -0.1;
  CHECK_THROWS_AS(cfg.validate(), NonPositiveParameter);
  cfg = {};
  cfg.rot_mass = 0.0;
  CHECK_THROWS_AS(cfg.validate(), NonPositiveParameter);
}

TEST_CASE("radial deadband") {
  const AdmittanceConfig cfg;
  WrenchSample w;
  w.force = Vec3(1.5, 0, 0);
  CHECK(apply_deadband(w, cfg).force.norm() == 0.0);

  w.force = Vec3(0, 0, 5);
  CHECK((apply_deadband(w, cfg).force - Vec3(0, 0, 3)).norm() < 1e-15);

  CHECK(apply_deadband(WrenchSample{}, cfg).force.norm() == 0.0);
  CHECK(apply_deadband(WrenchSample{}, cfg).torque.norm() == 0.0);

  w.force = Vec3(3, 4, 0);
  w.torque = Vec3(0, 0.5, 0);
  const WrenchSample out = apply_deadband(w, cfg);
  CHECK((out.force - Vec3(1.8, 2.4, 0)).norm() < 1e-14);
  CHECK(out.torque.norm() == 0.0);
}

TEST_CASE("deadband magnitude is max(0, |F| - band) along F") {
  const AdmittanceConfig cfg;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int i = 0; i < 500; ++i) {
    WrenchSample w{Vec3(g(rng), g(rng), g(rng)), Vec3(g(rng), g(rng), g(rng))};
    const WrenchSample out = apply_deadband(w, cfg);
    CHECK_THAT(out.force.norm(), WithinAbs(std::max(0.0, w.force.norm() - 2.0), 1e-12));
    CHECK_THAT(out.torque.norm(), WithinAbs(std::max(0.0, w.torque.norm() - 1.0), 1e-12));
    if (out.force.norm() > 0.0) CHECK(out.force.normalized().dot(w.force.normalized()) > 1.0 - 1e-12);
  }
}

TEST_CASE("commanded force") {
  const AdmittanceConfig cfg = force_aware();
  ControllerState st;

  ControllerCommand free_cmd;
  free_cmd.contact = false;
  CHECK(commanded_force(free_cmd, st, cfg).norm() == 0.0);

  const ControllerCommand cmd = contact_cmd(Vec3::Zero(), Vec3(0, 0, -1));
  CHECK((commanded_force(cmd, st, cfg) - Vec3(0, 0, -4)).norm() < 1e-15);

  // x_cmd - x_r = (0,0,-0.01), v_r = (0,0,-0.02):
  // f = 4 + 50 * 0.01 + 28.2843 * 0.02.
  st.position = Vec3(0, 0, 0.01);
  st.velocity = Vec3(0, 0, -0.02);
  const Vec3 f = commanded_force(cmd, st, cfg);
  const double expect = 4.0 + 50.0 * 0.01 + 4.0 * std::sqrt(50.0) * 0.02;
  CHECK_THAT(f.z(), WithinAbs(-expect, 1e-12));
  CHECK_THAT(f.z(), WithinAbs(-5.0657, 1e-4));
  CHECK(std::abs(f.x()) + std::abs(f.y()) == 0.0);

  AdmittanceConfig off = cfg;
  off.enable_normal_regulation = false;
  CHECK(commanded_force(cmd, st, off).norm() == 0.0);
}

TEST_CASE("commanded force is continuous in the state") {
  const AdmittanceConfig cfg = force_aware();
  const ControllerCommand cmd = contact_cmd(Vec3(0.1, 0.2, 0.0), UnitVec3::normalized(Vec3(0.2, -0.1, 1.0)));
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.0);
  const double lipschitz = cfg.stiffness + cfg.damping();
  for (int i = 0; i < 200; ++i) {
    ControllerState a;
    a.position = Vec3(g(rng), g(rng), g(rng)) * 0.05;
    a.velocity = Vec3(g(rng), g(rng), g(rng)) * 0.05;
    ControllerState b = a;
    const double h = 1e-7;
    b.position += Vec3(g(rng), g(rng), g(rng)) * h;
    b.velocity += Vec3(g(rng), g(rng), g(rng)) * h;
    const double dx = (b.position - a.position).norm() + (b.velocity - a.velocity).norm();
    CHECK((commanded_force(cmd, a, cfg) - commanded_force(cmd, b, cfg)).norm() <= lipschitz * dx + 1e-12);
  }
}

TEST_CASE("effective stiffness") {
  AdmittanceConfig cfg;
  ControllerState st;
  ControllerCommand cmd = contact_cmd(Vec3(0.1, 0, 0), Vec3(0, 0, 1));
  CHECK((effective_stiffness(cmd, st, cfg) - 50.0 * Mat3::Identity()).norm() == 0.0);

  cfg.enable_tangent_stiffening = true;
  const Mat3 expect = Eigen::Vector3d(200, 50, 50).asDiagonal();
  CHECK((effective_stiffness(cmd, st, cfg) - expect).norm() < 1e-12);

  cmd.position = Vec3(0, 0, 0.1);  // motion parallel to n
  CHECK((effective_stiffness(cmd, st, cfg) - 50.0 * Mat3::Identity()).norm() == 0.0);

  cmd.position = Vec3(0.1, 0, 0);
  cmd.contact = false;
  CHECK((effective_stiffness(cmd, st, cfg) - 50.0 * Mat3::Identity()).norm() == 0.0);
}

TEST_CASE("effective stiffness is SPD with eigenvalues k and scale k") {
  const AdmittanceConfig cfg = force_aware();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const UnitVec3 n = UnitVec3::normalized(Vec3(g(rng), g(rng), g(rng)));
    ControllerState st;
    st.position = Vec3(g(rng), g(rng), g(rng));
    const ControllerCommand cmd = contact_cmd(Vec3(g(rng), g(rng), g(rng)), n);
    const Mat3 K = effective_stiffness(cmd, st, cfg);
    CHECK((K - K.transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3> es(K);
    const auto ev = es.eigenvalues();
    CHECK(ev.minCoeff() > 0.0);
    for (int j = 0; j < 3; ++j) {
      const bool is_k = std::abs(ev[j] - 50.0) < 1e-9;
      const bool is_4k = std::abs(ev[j] - 200.0) < 1e-9;
      CHECK((is_k || is_4k));
    }
  }
}

TEST_CASE("effective damping follows the stiffened direction") {
  AdmittanceConfig cfg = force_aware();
  ControllerState st;
  const ControllerCommand cmd = contact_cmd(Vec3(0.1, 0, 0), Vec3(0, 0, 1));
  const Mat3 D = effective_damping(cmd, st, cfg);
  CHECK_THAT(D(0, 0), WithinAbs(compute_damping(1.0, 200.0, 2.0), 1e-9));
  CHECK_THAT(D(1, 1), WithinAbs(compute_damping(1.0, 50.0, 2.0), 1e-9));
  CHECK_THAT(D(2, 2), WithinAbs(compute_damping(1.0, 50.0, 2.0), 1e-9));
}

TEST_CASE("equilibrium is a fixed point") {
  const AdmittanceConfig cfg;
  ControllerState st;
  st.position = Vec3(0.3, -0.1, 0.2);
  ControllerCommand cmd;
  cmd.position = st.position;
  const ControllerState next = step_translation(st, cmd, Vec3::Zero(), 1e-3, cfg);
  CHECK(next.position == st.position);
  CHECK(next.velocity == st.velocity);
  const ControllerState rot = step_rotation(st, cmd, Vec3::Zero(), 1e-3, cfg);
  CHECK((rot.orientation.matrix() - st.orientation.matrix()).norm() == 0.0);
}

TEST_CASE("static offset under a constant external force") {
  const AdmittanceConfig cfg;
  ControllerState st;
  ControllerCommand cmd;
  for (int i = 0; i < 20000; ++i) st = step_translation(st, cmd, Vec3(0, 0, -4), 1e-3, cfg);
  CHECK((st.position - Vec3(0, 0, -0.08)).norm() < 1e-9);
}

TEST_CASE("over-damped translational step response never overshoots") {
  for (double k : {50.0, 200.0, 800.0}) {
    AdmittanceConfig cfg;
    cfg.stiffness = k;
    ControllerState st;
    st.position = Vec3(0.1, -0.05, 0.02);
    ControllerCommand cmd;
    bool crossed = false;
    for (int i = 0; i < 10000; ++i) {
      st = step_translation(st, cmd, Vec3::Zero(), 1e-3, cfg);
      crossed = crossed || st.position.x() < 0.0 || st.position.y() > 0.0 || st.position.z() < 0.0;
    }
    CHECK_FALSE(crossed);
    CHECK(st.position.norm() < 1e-6);
  }
}

TEST_CASE("rotational damping and response") {
  AdmittanceConfig cfg;
  CHECK_THAT(cfg.rot_damping(), WithinAbs(4.0, 1e-12));

  ControllerState st;
  const UnitVec3 z(0, 0, 1);
  st.orientation = Rotation::from_axis_angle(z, 10.0 * std::numbers::pi / 180.0);
  ControllerCommand cmd;
  bool crossed = false;
  for (int i = 0; i < 20000; ++i) {
    st = step_rotation(st, cmd, Vec3::Zero(), 1e-3, cfg);
    crossed = crossed || st.orientation.log().z() < 0.0;
  }
  CHECK_FALSE(crossed);
  CHECK(st.orientation.angle() < 1e-6);
}

TEST_CASE("normal dynamics reduce to damping control") {
  // Same semi-implicit Euler on m x'' + 2 d x' = f_ext,n - f_H.
  for (double k : {50.0, 200.0, 800.0}) {
    AdmittanceConfig cfg = force_aware(4.0);
    cfg.enable_tangent_stiffening = false;
    cfg.stiffness = k;
    const UnitVec3 n = UnitVec3::normalized(Vec3(0.3, -0.2, 0.9));
    const ControllerCommand cmd = contact_cmd(Vec3(0.02, 0.01, -0.03), n);
    const double m = cfg.mass;
    const double d = cfg.damping();
    const double k_e = 1000.0;
    const double dt = 1e-3;

    ControllerState st;
    double x = 0.0, v = 0.0;
    double worst = 0.0;
    for (int i = 0; i < 3000; ++i) {
      const double xn = n.dot(st.position);
      const Vec3 f_ext = -k_e * xn * n.vec();
      st = step_translation(st, cmd, f_ext, dt, cfg);
      const double a = (-k_e * x - cfg.target_force - 2.0 * d * v) / m;
      v += dt * a;
      x += dt * v;
      worst = std::max(worst, std::abs(n.dot(st.position) - x));
    }
    CHECK(worst < 1e-9);
    CHECK_THAT(x, WithinAbs(-cfg.target_force / k_e, 1e-6));
  }
}

TEST_CASE("controller step rejects bad dt and non-finite state") {
  const AdmittanceConfig cfg;
  ControllerState st;
  ControllerCommand cmd;
  CHECK_THROWS(step_translation(st, cmd, Vec3::Zero(), 0.0, cfg));
  CHECK_THROWS(step_translation(st, cmd, Vec3::Zero(), 0.02, cfg));
  CHECK_THROWS_AS(step_translation(st, cmd, Vec3(std::nan(""), 0, 0), 1e-3, cfg), NonFiniteState);
}

TEST_CASE("admittance step applies the deadband before integrating") {
  const AdmittanceConfig cfg;
  ControllerState st;
  ControllerCommand cmd;
  WrenchSample w;
  w.force = Vec3(0, 0, 1.9);
  WrenchSample filtered;
  const ControllerState next = admittance_step(st, cmd, w, 1e-3, cfg, nullptr, &filtered);
  CHECK(filtered.force.norm() == 0.0);
  CHECK(next.position == st.position);

  TranslationDiagnostics diag;
  w.force = Vec3(0, 0, 3.0);
  const ControllerState moved = admittance_step(st, cmd, w, 1e-3, cfg, &diag, &filtered);
  CHECK_THAT(filtered.force.z(), WithinAbs(1.0, 1e-15));
  CHECK_THAT(moved.velocity.z(), WithinAbs(1e-3, 1e-15));
  CHECK(diag.stiffness_eigenvalues == std::array<double, 3>{50.0, 50.0, 50.0});
}
