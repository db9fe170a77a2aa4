#include "forcesim/geometry.hpp"

#include "forcesim/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace forcesim {

UnitVec3::UnitVec3(const Vec3& v) : v_(v) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > kNormTolerance) {
    throw DegenerateInput("UnitVec3 requires a unit-norm vector");
  }
}

UnitVec3 UnitVec3::normalized(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || n < 1e-12) throw DegenerateInput("cannot normalize a zero vector");
  return UnitVec3(Unchecked{}, v / n);
}

Rotation::Rotation(const Eigen::Quaterniond& q) : q_(q) {
  const double n = q_.norm();
  if (!std::isfinite(n) || n < 1e-12) throw DegenerateInput("zero quaternion");
  q_.coeffs() /= n;
  if (q_.w() < 0.0) q_.coeffs() = -q_.coeffs();
}

Rotation Rotation::from_axis_angle(const UnitVec3& axis, double angle) {
  return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis.vec())));
}

Rotation Rotation::exp(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-300) return Rotation();
  return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(angle, v / angle)));
}

Rotation Rotation::from_matrix(const Mat3& r) { return Rotation(Eigen::Quaterniond(r)); }

Vec3 Rotation::log() const {
  // w >= 0 so the angle lies in [0, pi].
  const Vec3 im = q_.vec();
  const double s = im.norm();
  if (s < 1e-300) return Vec3::Zero();
  const double angle = 2.0 * std::atan2(s, q_.w());
  return im * (angle / s);
}

Rot6D rot6d_encode(const Rotation& r) {
  const Mat3 m = r.matrix();
  return Rot6D{{m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)}};
}

Rotation rot6d_decode(const Rot6D& v) {
  const Vec3 a1(v[0], v[1], v[2]);
  const Vec3 a2(v[3], v[4], v[5]);
  if (!a1.allFinite() || !a2.allFinite()) throw DegenerateInput("non-finite 6D rotation");
  const double n1 = a1.norm();
  if (n1 <= 1e-6) throw DegenerateInput("first 6D rotation column is near zero");
  const Vec3 b1 = a1 / n1;
  const Vec3 u2 = a2 - b1.dot(a2) * b1;
  const double n2 = a2.norm();
  if (n2 <= 1e-6 || u2.norm() <= 1e-6 * n2) {
    throw DegenerateInput("6D rotation columns are parallel");
  }
  const Vec3 b2 = u2.normalized();
  Mat3 m;
  m.col(0) = b1;
  m.col(1) = b2;
  m.col(2) = b1.cross(b2);
  return Rotation::from_matrix(m);
}

Vec3 rodrigues_rotate(const Vec3& p, const UnitVec3& axis, const Vec3& pivot, double angle) {
  const Vec3 v = p - pivot;
  const Vec3& k = axis.vec();
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return pivot + v * c + k.cross(v) * s + k * (k.dot(v) * (1.0 - c));
}

std::optional<UnitVec3> try_tangent_direction(const Vec3& n, const Vec3& x_cmd, const Vec3& x_r) {
  const Vec3 delta = x_cmd - x_r;
  const double dist = delta.norm();
  if (!(dist > kTangentPositionEpsilon)) return std::nullopt;
  const Vec3 v = delta / dist;
  const Vec3 projected = v - n * n.dot(v);
  const double pn = projected.norm();
  if (!(pn > kTangentProjectionEpsilon)) return std::nullopt;
  // Re-project once more so |t.n| stays at rounding level.
  Vec3 t = projected / pn;
  t -= n * n.dot(t);
  return UnitVec3::normalized(t);
}

UnitVec3 tangent_direction(const UnitVec3& n, const Vec3& x_cmd, const Vec3& x_r) {
  auto t = try_tangent_direction(n.vec(), x_cmd, x_r);
  if (!t) throw DegenerateDirection("commanded motion is parallel to the normal or vanishes");
  return *t;
}

Pose interpolate_pose(const Pose& a, const Pose& b, double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("interpolation parameter outside [0, 1]");
  if (s == 0.0) return a;
  if (s == 1.0) return b;
  Pose out;
  out.position = a.position + s * (b.position - a.position);
  // Eigen's slerp takes the shorter arc.
  out.orientation = Rotation(a.orientation.quat().slerp(s, b.orientation.quat()));
  return out;
}

Pose compose(const Pose& frame, const Pose& local) {
  return Pose{frame.position + frame.orientation.rotate(local.position),
              frame.orientation * local.orientation};
}

}  // namespace forcesim
