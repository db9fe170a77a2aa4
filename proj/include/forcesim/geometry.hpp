#pragma once

// Vector, rotation and pose primitives shared by the controller, the
// environments and the planners.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <optional>

namespace forcesim {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Degeneracy thresholds for the tangent projection.
inline constexpr double kTangentPositionEpsilon = 1e-6;    // m
inline constexpr double kTangentProjectionEpsilon = 1e-6;  // dimensionless

/// A direction vector whose Euclidean norm is 1 within 1e-9.
class UnitVec3 {
 public:
  static constexpr double kNormTolerance = 1e-9;

  /// Throws DegenerateInput unless |v| is within kNormTolerance of 1.
  explicit UnitVec3(const Vec3& v);
  UnitVec3(double x, double y, double z) : UnitVec3(Vec3(x, y, z)) {}

  /// Normalizes v; throws DegenerateInput when |v| < 1e-12.
  static UnitVec3 normalized(const Vec3& v);

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }  // NOLINT(google-explicit-constructor)
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }
  double dot(const Vec3& o) const { return v_.dot(o); }
  UnitVec3 operator-() const { return UnitVec3(Unchecked{}, -v_); }

 private:
  struct Unchecked {};
  UnitVec3(Unchecked, const Vec3& v) : v_(v) {}
  Vec3 v_;
};

/// Unit quaternion kept in canonical form (w >= 0).
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  /// Normalizes and canonicalizes q; throws DegenerateInput for a near-zero q.
  explicit Rotation(const Eigen::Quaterniond& q);
  Rotation(double w, double x, double y, double z) : Rotation(Eigen::Quaterniond(w, x, y, z)) {}

  static Rotation identity() { return Rotation(); }
  static Rotation from_axis_angle(const UnitVec3& axis, double angle);
  /// Rotation whose rotation vector (axis * angle) is v.
  static Rotation exp(const Vec3& v);
  /// Builds from a proper orthonormal matrix.
  static Rotation from_matrix(const Mat3& r);

  const Eigen::Quaterniond& quat() const { return q_; }
  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  Mat3 matrix() const { return q_.toRotationMatrix(); }
  Vec3 rotate(const Vec3& v) const { return q_ * v; }
  Rotation inverse() const { return Rotation(q_.conjugate()); }
  /// Rotation vector (axis * angle, angle in [0, pi]).
  Vec3 log() const;
  double angle() const { return log().norm(); }

  Rotation operator*(const Rotation& o) const { return Rotation(q_ * o.q_); }

 private:
  Eigen::Quaterniond q_;
};

/// First two columns of a rotation matrix, column-major: (c0, c1).
struct Rot6D {
  std::array<double, 6> v{};

  double operator[](std::size_t i) const { return v[i]; }
  double& operator[](std::size_t i) { return v[i]; }
  bool operator==(const Rot6D&) const = default;
};

struct Pose {
  Vec3 position = Vec3::Zero();
  Rotation orientation;
};

Rot6D rot6d_encode(const Rotation& r);

/// Gram-Schmidt on the two columns, third column by cross product.
/// Throws DegenerateInput when the first column is near zero or the columns
/// are parallel within 1e-6.
Rotation rot6d_decode(const Rot6D& v);

/// Rotates p by `angle` about the line through `pivot` along `axis`.
Vec3 rodrigues_rotate(const Vec3& p, const UnitVec3& axis, const Vec3& pivot, double angle);

/// Direction of commanded motion projected onto the plane orthogonal to n.
/// Throws DegenerateDirection when |x_cmd - x_r| <= 1e-6 m or the motion is
/// parallel to n.
UnitVec3 tangent_direction(const UnitVec3& n, const Vec3& x_cmd, const Vec3& x_r);

/// Non-throwing form of tangent_direction; nullopt in the degenerate cases.
std::optional<UnitVec3> try_tangent_direction(const Vec3& n, const Vec3& x_cmd, const Vec3& x_r);

/// Linear position blend, shortest-arc slerp on orientation. s in [0, 1].
Pose interpolate_pose(const Pose& a, const Pose& b, double s);

/// Rigid transform composition: frame * local.
Pose compose(const Pose& frame, const Pose& local);

}  // namespace forcesim
