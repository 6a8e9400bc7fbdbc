#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cstdint>
#include <vector>

#include "regrasp/errors.hpp"

namespace regrasp {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Rigid body transform in SE(3). Rotations are kept as matrices; a repair
/// pass re-orthonormalizes after long composition chains to bound drift.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  std::uint32_t chain_length = 0;  // compositions since the last repair

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

  static RigidTransform identity() { return {}; }
  static RigidTransform from(const Mat3& r, const Vec3& t) { return {r, t, 0}; }
};

inline constexpr std::uint32_t kRepairChainThreshold = 100;

/// Applies b, then a.
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform invert(const RigidTransform& t);

Mat3 axis_angle(const Vec3& axis, double angle);
/// Minimal rotation mapping `from` onto `to` (both nonzero).
Mat3 rotation_between(const Vec3& from, const Vec3& to);
double rotation_angle(const Mat3& r);
/// Geodesic distance between two rotations, in radians.
double geodesic_angle(const Mat3& a, const Mat3& b);
/// Axis scaled by angle (matrix logarithm of a rotation).
Vec3 rotation_log(const Mat3& r);
Mat3 orthonormalized(const Mat3& r);
bool is_rotation(const Mat3& r, double tol = 1e-9);
/// Unsigned angle between two nonzero vectors, in radians.
double angle_between(const Vec3& a, const Vec3& b);

/// Circle embedded in 3D: center, unit plane normal, radius.
struct Circle3 {
  Vec3 center = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  double radius = 0.0;
};

/// Plane in normal-offset form: normal . x = offset, |normal| = 1.
struct PlaneEq {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
};

/// Fits the plane through three points. Raises DegeneratePoints when the
/// triangle they span has area <= 1e-12 m^2.
PlaneEq plane_from_points(const Vec3& p1, const Vec3& p2, const Vec3& p3);

/// Circles of known radius through two points in a given plane. Two mirror
/// centers across the chord in general; one when the chord is a diameter.
/// Raises ChordTooLong when |p1-p2| > 2r + 1e-12 and DegeneratePoints when
/// the two points coincide.
std::vector<Circle3> circles_from_pair(const Vec3& p1, const Vec3& p2,
                                       const Vec3& plane_normal, double radius);

/// Euclidean distance from p to the nearest point of the circle curve.
double point_circle_distance(const Circle3& c, const Vec3& p);

/// Deterministic orthonormal in-plane basis for a unit normal.
void plane_basis(const Vec3& normal, Vec3& e1, Vec3& e2);

}  // namespace regrasp
