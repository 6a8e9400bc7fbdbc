#include "regrasp/geometry.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace regrasp {

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  out.chain_length = std::max(a.chain_length, b.chain_length) + 1;
  if (out.chain_length > kRepairChainThreshold) {
    out.rotation = orthonormalized(out.rotation);
    out.chain_length = 0;
  }
  return out;
}

RigidTransform invert(const RigidTransform& t) {
  RigidTransform out;
  out.rotation = t.rotation.transpose();
  out.translation = -(out.rotation * t.translation);
  out.chain_length = t.chain_length;
  return out;
}

Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  return Eigen::Quaterniond::FromTwoVectors(from, to).toRotationMatrix();
}

double rotation_angle(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  return std::abs(aa.angle());
}

double geodesic_angle(const Mat3& a, const Mat3& b) {
  return rotation_angle(Mat3(a.transpose() * b));
}

Vec3 rotation_log(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  return aa.axis() * aa.angle();
}

Mat3 orthonormalized(const Mat3& r) {
  Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 out = svd.matrixU() * svd.matrixV().transpose();
  if (out.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    out = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return out;
}

bool is_rotation(const Mat3& r, double tol) {
  Mat3 should_be_identity = r.transpose() * r;
  if ((should_be_identity - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(r.determinant() - 1.0) <= tol;
}

double angle_between(const Vec3& a, const Vec3& b) {
  double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

PlaneEq plane_from_points(const Vec3& p1, const Vec3& p2, const Vec3& p3) {
  Vec3 cross = (p2 - p1).cross(p3 - p1);
  double area = 0.5 * cross.norm();
  if (area <= 1e-12) {
    raise(ErrorCode::DegeneratePoints, "collinear points, triangle area <= 1e-12 m^2");
  }
  PlaneEq plane;
  plane.normal = cross.normalized();
  plane.offset = plane.normal.dot(p1);
  return plane;
}

std::vector<Circle3> circles_from_pair(const Vec3& p1, const Vec3& p2,
                                       const Vec3& plane_normal, double radius) {
  Vec3 chord = p2 - p1;
  double chord_len = chord.norm();
  if (chord_len < 1e-12) {
    raise(ErrorCode::DegeneratePoints, "coincident chord endpoints");
  }
  if (chord_len > 2.0 * radius + 1e-12) {
    raise(ErrorCode::ChordTooLong, "chord exceeds circle diameter");
  }
  Vec3 mid = 0.5 * (p1 + p2);
  double h_sq = radius * radius - 0.25 * chord_len * chord_len;
  if (h_sq <= 0.0) {
    // Diameter chord: the perpendicular-bisector offset vanishes.
    return {Circle3{mid, plane_normal, radius}};
  }
  double h = std::sqrt(h_sq);
  Vec3 perp = plane_normal.cross(chord).normalized();
  return {Circle3{mid + h * perp, plane_normal, radius},
          Circle3{mid - h * perp, plane_normal, radius}};
}

double point_circle_distance(const Circle3& c, const Vec3& p) {
  Vec3 v = p - c.center;
  double axial = v.dot(c.normal);
  double in_plane = (v - axial * c.normal).norm();
  // in_plane == 0 (point on the axis) falls out of the same expression:
  // distance = sqrt(r^2 + axial^2).
  return std::hypot(in_plane - c.radius, axial);
}

void plane_basis(const Vec3& normal, Vec3& e1, Vec3& e2) {
  Vec3 seed = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  e1 = (seed - seed.dot(normal) * normal).normalized();
  e2 = normal.cross(e1);
}

}  // namespace regrasp
