#pragma once

#include "regrasp/geometry.hpp"

namespace regrasp {

/// Pinhole camera. `pose` maps camera frame to world; the camera frame is
/// +x right (image x), +y down (image y), +z forward along the optical axis.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  RigidTransform pose;  // camera-to-world

  Vec3 position() const { return pose.translation; }
  Vec3 forward() const { return pose.rotation.col(2); }
};

/// Rectified pair: identical intrinsics, equal rotations, right camera offset
/// purely along the shared camera x-axis by `baseline`.
struct StereoRig {
  CameraModel left;
  CameraModel right;
  double baseline = 0.0;
};

Vec3 world_to_camera(const CameraModel& cam, const Vec3& p);

/// Pixel coordinates of a world point. Raises NonPositiveDepth when the
/// point is not strictly in front of the camera (depth <= 1e-9 m).
Vec2 project(const CameraModel& cam, const Vec3& p);

bool is_rectified(const StereoRig& rig, double tol = 1e-9);

/// Closed-form rectified triangulation: depth = fx * baseline / disparity.
/// Raises ZeroDisparity when disparity <= 0.01 px.
Vec3 triangulate(const StereoRig& rig, const Vec2& px_left, const Vec2& px_right);

/// Camera at `position` looking at `target`, image x kept horizontal when
/// possible (`up` breaks the tie for straight-down views).
CameraModel make_camera(double fx, double fy, double cx, double cy, int width, int height,
                        const Vec3& position, const Vec3& target, const Vec3& up = Vec3::UnitZ());

/// Rectified rig centered at `center`: cameras at center -/+ (baseline/2) x_cam.
StereoRig make_stereo_rig(double fx, double fy, double cx, double cy, int width, int height,
                          const Vec3& center, const Vec3& target, double baseline,
                          const Vec3& up = Vec3::UnitZ());

}  // namespace regrasp
