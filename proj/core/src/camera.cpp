#include "regrasp/camera.hpp"

#include <cmath>

namespace regrasp {

Vec3 world_to_camera(const CameraModel& cam, const Vec3& p) {
  return cam.pose.rotation.transpose() * (p - cam.pose.translation);
}

Vec2 project(const CameraModel& cam, const Vec3& p) {
  Vec3 pc = world_to_camera(cam, p);
  if (pc.z() <= 1e-9) {
    raise(ErrorCode::NonPositiveDepth, "point at or behind the camera");
  }
  return {cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy};
}

bool is_rectified(const StereoRig& rig, double tol) {
  if (rig.baseline <= 0.0) return false;
  if (rig.left.fx != rig.right.fx || rig.left.fy != rig.right.fy ||
      rig.left.cx != rig.right.cx || rig.left.cy != rig.right.cy ||
      rig.left.width != rig.right.width || rig.left.height != rig.right.height) {
    return false;
  }
  if ((rig.left.pose.rotation - rig.right.pose.rotation).cwiseAbs().maxCoeff() > tol) return false;
  Vec3 offset = rig.right.pose.translation - rig.left.pose.translation;
  Vec3 expected = rig.baseline * rig.left.pose.rotation.col(0);
  return (offset - expected).norm() <= tol * std::max(1.0, rig.baseline);
}

Vec3 triangulate(const StereoRig& rig, const Vec2& px_left, const Vec2& px_right) {
  double disparity = px_left.x() - px_right.x();
  if (disparity <= 0.01) {
    raise(ErrorCode::ZeroDisparity, "disparity <= 0.01 px");
  }
  double z = rig.left.fx * rig.baseline / disparity;
  double x = (px_left.x() - rig.left.cx) * z / rig.left.fx;
  double y = (0.5 * (px_left.y() + px_right.y()) - rig.left.cy) * z / rig.left.fy;
  return rig.left.pose.apply(Vec3(x, y, z));
}

CameraModel make_camera(double fx, double fy, double cx, double cy, int width, int height,
                        const Vec3& position, const Vec3& target, const Vec3& up) {
  CameraModel cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = width;
  cam.height = height;
  Vec3 forward = (target - position).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) {
    // Looking along `up`: fall back to world x for the image x-axis.
    right = Vec3::UnitX();
  }
  right.normalize();
  Vec3 down = forward.cross(right).normalized();
  Mat3 r;
  r.col(0) = right;
  r.col(1) = down;
  r.col(2) = forward;
  cam.pose = RigidTransform::from(r, position);
  return cam;
}

StereoRig make_stereo_rig(double fx, double fy, double cx, double cy, int width, int height,
                          const Vec3& center, const Vec3& target, double baseline, const Vec3& up) {
  CameraModel reference = make_camera(fx, fy, cx, cy, width, height, center, target, up);
  Vec3 x_cam = reference.pose.rotation.col(0);
  StereoRig rig;
  rig.baseline = baseline;
  rig.left = reference;
  rig.left.pose.translation = center - 0.5 * baseline * x_cam;
  rig.right = reference;
  rig.right.pose.translation = center + 0.5 * baseline * x_cam;
  return rig;
}

}  // namespace regrasp
