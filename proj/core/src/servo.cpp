#include "regrasp/servo.hpp"

#include <algorithm>
#include <cmath>

namespace regrasp {
namespace {

Mat3 cap_rotation(const Mat3& rotation, double angle, double cap) {
  if (angle <= cap || angle < 1e-15) return rotation;
  Vec3 log = rotation_log(rotation);
  return axis_angle(log.normalized(), cap);
}

/// Applies an update to the holding arm: rotate the commanded pose about the
/// estimated needle center, then translate.
void apply_update(SimWorld& world, ArmId arm, const Vec3& pivot, const PoseUpdate& update) {
  const RigidTransform& current = world.gripper(arm).commanded_pose;
  RigidTransform next;
  next.rotation = update.rotation * current.rotation;
  next.translation =
      pivot + update.rotation * (current.translation - pivot) + update.translation;
  command_arm(world, arm, next, world.gripper(arm).jaw);
}

bool inside_box(const Vec3& p, const Vec3& center, const Vec3& half) {
  return std::abs(p.x() - center.x()) <= half.x() && std::abs(p.y() - center.y()) <= half.y() &&
         std::abs(p.z() - center.z()) <= half.z();
}

/// Desired needle frame for a handover goal: tip direction along `tip_dir`,
/// plane normal `normal`, circle center at `center`.
RigidTransform needle_frame(const Vec3& center, const Vec3& tip_dir, const Vec3& normal) {
  Mat3 r;
  r.col(0) = tip_dir;
  r.col(1) = normal.cross(tip_dir);
  r.col(2) = normal;
  return RigidTransform::from(r, center);
}

RigidTransform estimated_needle_frame(const NeedleStateEstimate& estimate) {
  Vec3 n = estimate.circle.normal.normalized();
  Vec3 tip_dir = estimate.tip - estimate.circle.center;
  tip_dir -= tip_dir.dot(n) * n;
  if (tip_dir.norm() < 1e-12) tip_dir = n.cross(Vec3::UnitX());
  tip_dir.normalize();
  return needle_frame(estimate.circle.center, tip_dir, n);
}

}  // namespace

PoseUpdate compute_update(const ServoMetric& metric, const NeedleStateEstimate& estimate,
                          const ServoParams& params) {
  PoseUpdate update;
  if (metric.kind == MetricKind::AlignNormalToCamera) {
    Vec3 to_camera = (metric.camera_position - estimate.circle.center).normalized();
    double angle = angle_between(estimate.circle.normal, to_camera);
    update.raw_angle = angle;
    if (angle >= 1e-12) {
      // Rotation about c_n x (p_cam - c_p); for antiparallel vectors any
      // perpendicular axis works, which rotation_between resolves.
      Mat3 full = rotation_between(estimate.circle.normal, to_camera);
      update.rotation = cap_rotation(full, angle, params.step_cap);
    }
    return update;
  }

  // AlignTipAndFlatten: level the plane the short way, then swing the tip
  // direction onto the target bearing about the table normal.
  Vec3 n = estimate.circle.normal.normalized();
  Vec3 up = metric.table_normal;
  if (n.dot(up) < 0.0) up = -up;
  Mat3 level = rotation_between(n, up);

  Vec3 tip_dir = estimate.tip - estimate.circle.center;
  Vec3 leveled_tip = level * tip_dir;
  leveled_tip -= leveled_tip.dot(metric.table_normal) * metric.table_normal;
  Mat3 swing = Mat3::Identity();
  if (leveled_tip.norm() > 1e-12) {
    Vec3 l = leveled_tip.normalized();
    double yaw = std::atan2(metric.table_normal.dot(l.cross(metric.other_gripper_dir)),
                            l.dot(metric.other_gripper_dir));
    swing = axis_angle(metric.table_normal, yaw);
  }

  Mat3 full = swing * level;
  double angle = rotation_angle(full);
  update.raw_angle = angle;
  update.rotation = cap_rotation(full, angle, params.step_cap);
  if (!inside_box(estimate.circle.center, metric.workspace_center, metric.center_tolerance)) {
    update.translation = metric.workspace_center - estimate.circle.center;
  }
  return update;
}

NeedleStateEstimate estimate_world(SimWorld& world, ArmId holding_arm,
                                   const RansacParams& params) {
  ObservationBundle obs = render_masks(world);
  const Vec3 gripper = tip_anchor(world, holding_arm, /*commanded=*/true);
  return estimate_state(obs.left_mask, obs.right_mask, world.rig, gripper,
                        world.needle.circle.radius, params);
}

ServoResult presentation_servo(const Estimator& estimator, SimWorld& world, ArmId arm,
                               const ServoMetric& metric, const ServoParams& params) {
  ServoResult result;
  for (int i = 0; i <= params.max_iterations; ++i) {
    NeedleStateEstimate estimate;
    try {
      estimate = estimator(world);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InsufficientObservation) {
        raise(ErrorCode::EstimationFailed, e.what());
      }
      throw;
    }
    PoseUpdate update = compute_update(metric, estimate, params);
    result.trace.push_back({i, update.norm(params.translation_scale), estimate.inlier_count});
    if (update.norm(params.translation_scale) < params.tolerance) {
      result.estimate = estimate;
      result.iterations = i;
      return result;
    }
    if (i == params.max_iterations) break;
    apply_update(world, arm, estimate.circle.center, update);
  }
  raise(ErrorCode::NotConverged,
        "servo update still above tolerance after " + std::to_string(params.max_iterations) +
            " iterations");
}

ServoResult acquire_needle(SimWorld& world, ArmId arm, const ServoParams& params,
                           const RansacParams& ransac) {
  command_arm(world, arm, home_pose(world, arm), world.gripper(arm).jaw);

  const double increment = world.config.servo.rotation_increment_deg * M_PI / 180.0;
  const int max_rotations = world.config.servo.max_exploratory_rotations;

  bool seen = false;
  int rotations = 0;
  for (int attempt = 0; attempt <= max_rotations; ++attempt) {
    try {
      (void)estimate_world(world, arm, ransac);
      seen = true;
      break;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::InsufficientObservation) throw;
    }
    if (attempt == max_rotations) break;
    // Alternate exploratory rotations about the world z and x axes.
    Vec3 axis = attempt % 2 == 0 ? Vec3::UnitZ() : Vec3::UnitX();
    const RigidTransform& current = world.gripper(arm).commanded_pose;
    RigidTransform rotated;
    rotated.rotation = axis_angle(axis, increment) * current.rotation;
    rotated.translation = current.translation;
    command_arm(world, arm, rotated, world.gripper(arm).jaw);
    ++rotations;
  }
  if (!seen) {
    raise(ErrorCode::AcquisitionFailed,
          "rotation sweep never reached the inlier threshold of " +
              std::to_string(ransac.min_inliers));
  }

  ServoMetric metric;
  metric.kind = MetricKind::AlignNormalToCamera;
  metric.camera_position = world.rig.left.position();
  Estimator estimator = [&ransac, arm](SimWorld& w) { return estimate_world(w, arm, ransac); };
  try {
    ServoResult result = presentation_servo(estimator, world, arm, metric, params);
    result.exploratory_rotations = rotations;
    return result;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EstimationFailed || e.code() == ErrorCode::NotConverged) {
      raise(ErrorCode::AcquisitionFailed, e.what());
    }
    throw;
  }
}

ServoResult handover_position(SimWorld& world, ArmId arm, const ServoParams& params,
                              const RansacParams& ransac) {
  try {
    NeedleStateEstimate estimate = estimate_world(world, arm, ransac);

    // Both curvature goals share the center and tip bearing; they differ in
    // which side of the tip-gripper line the arc body bulges to, i.e. in the
    // sign of the plane normal.
    const Vec3 center_goal = world.config.arms.workspace_center;
    Vec3 park = world.gripper(other_arm(arm)).commanded_pose.translation - center_goal;
    Vec3 tip_dir(park.x() >= 0.0 ? 1.0 : -1.0, 0.0, 0.0);
    Vec3 camera_side = world.rig.left.position() - center_goal;
    camera_side.z() = 0.0;
    camera_side.normalize();

    // The mid-arc bulge points along normal x tip_dir, so the normal sign
    // picks which side of the tip bearing the arc body curves to.
    Vec3 bulge_up = Vec3::UnitZ().cross(tip_dir);
    Vec3 normal_toward =
        bulge_up.dot(camera_side) > 0.0 ? Vec3(Vec3::UnitZ()) : Vec3(-Vec3::UnitZ());
    RigidTransform goal_toward = needle_frame(center_goal, tip_dir, normal_toward);
    RigidTransform goal_away = needle_frame(center_goal, tip_dir, -normal_toward);

    RigidTransform current_frame = estimated_needle_frame(estimate);
    const RigidTransform& gripper = world.gripper(arm).commanded_pose;
    RigidTransform gripper_toward = compose(compose(goal_toward, invert(current_frame)), gripper);
    RigidTransform gripper_away = compose(compose(goal_away, invert(current_frame)), gripper);

    CurvatureChoice choice = choose_curvature_config(gripper_toward, gripper_away,
                                                     world.arm(arm));
    command_arm(world, arm, choice.ik.pose, world.gripper(arm).jaw);

    ServoMetric metric;
    metric.kind = MetricKind::AlignTipAndFlatten;
    metric.camera_position = world.rig.left.position();
    metric.other_gripper_dir = tip_dir;
    metric.table_normal = Vec3::UnitZ();
    metric.workspace_center = center_goal;
    metric.center_tolerance = default_ik_tolerance();
    Estimator estimator = [&ransac, arm](SimWorld& w) { return estimate_world(w, arm, ransac); };
    ServoResult result = presentation_servo(estimator, world, arm, metric, params);

    // Post conditions: level, pointed at the other gripper, and centered.
    const double max_angle = world.config.servo.align_max_angle_deg * M_PI / 180.0;
    Vec3 n = result.estimate.circle.normal;
    double level_err = std::acos(std::clamp(std::abs(n.dot(Vec3::UnitZ())) / n.norm(), -1.0, 1.0));
    Vec3 est_tip_dir = result.estimate.tip - result.estimate.circle.center;
    double bearing_err = angle_between(est_tip_dir, tip_dir);
    bool centered = inside_box(result.estimate.circle.center, center_goal,
                               metric.center_tolerance);
    if (level_err > max_angle || bearing_err > max_angle || !centered) {
      raise(ErrorCode::PositioningFailed, "presented pose misses the alignment bounds");
    }
    return result;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::PositioningFailed) throw;
    raise(ErrorCode::PositioningFailed, e.what());
  }
}

}  // namespace regrasp
