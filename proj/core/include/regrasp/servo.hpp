#pragma once

#include <functional>
#include <vector>

#include "regrasp/perception.hpp"
#include "regrasp/sim.hpp"

namespace regrasp {

struct ServoParams {
  int max_iterations = 10;
  double tolerance = 0.05;           // radians
  double step_cap = 0.35;            // max rotation per iteration, radians
  double translation_scale = 0.05;   // meters per radian in the mixed update norm
};

enum class MetricKind { AlignNormalToCamera, AlignTipAndFlatten };

/// Distance metric for the fixed-point servo loop. AlignNormalToCamera
/// rotates the needle normal towards the viewing camera; AlignTipAndFlatten
/// levels the needle over the table, points the tip direction at the other
/// gripper, and recenters the circle inside the workspace-center box.
struct ServoMetric {
  MetricKind kind = MetricKind::AlignNormalToCamera;
  Vec3 camera_position = Vec3::Zero();
  Vec3 other_gripper_dir = Vec3::UnitX();  // horizontal unit vector
  Vec3 table_normal = Vec3::UnitZ();
  Vec3 workspace_center = Vec3::Zero();
  Vec3 center_tolerance = Vec3(0.03, 0.03, 0.04);
};

/// Corrective update: rotation applied about the estimated needle center,
/// plus a translation. `raw_angle` is the uncapped rotational error used for
/// the convergence test.
struct PoseUpdate {
  Mat3 rotation = Mat3::Identity();  // capped
  Vec3 translation = Vec3::Zero();
  double raw_angle = 0.0;
  double norm(double translation_scale) const {
    return raw_angle + translation.norm() / translation_scale;
  }
  bool is_identity() const { return raw_angle == 0.0 && translation.isZero(0.0); }
};

/// Computes the metric update for one estimate. Zero exactly when the state
/// satisfies the metric's target.
PoseUpdate compute_update(const ServoMetric& metric, const NeedleStateEstimate& estimate,
                          const ServoParams& params);

using Estimator = std::function<NeedleStateEstimate(SimWorld&)>;

/// Renders the current observation and runs the stereo perception pipeline;
/// the gripper reference position is the holder's commanded (encoder) pose.
NeedleStateEstimate estimate_world(SimWorld& world, ArmId holding_arm, const RansacParams& params);

struct ServoIterationTrace {
  int iteration = 0;
  double update_norm = 0.0;
  int inlier_count = 0;
};

struct ServoResult {
  NeedleStateEstimate estimate;
  int iterations = 0;            // updates actually applied
  int exploratory_rotations = 0; // acquisition sweep moves before visibility
  std::vector<ServoIterationTrace> trace;
};

/// Fixed-point presentation servoing: estimate, compute the capped update,
/// command the holding arm, and stop once the update norm falls below
/// tolerance. Raises EstimationFailed when the estimator cannot see the
/// needle and NotConverged after max_iterations updates.
ServoResult presentation_servo(const Estimator& estimator, SimWorld& world, ArmId arm,
                               const ServoMetric& metric, const ServoParams& params);

/// Acquisition: move to the home pose, rotate in fixed increments about the
/// world z and x axes until the estimator reports at least min_inliers, then
/// servo the needle normal towards the left stereo camera. Raises
/// AcquisitionFailed when a full sweep never reaches the threshold.
ServoResult acquire_needle(SimWorld& world, ArmId arm, const ServoParams& params,
                           const RansacParams& ransac);

/// Handover positioning: pick the curvature goal with the smaller IK
/// residual, move there, then servo with AlignTipAndFlatten until the needle
/// is level, pointed at the other gripper, and centered. Raises
/// PositioningFailed (failure mode P) when any stage cannot complete.
ServoResult handover_position(SimWorld& world, ArmId arm, const ServoParams& params,
                              const RansacParams& ransac);

}  // namespace regrasp
