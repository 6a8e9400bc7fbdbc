#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "regrasp/grasp.hpp"
#include "regrasp/servo.hpp"

using namespace regrasp;
using test_helpers::error_code_of;

namespace {

SystemConfig quiet() { return zero_noise(SystemConfig{}); }

RansacParams default_ransac(const SystemConfig& config, std::uint64_t seed = 11) {
  RansacParams params;
  params.inlier_radius = config.ransac.inlier_radius;
  params.iterations = config.ransac.iterations;
  params.min_inliers = config.ransac.min_inliers;
  params.seed = seed;
  return params;
}

/// Ground-truth estimator: reads the world state directly.
Estimator exact_estimator() {
  return [](SimWorld& w) {
    NeedleStateEstimate est;
    est.circle = w.needle.circle;
    if (est.circle.normal.dot(w.rig.left.position() - est.circle.center) < 0.0) {
      est.circle.normal = -est.circle.normal;
    }
    est.tip = true_grasp_target(w);
    est.inlier_count = 999;
    return est;
  };
}

/// Rotates the held needle so its normal sits `angle` away from the
/// camera-alignment target.
void offset_needle_normal(SimWorld& world, double angle) {
  Vec3 to_camera =
      (world.rig.left.position() - world.needle.circle.center).normalized();
  Vec3 axis = to_camera.cross(Vec3::UnitZ()).normalized();
  Vec3 target_normal = axis_angle(axis, angle) * to_camera;
  Mat3 fix = rotation_between(world.needle.circle.normal, target_normal);
  RigidTransform next = world.gripper(ArmId::Left).commanded_pose;
  Vec3 pivot = world.needle.circle.center;
  next.rotation = fix * next.rotation;
  next.translation = pivot + fix * (next.translation - pivot);
  command_arm(world, ArmId::Left, next, 1);
}

}  // namespace

TEST_CASE("fixed-point servoing") {
  SystemConfig config = quiet();
  ServoParams params{10, 0.01, 0.35, 0.05};
  ServoMetric metric;
  metric.kind = MetricKind::AlignNormalToCamera;

  SUBCASE("already at the target: zero updates") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, config);
    metric.camera_position = world.rig.left.position();
    offset_needle_normal(world, 0.0);
    ServoResult result = presentation_servo(exact_estimator(), world, ArmId::Left, metric, params);
    CHECK(result.iterations == 0);
    CHECK(result.trace.size() == 1);
  }

  SUBCASE("30 degree error with a generous cap converges in one iteration") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, config);
    metric.camera_position = world.rig.left.position();
    offset_needle_normal(world, 30.0 * M_PI / 180.0);
    ServoParams wide = params;
    wide.step_cap = 35.0 * M_PI / 180.0;
    ServoResult result = presentation_servo(exact_estimator(), world, ArmId::Left, metric, wide);
    CHECK(result.iterations == 1);
  }

  SUBCASE("30 degree error with a 10 degree cap takes 3 iterations plus verification") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, config);
    metric.camera_position = world.rig.left.position();
    offset_needle_normal(world, 30.0 * M_PI / 180.0);
    ServoParams capped = params;
    capped.step_cap = 10.0 * M_PI / 180.0;
    ServoResult result = presentation_servo(exact_estimator(), world, ArmId::Left, metric, capped);
    CHECK(result.iterations == 3);
    CHECK(result.trace.size() == 4);  // three corrections and one verification
  }

  SUBCASE("zero-noise contraction: the error strictly shrinks") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, config);
    metric.camera_position = world.rig.left.position();
    offset_needle_normal(world, 100.0 * M_PI / 180.0);
    ServoResult result = presentation_servo(exact_estimator(), world, ArmId::Left, metric, params);
    for (std::size_t i = 1; i < result.trace.size(); ++i) {
      CHECK(result.trace[i].update_norm < result.trace[i - 1].update_norm);
    }
    CHECK(result.trace.back().update_norm < params.tolerance);
  }

  SUBCASE("termination: at most max_iterations + 1 estimator calls, then NotConverged") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, config);
    metric.camera_position = world.rig.left.position();
    int calls = 0;
    Estimator stuck = [&calls](SimWorld& w) {
      ++calls;
      NeedleStateEstimate est;
      est.circle = w.needle.circle;
      // Report a normal 90 degrees off target, forever.
      Vec3 to_cam = (w.rig.left.position() - w.needle.circle.center).normalized();
      est.circle.normal = to_cam.cross(Vec3::UnitZ()).normalized();
      est.tip = w.needle.tip;
      est.inlier_count = 999;
      return est;
    };
    CHECK(error_code_of([&] {
            presentation_servo(stuck, world, ArmId::Left, metric, params);
          }) == ErrorCode::NotConverged);
    CHECK(calls == params.max_iterations + 1);
  }

  SUBCASE("estimation failure propagates as EstimationFailed") {
    SystemConfig dark = config;
    dark.noise.dropout_rate = 1.0;
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, dark);
    metric.camera_position = world.rig.left.position();
    Estimator real = [&](SimWorld& w) {
      return estimate_world(w, ArmId::Left, default_ransac(dark));
    };
    CHECK(error_code_of([&] {
            presentation_servo(real, world, ArmId::Left, metric, params);
          }) == ErrorCode::EstimationFailed);
  }
}

TEST_CASE("metric zero consistency") {
  ServoParams params{10, 0.01, 0.35, 0.05};
  ServoMetric metric;
  metric.kind = MetricKind::AlignTipAndFlatten;
  metric.other_gripper_dir = Vec3::UnitX();
  metric.workspace_center = Vec3(0, 0, 0.10);

  NeedleStateEstimate at_target;
  at_target.circle = {Vec3(0, 0, 0.10), Vec3::UnitZ(), 0.0125};
  at_target.tip = Vec3(0.0125, 0, 0.10);
  at_target.inlier_count = 50;
  PoseUpdate zero = compute_update(metric, at_target, params);
  CHECK(zero.raw_angle < 1e-12);
  CHECK(zero.translation.norm() == 0.0);

  NeedleStateEstimate tilted = at_target;
  tilted.circle.normal = axis_angle(Vec3::UnitX(), 45.0 * M_PI / 180.0) * Vec3::UnitZ();
  PoseUpdate update = compute_update(metric, tilted, params);
  CHECK(update.raw_angle == doctest::Approx(45.0 * M_PI / 180.0).epsilon(0.01));

  NeedleStateEstimate displaced = at_target;
  displaced.circle.center += Vec3(0.05, 0.0, 0.0);  // outside the 3 cm box
  displaced.tip += Vec3(0.05, 0.0, 0.0);
  PoseUpdate recenter = compute_update(metric, displaced, params);
  CHECK(recenter.translation.norm() > 0.0);
}

TEST_CASE("needle acquisition") {
  SystemConfig config = quiet();
  ServoParams params;

  SUBCASE("a fully visible start needs no exploratory rotations") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, config);
    ServoResult result = acquire_needle(world, ArmId::Left, params, default_ransac(config));
    CHECK(result.exploratory_rotations == 0);
    CHECK(result.estimate.inlier_count >= 20);
  }

  SUBCASE("the edge-on start resolves within two rotations") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 3}, 0.0125, 1, config);
    ServoResult result = acquire_needle(world, ArmId::Left, params, default_ransac(config));
    CHECK(result.exploratory_rotations <= 2);
    CHECK(result.estimate.inlier_count >= 20);
  }

  SUBCASE("acquisition aligns the needle normal to the left camera") {
    for (int bin : {0, 1, 2, 3, 4, 5, 6}) {
      SimWorld world = make_world({Face::Towards, Grip::Tip, bin}, 0.0125, 1, config);
      ServoResult result = acquire_needle(world, ArmId::Left, params, default_ransac(config));
      Vec3 to_camera = world.rig.left.position() - world.needle.circle.center;
      double err = angle_between(world.needle.circle.normal, to_camera);
      err = std::min(err, M_PI - err);
      CHECK(err < 5.0 * M_PI / 180.0);
    }
  }

  SUBCASE("an invisible needle fails acquisition") {
    SystemConfig dark = config;
    dark.noise.dropout_rate = 1.0;
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, dark);
    CHECK(error_code_of([&] {
            acquire_needle(world, ArmId::Left, params, default_ransac(dark));
          }) == ErrorCode::AcquisitionFailed);
  }
}

TEST_CASE("handover positioning") {
  SystemConfig config = quiet();
  ServoParams params;

  SUBCASE("zero-noise positioning satisfies all alignment bounds") {
    for (int bin : {0, 2, 5}) {
      SimWorld world = make_world({Face::Towards, Grip::Tip, bin}, 0.0125, 1, config);
      acquire_needle(world, ArmId::Left, params, default_ransac(config));
      ServoResult result = handover_position(world, ArmId::Left, params, default_ransac(config));

      const Vec3 center_goal = world.config.arms.workspace_center;
      double level = angle_between(world.needle.circle.normal, Vec3::UnitZ());
      level = std::min(level, M_PI - level);
      CHECK(level < 10.0 * M_PI / 180.0);
      Vec3 tip_dir = true_grasp_target(world) - world.needle.circle.center;
      CHECK(angle_between(tip_dir, Vec3::UnitX()) < 10.0 * M_PI / 180.0);
      CHECK(std::abs(world.needle.circle.center.x() - center_goal.x()) <= 0.03 + 1e-3);
      CHECK(std::abs(world.needle.circle.center.y() - center_goal.y()) <= 0.03 + 1e-3);
      CHECK(std::abs(world.needle.circle.center.z() - center_goal.z()) <= 0.04 + 1e-3);
      CHECK(result.estimate.inlier_count >= 20);
    }
  }

  SUBCASE("an already presented needle converges immediately") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, config);
    acquire_needle(world, ArmId::Left, params, default_ransac(config));
    handover_position(world, ArmId::Left, params, default_ransac(config));
    // Second run starts at the target: 0 or 1 corrective updates.
    ServoResult again = handover_position(world, ArmId::Left, params, default_ransac(config));
    CHECK(again.iterations <= 1);
  }

  SUBCASE("unreachable workspaces map to PositioningFailed") {
    SimWorld world = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 1, config);
    acquire_needle(world, ArmId::Left, params, default_ransac(config));
    world.left_arm.workspace_center = Vec3(5.0, 5.0, 5.0);
    CHECK(error_code_of([&] {
            handover_position(world, ArmId::Left, params, default_ransac(config));
          }) == ErrorCode::PositioningFailed);
  }
}
