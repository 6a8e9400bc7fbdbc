#pragma once

#include <cstdint>

#include "regrasp/geometry.hpp"

namespace regrasp {

enum class ArmId { Left, Right };

inline ArmId other_arm(ArmId arm) { return arm == ArmId::Left ? ArmId::Right : ArmId::Left; }
inline const char* to_string(ArmId arm) { return arm == ArmId::Left ? "left" : "right"; }

/// Simplified cable-driven arm. The tool shaft pivots about a fixed remote
/// center (base.translation); the wrist actuates roll about the shaft and a
/// single bend, so one rotational direction at the end effector is coupled
/// rather than free (5 rotational degrees of freedom in total).
struct ArmModel {
  ArmId arm_id = ArmId::Left;
  RigidTransform base;  // remote-center pose; only the translation is used
  int rotational_dof = 5;
  Vec3 workspace_center = Vec3::Zero();
  Vec3 workspace_half_extents = Vec3(0.12, 0.12, 0.10);
};

/// Cable-drive positioning error: a per-trial constant offset plus seeded
/// per-move translation/rotation jitter.
struct NoiseModel {
  Vec3 systematic_offset = Vec3::Zero();  // per-trial constant, meters
  double jitter_sigma = 0.0;              // per-move translation sigma, meters
  double rot_jitter_sigma = 0.0;          // per-move rotation sigma, radians
  std::uint64_t seed = 0;
};

struct GripperState {
  RigidTransform commanded_pose;
  RigidTransform actual_pose;
  int jaw = 0;  // 0 open, 1 closed
};

/// Perturbs a commanded pose. Deterministic in (noise.seed, move_index); with
/// zero sigmas the translation shifts by exactly systematic_offset and the
/// rotation is untouched.
RigidTransform apply_noise(const RigidTransform& commanded, const NoiseModel& noise,
                           std::uint64_t move_index);

/// End-effector rotations reachable at translation t: align the tool shaft
/// from the remote center through t, then roll about the shaft and bend about
/// the rolled x-axis. The residual rotation about the gripper z-axis is the
/// coupled, unreachable direction.
Mat3 reachable_rotation(const ArmModel& arm, const Vec3& t, double roll, double bend);

struct IkResult {
  RigidTransform pose;            // commanded pose: translation inside the box
  double rotational_error = 0.0;  // residual geodesic error, radians
};

inline Vec3 default_ik_tolerance() { return Vec3(0.03, 0.03, 0.04); }

/// Numerical IK with a box tolerance on translation: finds a commanded pose
/// whose translation lies within the box centered at the target translation
/// (intersected with the arm workspace) and whose rotation minimizes geodesic
/// error to the target over the reachable set. Deterministic multi-start
/// pattern descent with 8 fixed starts. Raises Unreachable when the feasible
/// box is empty or no pose attains rotational error < 90 degrees.
IkResult ik_solve(const ArmModel& arm, const RigidTransform& target, const Vec3& trans_tol);

struct CurvatureChoice {
  int index = 0;  // 0: curvature-toward-camera goal, 1: curvature-away goal
  IkResult ik;
};

/// Solves IK for both curvature goals and returns the one with the smaller
/// residual rotational error; ties pick the toward-camera goal. Raises
/// BothUnreachable when neither goal admits a solution.
CurvatureChoice choose_curvature_config(const RigidTransform& goal_toward,
                                        const RigidTransform& goal_away, const ArmModel& arm,
                                        const Vec3& trans_tol = default_ik_tolerance());

}  // namespace regrasp
