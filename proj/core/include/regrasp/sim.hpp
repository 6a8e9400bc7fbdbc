#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regrasp/camera.hpp"
#include "regrasp/config.hpp"
#include "regrasp/geometry.hpp"
#include "regrasp/kinematics.hpp"
#include "regrasp/mask.hpp"

namespace regrasp {

enum class Face { Towards, Away };
enum class Grip { Tip, Inward30 };

inline const char* to_string(Face f) { return f == Face::Towards ? "towards" : "away"; }
inline const char* to_string(Grip g) { return g == Grip::Tip ? "tip" : "inward30"; }

/// One of the 2 x 2 x 7 = 28 discretized needle-in-gripper start states:
/// arc facing towards/away from the camera, grasp at the tip or 30 degrees
/// of arc inwards, and a rotation of 30 deg * bin about the tangent axis at
/// the grasp point.
struct StartConfig {
  Face face = Face::Towards;
  Grip grip = Grip::Tip;
  int rotation_bin = 0;  // 0..6 -> 0..180 degrees
};

std::vector<StartConfig> all_start_configs();
int config_index(const StartConfig& config);  // 0..27, stable enumeration order

/// Circular-arc needle. The arc starts at `tip` and sweeps `arc_extent`
/// radians about the circle normal; the grasp sits `grasp_arclength` radians
/// from the tip along the arc.
struct ArcNeedle {
  Circle3 circle;
  Vec3 tip = Vec3::Zero();
  double arc_extent = M_PI;
  double grasp_arclength = 0.0;
  enum class Attachment { None, Left, Right } attached_arm = Attachment::None;
};

Vec3 arc_point(const ArcNeedle& needle, double arclength_angle);
std::vector<Vec3> arc_points(const ArcNeedle& needle, double spacing_m);
Vec3 grasp_point(const ArcNeedle& needle);
/// Unit tangent of the arc at a given arc parameter.
Vec3 arc_tangent(const ArcNeedle& needle, double arclength_angle);

struct ObservationBundle {
  SegMask left_mask;
  SegMask right_mask;
  SegMask overhead_mask;
};

struct JawAction {
  RigidTransform pose;
  int jaw = 0;
};

struct ActionCommand {
  JawAction left;
  JawAction right;
};

struct RenderNoise {
  double dropout_rate = 0.0;
  double blob_rate = 0.0;
};

/// Deterministic world model: two grippers with cable-drive noise, a rigidly
/// attached needle, the camera set, and seeded noise streams. One world per
/// trial; worlds never share mutable state.
struct SimWorld {
  SystemConfig config;
  StereoRig rig;
  CameraModel overhead;
  ArmModel left_arm;
  ArmModel right_arm;
  GripperState left_gripper;
  GripperState right_gripper;
  NoiseModel left_noise;
  NoiseModel right_noise;
  RenderNoise render_noise;
  ArcNeedle needle;
  /// Needle clamp axis in the holding gripper's frame, oriented toward the
  /// arc body; updated whenever the needle changes hands.
  Vec3 grip_tangent = Vec3::UnitX();
  std::uint64_t trial_seed = 0;
  long clock = 0;
  long last_handoff_clock = 0;
  std::uint64_t move_counter = 0;

  const ArmModel& arm(ArmId id) const { return id == ArmId::Left ? left_arm : right_arm; }
  GripperState& gripper(ArmId id) { return id == ArmId::Left ? left_gripper : right_gripper; }
  const GripperState& gripper(ArmId id) const {
    return id == ArmId::Left ? left_gripper : right_gripper;
  }
  ArmId holder() const;
  bool needle_attached() const { return needle.attached_arm != ArcNeedle::Attachment::None; }
};

/// Acquisition home pose for an arm: hover above the workspace center with
/// the reachable zero-roll, zero-bend orientation.
RigidTransform home_pose(const SimWorld& world, ArmId arm);

/// Tip-selection anchor: the jaw displaced along the gripper's needle-clamp
/// axis toward the arc body. Distances measured from this point make the
/// distal arc end the unique furthest needle region for every hold
/// orientation, so furthest-point tip selection is stable.
Vec3 tip_anchor(const SimWorld& world, ArmId arm, bool commanded = true);

/// Builds a trial world with the needle attached to `holder` in the given
/// start configuration. Deterministic in (config, needle_radius, seed).
SimWorld make_world(const StartConfig& config, double needle_radius, std::uint64_t seed,
                    const SystemConfig& system = {}, ArmId holder = ArmId::Left);

/// Renders the needle into all three masks: the arc is sampled every
/// sample_spacing meters, projected, and stroked with half_thickness_px;
/// pixels inside the projected gripper occlusion disk are removed; seeded
/// dropout and false-positive blobs are applied last. Deterministic given
/// the world seed and clock.
ObservationBundle render_masks(const SimWorld& world);

/// One view only: 0 = stereo left, 1 = stereo right, 2 = overhead.
SegMask render_view(const SimWorld& world, int camera_index);

/// Applies one action: commanded poses are set, actual poses follow with
/// actuation noise, the attached needle moves rigidly, jaws latch, and the
/// clock advances. Re-commanding an identical pose does not re-actuate.
void step(SimWorld& world, const ActionCommand& action);

/// Convenience: command a new pose/jaw for one arm, holding the other fixed.
void command_arm(SimWorld& world, ArmId arm, const RigidTransform& pose, int jaw);

struct GraspAdjudication {
  bool success = false;
  Vec3 residual = Vec3::Zero();   // componentwise |offset| of the best arc point
  double in_hand_rotation = 0.0;  // applied perturbation on success, radians
};

/// Jaw-close outcome: success iff some needle-curve point lies inside the
/// capture box around the grasping jaw. On success the needle re-attaches to
/// the grasping arm with a recomputed grasp arclength and a seeded in-hand
/// rotation about the local tangent.
GraspAdjudication adjudicate_grasp(SimWorld& world, ArmId grasping_arm);

}  // namespace regrasp
