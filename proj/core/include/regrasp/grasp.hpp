#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "regrasp/perception.hpp"
#include "regrasp/sim.hpp"

namespace regrasp {

struct GraspParams {
  double beta_decay = 0.5;       // step multiplier on direction reversal
  double stop_threshold = 2e-4;  // meters; servoing stops below this step
  double initial_step = 1.6e-3;  // meters
  double descent = 0.01;         // final downward motion, meters
  int max_steps = 50;
};

enum class GraspAxis { X, Y };

inline const char* to_string(GraspAxis a) { return a == GraspAxis::X ? "x" : "y"; }

/// Direction policy for one axis: +1 or -1 given the current world
/// observation. Oracle policies read simulation ground truth; trained
/// policies render and crop the relevant camera view internally.
struct AxisPolicy {
  GraspAxis axis = GraspAxis::X;
  std::function<int(SimWorld&)> decide;
};

/// Ego-centric crop geometry. The x policy uses 140x200 crops from the
/// inclined (stereo left) camera; the y policy uses 70x200 crops from the
/// overhead camera.
struct CropSpec {
  enum class Source { Inclined, Overhead } source = Source::Inclined;
  int height = 140;
  int width = 200;
};

inline CropSpec x_crop_spec() { return {CropSpec::Source::Inclined, 140, 200}; }
inline CropSpec y_crop_spec() { return {CropSpec::Source::Overhead, 70, 200}; }

/// Crop intensities in [0, 1], row-major.
struct CropObs {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  float at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }
};

/// Crops around the gripper's kinematically projected location, clamped to
/// the image so the result always has the spec size. Raises GripperOffscreen
/// when the gripper does not project inside the image.
CropObs crop_egocentric(const SegMask& image, const RigidTransform& gripper_pose,
                        const CameraModel& camera, const CropSpec& spec);

/// Grasp target: the true needle point a policy should center on (the arc
/// point furthest from the holding gripper, matching the tip convention).
Vec3 true_grasp_target(const SimWorld& world);

/// Ground-truth direction oracle with a seeded label-flip corruption; stands
/// in for the learned per-axis classifier. At exactly zero offset the first
/// direction is +1.
AxisPolicy oracle_policy(GraspAxis axis, const SimWorld& world, double flip_rate,
                         std::uint64_t seed);

struct ServoAxisResult {
  int steps = 0;
  int flips = 0;
  double final_step = 0.0;
  double net_displacement = 0.0;
  double travel = 0.0;  // cumulative |displacement|
};

/// Decaying-step servoing along one axis: move, halve the step on every
/// direction flip, stop when the step decays below stop_threshold. Raises
/// MaxStepsExceeded when the budget runs out before convergence.
ServoAxisResult servo_axis(SimWorld& world, ArmId arm, const AxisPolicy& policy,
                           const GraspParams& params);

// ---------------------------------------------------------------------------
// Behavior-cloned axis policies: downsampled crop intensities fed to a small
// voting ensemble of linear classifiers.

inline constexpr int kFeatureRows = 10;
inline constexpr int kFeatureCols = 20;
inline constexpr int kEnsembleSize = 5;

struct Demo {
  std::vector<double> features;  // kFeatureRows * kFeatureCols cell means
  int label = 1;                 // +1 or -1
};

std::vector<double> crop_features(const CropObs& crop);

struct LinearMember {
  std::vector<double> weights;
  double bias = 0.0;
};

struct PolicyEnsemble {
  GraspAxis axis = GraspAxis::X;
  std::vector<LinearMember> members;
  double training_accuracy = 0.0;

  int decide(const CropObs& crop) const;
  int decide_features(const std::vector<double>& features) const;
};

/// Trains the 5-member voting ensemble (seeded perceptrons over bootstrap
/// resamples). Raises DegenerateDemos when all demos share one label.
PolicyEnsemble train_axis_policy(GraspAxis axis, const std::vector<Demo>& demos,
                                 std::uint64_t seed = 0);

/// Adapts a trained ensemble to the servo loop: renders the relevant camera,
/// crops at the gripper, and votes.
AxisPolicy policy_from_ensemble(std::shared_ptr<const PolicyEnsemble> ensemble);

/// Demonstration generation by sweeping gripper offsets around the true
/// grasp target and labeling with the direction back to it.
std::vector<Demo> generate_axis_demos(const SimWorld& world_at_pregrasp, GraspAxis axis,
                                      const std::vector<double>& offsets);

void save_demos_csv(const std::string& path, GraspAxis axis, const std::vector<Demo>& demos);
std::vector<Demo> load_demos_csv(const std::string& path, GraspAxis* axis_out = nullptr);
void save_policy(const std::string& path, const PolicyEnsemble& ensemble);
PolicyEnsemble load_policy(const std::string& path);

// ---------------------------------------------------------------------------

struct GraspOutcome {
  bool success = false;
  char failure_axis = '-';  // 'X' or 'Y' when the handover misses
  Vec3 residual = Vec3::Zero();
  ServoAxisResult x_servo;
  ServoAxisResult y_servo;
};

/// Full fine-grasp sequence: servo x, servo y, descend, close the jaw, and
/// adjudicate; on success the holding gripper releases afterwards. Axis
/// servo failures and capture misses are classified per axis.
GraspOutcome execute_grasp(SimWorld& world, ArmId grasping_arm, const AxisPolicy& x_policy,
                           const AxisPolicy& y_policy, const GraspParams& params,
                           const NeedleStateEstimate& presented);

}  // namespace regrasp
