#include "regrasp/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regrasp/rng.hpp"

namespace regrasp {
namespace {

// Stream tags for deriving independent RNG streams from the trial seed.
constexpr std::uint64_t kStreamNoiseLeft = 0x6e6f69736c ;
constexpr std::uint64_t kStreamNoiseRight = 0x6e6f697372;
constexpr std::uint64_t kStreamRender = 0x72656e64;
constexpr std::uint64_t kStreamInHand = 0x696e68616e;

bool pose_equal(const RigidTransform& a, const RigidTransform& b) {
  return (a.rotation.array() == b.rotation.array()).all() &&
         (a.translation.array() == b.translation.array()).all();
}

void stamp_disk(SegMask& mask, double row, double col, double radius, std::uint8_t value) {
  int r0 = std::max(0, static_cast<int>(std::floor(row - radius)));
  int r1 = std::min(mask.height - 1, static_cast<int>(std::ceil(row + radius)));
  int c0 = std::max(0, static_cast<int>(std::floor(col - radius)));
  int c1 = std::min(mask.width - 1, static_cast<int>(std::ceil(col + radius)));
  double rr = radius * radius;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      double dr = r - row;
      double dc = c - col;
      if (dr * dr + dc * dc <= rr) mask.set(r, c, value);
    }
  }
}

void stroke_segment(SegMask& mask, const Vec2& a, const Vec2& b, double half_thickness) {
  double lo_x = std::min(a.x(), b.x()) - half_thickness;
  double hi_x = std::max(a.x(), b.x()) + half_thickness;
  double lo_y = std::min(a.y(), b.y()) - half_thickness;
  double hi_y = std::max(a.y(), b.y()) + half_thickness;
  int c0 = std::max(0, static_cast<int>(std::floor(lo_x)));
  int c1 = std::min(mask.width - 1, static_cast<int>(std::ceil(hi_x)));
  int r0 = std::max(0, static_cast<int>(std::floor(lo_y)));
  int r1 = std::min(mask.height - 1, static_cast<int>(std::ceil(hi_y)));
  Vec2 ab = b - a;
  double len_sq = ab.squaredNorm();
  double ht_sq = half_thickness * half_thickness;
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      Vec2 p(c, r);
      double t = len_sq > 0.0 ? std::clamp((p - a).dot(ab) / len_sq, 0.0, 1.0) : 0.0;
      Vec2 closest = a + t * ab;
      if ((p - closest).squaredNorm() <= ht_sq) mask.set(r, c, 1);
    }
  }
}

void render_into(const SimWorld& world, const CameraModel& cam, int cam_index, SegMask& mask) {
  mask = SegMask(cam.width, cam.height);
  const SystemConfig::Needle& nc = world.config.needle;
  std::vector<Vec3> samples = arc_points(world.needle, nc.sample_spacing);

  std::vector<Vec2> px(samples.size());
  std::vector<bool> visible(samples.size(), false);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    try {
      px[i] = project(cam, samples[i]);
      visible[i] = true;
    } catch (const Error&) {
      visible[i] = false;
    }
  }
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    if (visible[i] && visible[i + 1]) {
      stroke_segment(mask, px[i], px[i + 1], nc.half_thickness_px);
    } else if (visible[i]) {
      stamp_disk(mask, px[i].y(), px[i].x(), nc.half_thickness_px, 1);
    }
  }
  if (!samples.empty() && visible.back()) {
    stamp_disk(mask, px.back().y(), px.back().x(), nc.half_thickness_px, 1);
  }

  // Gripper occlusion: a disk around the grasp point swallows nearby pixels.
  if (world.needle_attached()) {
    Vec3 gp = grasp_point(world.needle);
    Vec3 in_cam = world_to_camera(cam, gp);
    if (in_cam.z() > 1e-6) {
      Vec2 center(cam.fx * in_cam.x() / in_cam.z() + cam.cx,
                  cam.fy * in_cam.y() / in_cam.z() + cam.cy);
      double radius_px = cam.fx * nc.occlusion_radius / in_cam.z();
      stamp_disk(mask, center.y(), center.x(), radius_px, 0);
    }
  }

  CounterRng rng = CounterRng(world.trial_seed)
                       .derive(kStreamRender)
                       .derive(static_cast<std::uint64_t>(world.clock))
                       .derive(static_cast<std::uint64_t>(cam_index));
  if (world.render_noise.dropout_rate > 0.0) {
    for (auto& v : mask.data) {
      if (v && rng.bernoulli(world.render_noise.dropout_rate)) v = 0;
    }
  }
  if (world.render_noise.blob_rate > 0.0) {
    double rate = world.render_noise.blob_rate;
    int blobs = static_cast<int>(rate);
    if (rng.bernoulli(rate - blobs)) ++blobs;
    for (int b = 0; b < blobs; ++b) {
      double row = rng.uniform(0.0, mask.height - 1.0);
      double col = rng.uniform(0.0, mask.width - 1.0);
      double radius = rng.uniform(2.0, 4.0);
      stamp_disk(mask, row, col, radius, 1);
    }
  }
}

void transform_needle(ArcNeedle& needle, const RigidTransform& delta) {
  needle.circle.center = delta.apply(needle.circle.center);
  needle.circle.normal = delta.rotation * needle.circle.normal;
  needle.tip = delta.apply(needle.tip);
}

}  // namespace

std::vector<StartConfig> all_start_configs() {
  std::vector<StartConfig> configs;
  configs.reserve(28);
  for (Face face : {Face::Towards, Face::Away}) {
    for (Grip grip : {Grip::Tip, Grip::Inward30}) {
      for (int bin = 0; bin <= 6; ++bin) {
        configs.push_back({face, grip, bin});
      }
    }
  }
  return configs;
}

int config_index(const StartConfig& config) {
  int face = config.face == Face::Towards ? 0 : 1;
  int grip = config.grip == Grip::Tip ? 0 : 1;
  return (face * 2 + grip) * 7 + config.rotation_bin;
}

Vec3 arc_point(const ArcNeedle& needle, double arclength_angle) {
  Mat3 rot = axis_angle(needle.circle.normal, arclength_angle);
  return needle.circle.center + rot * (needle.tip - needle.circle.center);
}

Vec3 arc_tangent(const ArcNeedle& needle, double arclength_angle) {
  Vec3 radial = arc_point(needle, arclength_angle) - needle.circle.center;
  return needle.circle.normal.cross(radial).normalized();
}

std::vector<Vec3> arc_points(const ArcNeedle& needle, double spacing_m) {
  double arc_len = needle.circle.radius * needle.arc_extent;
  int n = std::max(2, static_cast<int>(std::ceil(arc_len / spacing_m)) + 1);
  std::vector<Vec3> points(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double s = needle.arc_extent * i / (n - 1);
    points[static_cast<std::size_t>(i)] = arc_point(needle, s);
  }
  return points;
}

Vec3 grasp_point(const ArcNeedle& needle) { return arc_point(needle, needle.grasp_arclength); }

ArmId SimWorld::holder() const {
  return needle.attached_arm == ArcNeedle::Attachment::Right ? ArmId::Right : ArmId::Left;
}

RigidTransform home_pose(const SimWorld& world, ArmId arm) {
  Vec3 position = world.config.arms.workspace_center + world.config.arms.home_offset;
  return RigidTransform::from(reachable_rotation(world.arm(arm), position, 0.0, 0.0), position);
}

Vec3 tip_anchor(const SimWorld& world, ArmId arm, bool commanded) {
  const GripperState& gs = world.gripper(arm);
  const RigidTransform& pose = commanded ? gs.commanded_pose : gs.actual_pose;
  return pose.translation +
         world.config.arms.tip_anchor_offset * (pose.rotation * world.grip_tangent);
}

SimWorld make_world(const StartConfig& config, double needle_radius, std::uint64_t seed,
                    const SystemConfig& system, ArmId holder) {
  SimWorld world;
  world.config = system;
  world.trial_seed = seed;

  const auto& st = system.stereo;
  world.rig = make_stereo_rig(st.fx, st.fy, st.cx, st.cy, st.width, st.height, st.position,
                              st.look_at, st.baseline);
  const auto& ov = system.overhead;
  world.overhead = make_camera(ov.fx, ov.fy, ov.cx, ov.cy, ov.width, ov.height, ov.position,
                               ov.look_at);

  world.left_arm = {ArmId::Left, RigidTransform::from(Mat3::Identity(), system.arms.left_rcm), 5,
                    system.arms.workspace_center, system.arms.workspace_half_extents};
  world.right_arm = {ArmId::Right, RigidTransform::from(Mat3::Identity(), system.arms.right_rcm),
                     5, system.arms.workspace_center, system.arms.workspace_half_extents};

  // Per-arm noise: one constant offset drawn per trial, plus per-move jitter
  // seeds derived from the trial seed.
  CounterRng offset_rng = CounterRng(seed).derive(kStreamNoiseLeft);
  world.left_noise.systematic_offset =
      Vec3(offset_rng.normal(system.noise.systematic_sigma),
           offset_rng.normal(system.noise.systematic_sigma),
           offset_rng.normal(system.noise.systematic_sigma));
  world.left_noise.jitter_sigma = system.noise.jitter_sigma;
  world.left_noise.rot_jitter_sigma = system.noise.rot_jitter_sigma_deg * M_PI / 180.0;
  world.left_noise.seed = CounterRng::combine(seed, kStreamNoiseLeft);

  CounterRng offset_rng_r = CounterRng(seed).derive(kStreamNoiseRight);
  world.right_noise.systematic_offset =
      Vec3(offset_rng_r.normal(system.noise.systematic_sigma),
           offset_rng_r.normal(system.noise.systematic_sigma),
           offset_rng_r.normal(system.noise.systematic_sigma));
  world.right_noise.jitter_sigma = system.noise.jitter_sigma;
  world.right_noise.rot_jitter_sigma = system.noise.rot_jitter_sigma_deg * M_PI / 180.0;
  world.right_noise.seed = CounterRng::combine(seed, kStreamNoiseRight);

  world.render_noise = {system.noise.dropout_rate, system.noise.blob_rate};

  // Grippers: holder starts at its acquisition home, the other arm parks to
  // the side. Initial commanded == actual (encoders are trusted at t = 0).
  RigidTransform holder_pose = home_pose(world, holder);
  ArmId parked = other_arm(holder);
  Vec3 park_position = system.arms.workspace_center +
                       Vec3(parked == ArmId::Left ? -0.08 : 0.08, 0.0, 0.06);
  RigidTransform park = RigidTransform::from(
      reachable_rotation(world.arm(parked), park_position, 0.0, 0.0), park_position);
  world.gripper(holder) = {holder_pose, holder_pose, 1};
  world.gripper(parked) = {park, park, 0};

  // Needle-in-gripper placement, in the left-holder convention: the local
  // tangent at the grasp point runs along the inter-arm axis, the rotation
  // bin spins the needle about it, and the face flag picks which way the
  // plane normal starts (facing the camera at bin 0 or facing away). Bin 0
  // is exactly face-on and bin 3 exactly edge-on for the stereo rig. The
  // right-holder placement is the exact mirror across the arms' midplane.
  Vec3 jaw = holder_pose.translation;
  Vec3 tangent = Vec3::UnitX();
  Vec3 view = world.rig.left.forward();
  view.x() = 0.0;  // rig center axis: drop the small rectification skew
  view.normalize();
  Vec3 normal0 = config.face == Face::Towards ? Vec3(-view) : view;
  Mat3 bin_rot = axis_angle(tangent, config.rotation_bin * 30.0 * M_PI / 180.0);
  Vec3 normal = bin_rot * normal0;
  Vec3 radial = normal.cross(tangent);

  ArcNeedle needle;
  needle.circle.radius = needle_radius;
  needle.circle.normal = normal;
  needle.circle.center = jaw + needle_radius * radial;
  needle.arc_extent = system.needle.arc_extent_deg * M_PI / 180.0;
  needle.grasp_arclength = config.grip == Grip::Tip ? 0.0 : M_PI / 6.0;
  needle.tip = needle.circle.center +
               axis_angle(normal, -needle.grasp_arclength) * (jaw - needle.circle.center);
  if (holder == ArmId::Right) {
    auto mirror = [](const Vec3& v) { return Vec3(-v.x(), v.y(), v.z()); };
    Vec3 pivot = jaw;  // jaw sits on the midplane; mirror about its x
    needle.circle.center = mirror(needle.circle.center - pivot) + pivot;
    needle.tip = mirror(needle.tip - pivot) + pivot;
    needle.circle.normal = -mirror(needle.circle.normal);
  }
  needle.attached_arm =
      holder == ArmId::Left ? ArcNeedle::Attachment::Left : ArcNeedle::Attachment::Right;
  world.needle = needle;
  world.grip_tangent = world.gripper(holder).actual_pose.rotation.transpose() *
                       arc_tangent(world.needle, world.needle.grasp_arclength);
  return world;
}

ObservationBundle render_masks(const SimWorld& world) {
  ObservationBundle bundle;
  render_into(world, world.rig.left, 0, bundle.left_mask);
  render_into(world, world.rig.right, 1, bundle.right_mask);
  render_into(world, world.overhead, 2, bundle.overhead_mask);
  return bundle;
}

SegMask render_view(const SimWorld& world, int camera_index) {
  SegMask mask;
  const CameraModel& cam = camera_index == 0   ? world.rig.left
                           : camera_index == 1 ? world.rig.right
                                               : world.overhead;
  render_into(world, cam, camera_index, mask);
  return mask;
}

void step(SimWorld& world, const ActionCommand& action) {
  const JawAction* jaw_actions[2] = {&action.left, &action.right};
  for (int i = 0; i < 2; ++i) {
    ArmId id = i == 0 ? ArmId::Left : ArmId::Right;
    GripperState& gs = world.gripper(id);
    const NoiseModel& noise = id == ArmId::Left ? world.left_noise : world.right_noise;
    const JawAction& ja = *jaw_actions[i];
    if (!pose_equal(ja.pose, gs.commanded_pose)) {
      RigidTransform old_actual = gs.actual_pose;
      gs.commanded_pose = ja.pose;
      gs.actual_pose = apply_noise(ja.pose, noise, world.move_counter++);
      bool carries_needle =
          (world.needle.attached_arm == ArcNeedle::Attachment::Left && id == ArmId::Left) ||
          (world.needle.attached_arm == ArcNeedle::Attachment::Right && id == ArmId::Right);
      if (carries_needle) {
        transform_needle(world.needle, compose(gs.actual_pose, invert(old_actual)));
      }
    }
    gs.jaw = ja.jaw;
  }
  ++world.clock;
}

void command_arm(SimWorld& world, ArmId arm, const RigidTransform& pose, int jaw) {
  ActionCommand action;
  action.left = {world.left_gripper.commanded_pose, world.left_gripper.jaw};
  action.right = {world.right_gripper.commanded_pose, world.right_gripper.jaw};
  JawAction& mine = arm == ArmId::Left ? action.left : action.right;
  mine.pose = pose;
  mine.jaw = jaw;
  step(world, action);
}

GraspAdjudication adjudicate_grasp(SimWorld& world, ArmId grasping_arm) {
  const Vec3 jaw = world.gripper(grasping_arm).actual_pose.translation;
  const Vec3 half = world.config.grasp.capture_half_widths;

  // Walk the arc finely: capture succeeds when any point falls inside the
  // box; the residual reports the Euclidean-nearest point either way.
  const double spacing = 0.0005;
  double arc_len = world.needle.circle.radius * world.needle.arc_extent;
  int n = std::max(2, static_cast<int>(std::ceil(arc_len / spacing)) + 1);
  bool captured = false;
  double nearest_sq = std::numeric_limits<double>::infinity();
  double best_s = 0.0;
  Vec3 best_delta = Vec3::Zero();
  for (int i = 0; i < n; ++i) {
    double s = world.needle.arc_extent * i / (n - 1);
    Vec3 delta = arc_point(world.needle, s) - jaw;
    if (std::abs(delta.x()) <= half.x() && std::abs(delta.y()) <= half.y() &&
        std::abs(delta.z()) <= half.z()) {
      captured = true;
    }
    double d_sq = delta.squaredNorm();
    if (d_sq < nearest_sq) {
      nearest_sq = d_sq;
      best_s = s;
      best_delta = delta;
    }
  }

  GraspAdjudication result;
  result.residual = best_delta.cwiseAbs();
  result.success = captured;
  if (!result.success) return result;

  world.needle.attached_arm = grasping_arm == ArmId::Left ? ArcNeedle::Attachment::Left
                                                          : ArcNeedle::Attachment::Right;
  world.needle.grasp_arclength = best_s;

  // Small in-hand rotation about the local tangent models imperfect grasps.
  double sigma = world.config.grasp.in_hand_rot_sigma_deg * M_PI / 180.0;
  if (sigma > 0.0) {
    CounterRng rng = CounterRng(world.trial_seed)
                         .derive(kStreamInHand)
                         .derive(static_cast<std::uint64_t>(world.clock));
    double angle = rng.normal(sigma);
    Vec3 pivot = arc_point(world.needle, best_s);
    Vec3 tangent = arc_tangent(world.needle, best_s);
    RigidTransform spin = RigidTransform::from(axis_angle(tangent, angle),
                                               pivot - axis_angle(tangent, angle) * pivot);
    transform_needle(world.needle, spin);
    result.in_hand_rotation = angle;
  }

  // New clamp axis: the local tangent, pointed toward the longer arc side.
  Vec3 new_tangent = arc_tangent(world.needle, best_s);
  if (best_s > 0.5 * world.needle.arc_extent) new_tangent = -new_tangent;
  world.grip_tangent =
      world.gripper(grasping_arm).actual_pose.rotation.transpose() * new_tangent;
  world.last_handoff_clock = world.clock;
  return result;
}

}  // namespace regrasp
