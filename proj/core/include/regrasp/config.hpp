#pragma once

#include <cstdint>
#include <string>

#include "regrasp/geometry.hpp"

namespace regrasp {

/// All tunable parameters of the simulated cell. Defaults describe the stock
/// desk-scale setup; a sectioned key=value profile file can override any of
/// them (see load_config).
struct SystemConfig {
  // [stereo] rectified pair facing the arms, angled slightly downwards
  struct Stereo {
    double fx = 2600.0;
    double fy = 2600.0;
    double cx = 767.5;
    double cy = 431.5;
    int width = 1536;
    int height = 864;
    double baseline = 0.08;            // meters
    Vec3 position = Vec3(0.0, -0.20, 0.22);  // rig center
    Vec3 look_at = Vec3(0.0, 0.0, 0.125);
  } stereo;

  // [overhead] monocular camera facing straight down
  struct Overhead {
    double fx = 900.0;
    double fy = 900.0;
    double cx = 319.5;
    double cy = 239.5;
    int width = 640;
    int height = 480;
    Vec3 position = Vec3(0.0, 0.0, 0.35);
    Vec3 look_at = Vec3(0.0, 0.0, 0.10);
  } overhead;

  // [arms] remote centers and shared workspace
  struct Arms {
    Vec3 left_rcm = Vec3(-0.10, 0.0, 0.30);
    Vec3 right_rcm = Vec3(0.10, 0.0, 0.30);
    Vec3 workspace_center = Vec3(0.0, 0.0, 0.10);
    Vec3 workspace_half_extents = Vec3(0.12, 0.12, 0.10);
    Vec3 home_offset = Vec3(0.0, 0.0, 0.018);  // acquisition pose relative to workspace center
    double tip_anchor_offset = 0.015;          // jaw-to-anchor displacement along the
                                               // needle clamp axis, for tip selection
  } arms;

  // [noise] actuation and observation noise (calibrated profile by default)
  struct Noise {
    double systematic_sigma = 0.001;      // per-trial constant offset draw, meters
    double jitter_sigma = 0.0005;         // per-move translation jitter, meters
    double rot_jitter_sigma_deg = 0.5;    // per-move rotation jitter, degrees
    double dropout_rate = 0.05;           // mask pixel dropout probability
    double blob_rate = 0.05;              // expected false-positive blobs per mask
    double label_flip_rate = 0.05;        // grasp policy label corruption
  } noise;

  // [needle]
  struct Needle {
    double arc_extent_deg = 180.0;
    double occlusion_radius = 0.008;      // gripper occlusion disk, meters
    double sample_spacing = 0.001;        // arc sampling for rendering, meters
    double half_thickness_px = 2.0;       // rasterized stroke half width
  } needle;

  // [servo]
  struct Servo {
    int max_iterations = 10;
    double tolerance = 0.05;              // radians
    double step_cap = 0.35;               // radians per iteration
    double translation_scale = 0.05;      // meters treated as 1 radian in the update norm
    double rotation_increment_deg = 30.0; // exploratory acquisition rotations
    int max_exploratory_rotations = 24;
    double align_max_angle_deg = 10.0;    // presentation post-condition bounds
  } servo;

  // [ransac]
  struct Ransac {
    double inlier_radius = 0.001;
    int iterations = 300;
    int min_inliers = 20;
  } ransac;

  // [grasp]
  struct Grasp {
    double beta_decay = 0.5;
    double stop_threshold = 0.0002;       // meters
    double initial_step = 0.0016;         // meters
    double descent = 0.01;                // meters
    int max_steps = 50;
    Vec3 capture_half_widths = Vec3(0.002, 0.005, 0.003);  // x across, y along opening, z vertical
    double in_hand_rot_sigma_deg = 3.0;   // post-grasp in-hand perturbation
  } grasp;

  // [sim]
  struct Sim {
    long tau_max = 600;                   // steps without a handoff before timeout
    double step_latency = 0.25;           // simulated seconds per step
  } sim;
};

/// Zero-noise copy of a profile (actuation, rendering, and policy noise off).
SystemConfig zero_noise(SystemConfig config);

/// Parses a sectioned key=value profile and overrides fields of `base`.
/// Unknown sections or keys raise InvalidConfig; vectors are "x,y,z" triples.
SystemConfig load_config(const std::string& path, SystemConfig base = {});

/// Writes the full profile in the same format load_config accepts.
void save_config(const std::string& path, const SystemConfig& config);

}  // namespace regrasp
