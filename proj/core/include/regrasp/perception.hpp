#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "regrasp/camera.hpp"
#include "regrasp/geometry.hpp"
#include "regrasp/mask.hpp"

namespace regrasp {

/// Triangulated needle candidate points plus the scanline each came from.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<int> source_rows;

  std::size_t size() const { return points.size(); }
};

struct RansacParams {
  double inlier_radius = 0.001;  // meters
  int iterations = 300;
  std::uint64_t seed = 0;
  int min_inliers = 20;  // visibility threshold for a usable estimate
};

struct CircleFit {
  Circle3 circle;
  std::vector<int> inlier_indices;
  double rms_residual = 0.0;  // over inliers only
};

/// Estimated needle state: best-fit circle (center, normal, known radius),
/// tip point, and the supporting inlier count.
struct NeedleStateEstimate {
  Circle3 circle;
  Vec3 tip = Vec3::Zero();
  int inlier_count = 0;
};

/// Exact Euclidean distance transform. Foreground pixels hold the distance to
/// the nearest background pixel; background pixels hold 0; the image border
/// counts as background.
DistanceGrid distance_transform(const SegMask& mask);

/// Per-row strict local maxima of the distance transform with value >= 1.
/// Plateaus contribute their center column (lower index on even plateaus).
std::vector<std::vector<int>> scanline_peaks(const DistanceGrid& dt);

/// Triangulates every (left, right) peak pair on each scanline, skipping
/// pairs with non-positive disparity.
PointCloud build_cloud(const StereoRig& rig, const std::vector<std::vector<int>>& peaks_left,
                       const std::vector<std::vector<int>>& peaks_right);

/// Index triple for one RANSAC round; injectable for instrumented runs.
using TripleSampler = std::function<std::array<int, 3>(int round, int cloud_size)>;

/// Known-radius RANSAC circle fit. Each round samples 3 distinct points,
/// fits their plane, and forms candidate circles of the given radius through
/// every point pair (up to 6 candidates per round). Returns the candidate
/// with the most inliers; ties break on lower rms residual, then on earlier
/// round. Deterministic given params.seed.
CircleFit ransac_circle(const PointCloud& cloud, double radius, const RansacParams& params);
CircleFit ransac_circle(const PointCloud& cloud, double radius, const RansacParams& params,
                        const TripleSampler& sampler);

/// Inlier point furthest from the gripper; ties break on lower index.
Vec3 estimate_tip(const CircleFit& fit, const PointCloud& cloud, const Vec3& gripper_pos);

/// Full stereo pipeline: distance transform -> scanline peaks -> all-pairs
/// triangulation -> known-radius RANSAC -> tip selection. The normal sign is
/// chosen to face the left camera. Raises InsufficientObservation when fewer
/// than params.min_inliers points support the fit.
NeedleStateEstimate estimate_state(const SegMask& left_mask, const SegMask& right_mask,
                                   const StereoRig& rig, const Vec3& gripper_pos, double radius,
                                   const RansacParams& params);

/// Debug overlay on the left view: mask in gray, outliers red, inliers blue,
/// reprojected circle green.
void write_debug_overlay(const std::string& path, const SegMask& left_mask,
                         const CameraModel& left_camera, const PointCloud& cloud,
                         const CircleFit& fit);

}  // namespace regrasp
