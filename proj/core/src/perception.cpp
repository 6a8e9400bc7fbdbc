#include "regrasp/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

#include "regrasp/rng.hpp"

namespace regrasp {
namespace {

constexpr double kInf = 1e18;

// 1D squared-distance transform (lower envelope of parabolas), after
// Felzenszwalb & Huttenlocher. `f` holds source costs, `d` the output.
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z, int n) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

DistanceGrid distance_transform(const SegMask& mask) {
  // Pad with a one-pixel background ring so the border acts as background,
  // run the exact 2D EDT on the padded grid, then crop.
  const int pw = mask.width + 2;
  const int ph = mask.height + 2;
  std::vector<double> grid(static_cast<std::size_t>(pw) * ph, 0.0);
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      if (mask.at(r, c)) grid[static_cast<std::size_t>(r + 1) * pw + (c + 1)] = kInf;
    }
  }

  const int n_max = std::max(pw, ph);
  std::vector<double> f(n_max), d(n_max), z(n_max + 1);
  std::vector<int> v(n_max);

  // Columns first, then rows.
  for (int c = 0; c < pw; ++c) {
    for (int r = 0; r < ph; ++r) f[r] = grid[static_cast<std::size_t>(r) * pw + c];
    edt_1d(f, d, v, z, ph);
    for (int r = 0; r < ph; ++r) grid[static_cast<std::size_t>(r) * pw + c] = d[r];
  }
  for (int r = 0; r < ph; ++r) {
    for (int c = 0; c < pw; ++c) f[c] = grid[static_cast<std::size_t>(r) * pw + c];
    edt_1d(f, d, v, z, pw);
    for (int c = 0; c < pw; ++c) grid[static_cast<std::size_t>(r) * pw + c] = d[c];
  }

  DistanceGrid out;
  out.width = mask.width;
  out.height = mask.height;
  out.data.resize(mask.data.size());
  for (int r = 0; r < mask.height; ++r) {
    for (int c = 0; c < mask.width; ++c) {
      out.data[static_cast<std::size_t>(r) * mask.width + c] =
          std::sqrt(grid[static_cast<std::size_t>(r + 1) * pw + (c + 1)]);
    }
  }
  return out;
}

std::vector<std::vector<int>> scanline_peaks(const DistanceGrid& dt) {
  std::vector<std::vector<int>> peaks(static_cast<std::size_t>(dt.height));
  for (int r = 0; r < dt.height; ++r) {
    const double* row = dt.data.data() + static_cast<std::size_t>(r) * dt.width;
    int c = 0;
    while (c < dt.width) {
      double value = row[c];
      if (value < 1.0) {
        ++c;
        continue;
      }
      int end = c + 1;
      while (end < dt.width && row[end] == value) ++end;
      double left = c > 0 ? row[c - 1] : 0.0;
      double right = end < dt.width ? row[end] : 0.0;
      if (left < value && right < value) {
        peaks[r].push_back(c + (end - 1 - c) / 2);
      }
      c = end;
    }
  }
  return peaks;
}

PointCloud build_cloud(const StereoRig& rig, const std::vector<std::vector<int>>& peaks_left,
                       const std::vector<std::vector<int>>& peaks_right) {
  PointCloud cloud;
  const std::size_t rows = std::min(peaks_left.size(), peaks_right.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (int cl : peaks_left[r]) {
      for (int cr : peaks_right[r]) {
        if (cl - cr <= 0) continue;  // non-positive disparity, skip
        try {
          Vec3 p = triangulate(rig, Vec2(cl, static_cast<double>(r)),
                               Vec2(cr, static_cast<double>(r)));
          cloud.points.push_back(p);
          cloud.source_rows.push_back(static_cast<int>(r));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::ZeroDisparity) throw;
        }
      }
    }
  }
  return cloud;
}

CircleFit ransac_circle(const PointCloud& cloud, double radius, const RansacParams& params) {
  auto rng = std::make_shared<CounterRng>(params.seed);
  const int n = static_cast<int>(cloud.size());
  TripleSampler sampler = [rng, n](int /*round*/, int cloud_size) {
    (void)n;
    std::array<int, 3> idx{};
    idx[0] = static_cast<int>(rng->uniform_index(static_cast<std::size_t>(cloud_size)));
    do {
      idx[1] = static_cast<int>(rng->uniform_index(static_cast<std::size_t>(cloud_size)));
    } while (idx[1] == idx[0]);
    do {
      idx[2] = static_cast<int>(rng->uniform_index(static_cast<std::size_t>(cloud_size)));
    } while (idx[2] == idx[0] || idx[2] == idx[1]);
    return idx;
  };
  return ransac_circle(cloud, radius, params, sampler);
}

CircleFit ransac_circle(const PointCloud& cloud, double radius, const RansacParams& params,
                        const TripleSampler& sampler) {
  if (cloud.size() < 3) {
    raise(ErrorCode::TooFewPoints, "RANSAC needs at least 3 points");
  }
  const int n = static_cast<int>(cloud.size());

  int best_count = -1;
  double best_rms = std::numeric_limits<double>::infinity();
  Circle3 best_circle;

  for (int round = 0; round < params.iterations; ++round) {
    std::array<int, 3> idx = sampler(round, n);
    const Vec3& a = cloud.points[idx[0]];
    const Vec3& b = cloud.points[idx[1]];
    const Vec3& c = cloud.points[idx[2]];

    PlaneEq plane;
    try {
      plane = plane_from_points(a, b, c);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegeneratePoints) throw;
      continue;
    }

    const std::array<std::pair<const Vec3*, const Vec3*>, 3> pairs = {
        std::make_pair(&a, &b), std::make_pair(&a, &c), std::make_pair(&b, &c)};
    for (const auto& [p, q] : pairs) {
      std::vector<Circle3> candidates;
      try {
        candidates = circles_from_pair(*p, *q, plane.normal, radius);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ChordTooLong && e.code() != ErrorCode::DegeneratePoints) throw;
        continue;
      }
      for (const Circle3& candidate : candidates) {
        int count = 0;
        double sum_sq = 0.0;
        for (const Vec3& point : cloud.points) {
          double dist = point_circle_distance(candidate, point);
          if (dist <= params.inlier_radius) {
            ++count;
            sum_sq += dist * dist;
          }
        }
        if (count == 0) continue;
        double rms = std::sqrt(sum_sq / count);
        if (count > best_count || (count == best_count && rms < best_rms)) {
          best_count = count;
          best_rms = rms;
          best_circle = candidate;
        }
      }
    }
  }

  if (best_count < 0) {
    raise(ErrorCode::NoValidCandidate, "every RANSAC round was degenerate");
  }

  CircleFit fit;
  fit.circle = best_circle;
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double dist = point_circle_distance(best_circle, cloud.points[i]);
    if (dist <= params.inlier_radius) {
      fit.inlier_indices.push_back(i);
      sum_sq += dist * dist;
    }
  }
  fit.rms_residual = fit.inlier_indices.empty()
                         ? 0.0
                         : std::sqrt(sum_sq / static_cast<double>(fit.inlier_indices.size()));
  return fit;
}

Vec3 estimate_tip(const CircleFit& fit, const PointCloud& cloud, const Vec3& gripper_pos) {
  if (fit.inlier_indices.empty()) {
    raise(ErrorCode::NoInliers, "tip selection needs at least one inlier");
  }
  int best_index = fit.inlier_indices.front();
  double best_dist = -1.0;
  for (int i : fit.inlier_indices) {
    double dist = (cloud.points[i] - gripper_pos).norm();
    if (dist > best_dist) {
      best_dist = dist;
      best_index = i;
    }
  }
  return cloud.points[best_index];
}

NeedleStateEstimate estimate_state(const SegMask& left_mask, const SegMask& right_mask,
                                   const StereoRig& rig, const Vec3& gripper_pos, double radius,
                                   const RansacParams& params) {
  DistanceGrid dt_left = distance_transform(left_mask);
  DistanceGrid dt_right = distance_transform(right_mask);
  PointCloud cloud = build_cloud(rig, scanline_peaks(dt_left), scanline_peaks(dt_right));

  CircleFit fit;
  try {
    fit = ransac_circle(cloud, radius, params);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::TooFewPoints || e.code() == ErrorCode::NoValidCandidate) {
      raise(ErrorCode::InsufficientObservation,
            "needle not sufficiently visible (cloud of " + std::to_string(cloud.size()) +
                " points)");
    }
    throw;
  }

  if (static_cast<int>(fit.inlier_indices.size()) < params.min_inliers) {
    raise(ErrorCode::InsufficientObservation,
          "only " + std::to_string(fit.inlier_indices.size()) + " inliers, need " +
              std::to_string(params.min_inliers));
  }

  NeedleStateEstimate estimate;
  estimate.circle = fit.circle;
  if (estimate.circle.normal.dot(rig.left.position() - estimate.circle.center) < 0.0) {
    estimate.circle.normal = -estimate.circle.normal;
  }
  estimate.tip = estimate_tip(fit, cloud, gripper_pos);
  estimate.inlier_count = static_cast<int>(fit.inlier_indices.size());
  return estimate;
}

void write_debug_overlay(const std::string& path, const SegMask& left_mask,
                         const CameraModel& left_camera, const PointCloud& cloud,
                         const CircleFit& fit) {
  RgbImage image(left_mask.width, left_mask.height);
  for (int r = 0; r < left_mask.height; ++r) {
    for (int c = 0; c < left_mask.width; ++c) {
      if (left_mask.at(r, c)) image.set(r, c, 128, 128, 128);
    }
  }

  std::vector<bool> is_inlier(cloud.size(), false);
  for (int i : fit.inlier_indices) is_inlier[static_cast<std::size_t>(i)] = true;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    Vec2 px;
    try {
      px = project(left_camera, cloud.points[i]);
    } catch (const Error&) {
      continue;
    }
    int r = static_cast<int>(std::lround(px.y()));
    int c = static_cast<int>(std::lround(px.x()));
    for (int dr = -1; dr <= 1; ++dr) {
      for (int dc = -1; dc <= 1; ++dc) {
        if (is_inlier[i]) {
          image.set(r + dr, c + dc, 40, 90, 255);
        } else {
          image.set(r + dr, c + dc, 255, 60, 60);
        }
      }
    }
  }

  Vec3 e1, e2;
  plane_basis(fit.circle.normal, e1, e2);
  constexpr int kCircleSamples = 720;
  for (int k = 0; k < kCircleSamples; ++k) {
    double theta = 2.0 * M_PI * k / kCircleSamples;
    Vec3 p = fit.circle.center + fit.circle.radius * (std::cos(theta) * e1 + std::sin(theta) * e2);
    try {
      Vec2 px = project(left_camera, p);
      image.set(static_cast<int>(std::lround(px.y())), static_cast<int>(std::lround(px.x())), 0,
                220, 60);
    } catch (const Error&) {
      // parts of the circle may project behind the camera; skip them
    }
  }

  write_ppm(path, image);
}

}  // namespace regrasp
