#include "regrasp/kinematics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "regrasp/rng.hpp"

namespace regrasp {
namespace {

Vec3 random_unit(CounterRng& rng) {
  Vec3 v;
  do {
    v = Vec3(rng.normal(), rng.normal(), rng.normal());
  } while (v.norm() < 1e-12);
  return v.normalized();
}

Mat3 rot_z(double a) { return axis_angle(Vec3::UnitZ(), a); }
Mat3 rot_x(double a) { return axis_angle(Vec3::UnitX(), a); }

struct FeasibleBox {
  Vec3 lo;
  Vec3 hi;
  bool empty = false;

  Vec3 clamp(const Vec3& p) const {
    return Vec3(std::clamp(p.x(), lo.x(), hi.x()), std::clamp(p.y(), lo.y(), hi.y()),
                std::clamp(p.z(), lo.z(), hi.z()));
  }
};

FeasibleBox intersect_boxes(const Vec3& center_a, const Vec3& half_a, const Vec3& center_b,
                            const Vec3& half_b) {
  FeasibleBox box;
  for (int i = 0; i < 3; ++i) {
    box.lo[i] = std::max(center_a[i] - half_a[i], center_b[i] - half_b[i]);
    box.hi[i] = std::min(center_a[i] + half_a[i], center_b[i] + half_b[i]);
    if (box.lo[i] > box.hi[i]) box.empty = true;
  }
  return box;
}

// zxz factorization M = Rz(a) Rx(b) Rz(c); returns (a, b). The dropped
// trailing Rz(c) is the coupled direction, so (a, b) is the natural descent
// start for projecting M onto the actuated set.
std::pair<double, double> zx_euler_init(const Mat3& m) {
  double sb = std::hypot(m(0, 2), m(1, 2));
  if (sb < 1e-12) {
    double a = std::atan2(m(1, 0), m(0, 0));
    return {a, m(2, 2) > 0.0 ? 0.0 : M_PI};
  }
  double b = std::atan2(sb, m(2, 2));
  double a = std::atan2(m(0, 2), -m(1, 2));
  return {a, b};
}

}  // namespace

RigidTransform apply_noise(const RigidTransform& commanded, const NoiseModel& noise,
                           std::uint64_t move_index) {
  CounterRng rng(CounterRng::combine(noise.seed, move_index));
  RigidTransform actual = commanded;
  actual.translation += noise.systematic_offset;
  if (noise.jitter_sigma > 0.0) {
    actual.translation += Vec3(rng.normal(noise.jitter_sigma), rng.normal(noise.jitter_sigma),
                               rng.normal(noise.jitter_sigma));
  }
  if (noise.rot_jitter_sigma > 0.0) {
    Vec3 axis = random_unit(rng);
    actual.rotation = axis_angle(axis, rng.normal(noise.rot_jitter_sigma)) * actual.rotation;
  }
  return actual;
}

Mat3 reachable_rotation(const ArmModel& arm, const Vec3& t, double roll, double bend) {
  Vec3 shaft = t - arm.base.translation;
  Vec3 u = shaft.norm() < 1e-12 ? Vec3(0, 0, -1) : Vec3(shaft.normalized());
  return rotation_between(Vec3::UnitZ(), u) * rot_z(roll) * rot_x(bend);
}

IkResult ik_solve(const ArmModel& arm, const RigidTransform& target, const Vec3& trans_tol) {
  FeasibleBox box = intersect_boxes(target.translation, trans_tol, arm.workspace_center,
                                    arm.workspace_half_extents);
  if (box.empty) {
    raise(ErrorCode::Unreachable, "translation tolerance box misses the arm workspace");
  }

  const Vec3 t0 = box.clamp(target.translation);

  // Rotation error dominates, but translation drift is penalized strongly
  // enough that the solver only walks toward a box face when the rotational
  // payoff is substantial; downstream servoing can absorb rotation residuals
  // while a badly placed needle can leave the cameras' field of view.
  constexpr double kTranslationWeight = 10.0;  // radians per meter
  auto objective = [&](const Vec3& t, double roll, double bend) {
    return geodesic_angle(reachable_rotation(arm, t, roll, bend), target.rotation) +
           kTranslationWeight * (t - target.translation).norm();
  };

  // Descent start from the zxz factorization at the clamped target translation.
  Vec3 shaft0 = t0 - arm.base.translation;
  Vec3 u0 = shaft0.norm() < 1e-12 ? Vec3(0, 0, -1) : Vec3(shaft0.normalized());
  Mat3 align = rotation_between(Vec3::UnitZ(), u0);
  auto [a0, b0] = zx_euler_init(align.transpose() * target.rotation);

  double best_error = std::numeric_limits<double>::infinity();
  Vec3 best_t = t0;
  double best_roll = a0, best_bend = b0;

  for (int start = 0; start < 8; ++start) {
    double roll = a0 + (start % 4) * (M_PI / 2.0);
    double bend = start < 4 ? b0 : -b0;
    Vec3 t = t0;

    Vec3 t_step = Vec3(std::max(1e-9, 0.5 * (box.hi.x() - box.lo.x())),
                       std::max(1e-9, 0.5 * (box.hi.y() - box.lo.y())),
                       std::max(1e-9, 0.5 * (box.hi.z() - box.lo.z())));
    double r_step = 0.5;
    double err = objective(t, roll, bend);

    for (int iter = 0; iter < 200; ++iter) {
      bool improved = false;
      for (int dim = 0; dim < 5; ++dim) {
        for (int sign = -1; sign <= 1; sign += 2) {
          Vec3 t_probe = t;
          double roll_probe = roll, bend_probe = bend;
          if (dim < 3) {
            t_probe[dim] += sign * t_step[dim];
            t_probe = box.clamp(t_probe);
          } else if (dim == 3) {
            roll_probe += sign * r_step;
          } else {
            bend_probe += sign * r_step;
          }
          double probe = objective(t_probe, roll_probe, bend_probe);
          if (probe < err - 1e-15) {
            err = probe;
            t = t_probe;
            roll = roll_probe;
            bend = bend_probe;
            improved = true;
          }
        }
      }
      if (!improved) {
        t_step *= 0.5;
        r_step *= 0.5;
        if (r_step < 1e-9 && t_step.maxCoeff() < 1e-9) break;
      }
    }

    if (err < best_error) {
      best_error = err;
      best_t = t;
      best_roll = roll;
      best_bend = bend;
    }
  }

  IkResult result;
  result.pose = RigidTransform::from(reachable_rotation(arm, best_t, best_roll, best_bend), best_t);
  result.rotational_error = geodesic_angle(result.pose.rotation, target.rotation);
  if (result.rotational_error >= M_PI / 2.0) {
    raise(ErrorCode::Unreachable, "no pose in the tolerance box reaches rotational error < 90 deg");
  }
  return result;
}

CurvatureChoice choose_curvature_config(const RigidTransform& goal_toward,
                                        const RigidTransform& goal_away, const ArmModel& arm,
                                        const Vec3& trans_tol) {
  bool have_toward = true, have_away = true;
  IkResult toward, away;
  try {
    toward = ik_solve(arm, goal_toward, trans_tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unreachable) throw;
    have_toward = false;
  }
  try {
    away = ik_solve(arm, goal_away, trans_tol);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Unreachable) throw;
    have_away = false;
  }

  if (!have_toward && !have_away) {
    raise(ErrorCode::BothUnreachable, "neither curvature goal is reachable");
  }
  if (have_toward && (!have_away || toward.rotational_error <= away.rotational_error)) {
    return {0, toward};
  }
  return {1, away};
}

}  // namespace regrasp
