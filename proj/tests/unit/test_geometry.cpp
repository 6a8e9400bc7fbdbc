#include <doctest.h>

#include "helpers.hpp"

#include <cmath>

#include "regrasp/camera.hpp"
#include "regrasp/geometry.hpp"
#include "regrasp/rng.hpp"

using namespace regrasp;

namespace {

RigidTransform rot_z_pose(double angle) {
  return RigidTransform::from(axis_angle(Vec3::UnitZ(), angle), Vec3::Zero());
}

StereoRig test_rig() {
  return make_stereo_rig(1000.0, 1000.0, 500.0, 500.0, 1000, 1000, Vec3(0, -0.2, 0.1),
                         Vec3(0, 0, 0.1), 0.05);
}

}  // namespace

TEST_CASE("compose with identity and inverse") {
  RigidTransform t = RigidTransform::from(axis_angle(Vec3(1, 2, 3).normalized(), 0.7),
                                          Vec3(0.1, -0.2, 0.3));
  RigidTransform with_identity = compose(t, RigidTransform::identity());
  CHECK((with_identity.rotation - t.rotation).cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  CHECK((with_identity.translation - t.translation).norm() == doctest::Approx(0.0));

  RigidTransform round = compose(t, invert(t));
  CHECK((round.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(round.translation.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("compose of two quarter turns matches the matrix product oracle") {
  RigidTransform quarter = rot_z_pose(M_PI / 2.0);
  RigidTransform half = compose(quarter, quarter);
  Mat3 oracle = quarter.rotation * quarter.rotation;  // independent matrix product
  CHECK((half.rotation - oracle).cwiseAbs().maxCoeff() < 1e-15);
  Mat3 exact = axis_angle(Vec3::UnitZ(), M_PI);
  CHECK((half.rotation - exact).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("long composition chains stay orthonormal") {
  RigidTransform step = RigidTransform::from(axis_angle(Vec3(0.3, 1.0, -0.2).normalized(), 0.013),
                                             Vec3(1e-4, -2e-4, 3e-4));
  RigidTransform acc;
  for (int i = 0; i < 5000; ++i) acc = compose(step, acc);
  CHECK(is_rotation(acc.rotation, 1e-9));
}

TEST_CASE("projection: optical axis, hand arithmetic, depth errors") {
  CameraModel cam;
  cam.fx = 1000.0;
  cam.fy = 1000.0;
  cam.cx = 500.0;
  cam.cy = 500.0;
  cam.width = 1000;
  cam.height = 1000;
  cam.pose = RigidTransform::identity();

  Vec2 on_axis = project(cam, Vec3(0, 0, 0.37));
  CHECK(on_axis.x() == doctest::Approx(500.0));
  CHECK(on_axis.y() == doctest::Approx(500.0));

  Vec2 offset = project(cam, Vec3(0.01, 0.0, 0.1));
  CHECK(offset.x() == doctest::Approx(600.0));
  CHECK(offset.y() == doctest::Approx(500.0));

  CHECK(test_helpers::error_code_of([&] { project(cam, Vec3(0, 0, -0.1)); }) ==
        ErrorCode::NonPositiveDepth);
}

TEST_CASE("triangulation depth follows f*b/d") {
  StereoRig rig;
  rig.baseline = 0.05;
  rig.left.fx = rig.left.fy = 1000.0;
  rig.left.cx = rig.left.cy = 500.0;
  rig.left.width = rig.left.height = 1000;
  rig.left.pose = RigidTransform::identity();
  rig.right = rig.left;
  rig.right.pose.translation = Vec3(0.05, 0, 0);

  Vec3 p = triangulate(rig, Vec2(500, 500), Vec2(450, 500));
  CHECK(p.z() == doctest::Approx(1.0));  // depth = 1000 * 0.05 / 50

  CHECK(test_helpers::error_code_of([&] { triangulate(rig, Vec2(500, 500), Vec2(500, 500)); }) ==
        ErrorCode::ZeroDisparity);
}

TEST_CASE("projection/triangulation round trip over 1000 seeded points") {
  StereoRig rig = test_rig();
  REQUIRE(is_rectified(rig));
  CounterRng rng(2024);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Vec3 p(rng.uniform(-0.04, 0.04), rng.uniform(-0.05, 0.05), rng.uniform(0.05, 0.16));
    Vec2 left, right;
    try {
      left = project(rig.left, p);
      right = project(rig.right, p);
    } catch (const Error&) {
      continue;  // outside one camera's view is fine for this property
    }
    Vec3 back = triangulate(rig, left, right);
    CHECK((back - p).norm() < 1e-9);
    // Reprojection consistency for exact inputs.
    CHECK((project(rig.left, back) - left).norm() < 1e-6);
    CHECK((project(rig.right, back) - right).norm() < 1e-6);
    ++checked;
  }
  CHECK(checked > 900);
}

TEST_CASE("plane from points") {
  PlaneEq plane = plane_from_points(Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0));
  CHECK(std::abs(plane.normal.z()) == doctest::Approx(1.0));
  CHECK(plane.offset == doctest::Approx(0.0));

  CHECK(test_helpers::error_code_of(
            [&] { plane_from_points(Vec3(0, 0, 0), Vec3(1, 1, 1), Vec3(2, 2, 2)); }) ==
        ErrorCode::DegeneratePoints);

  // Plug-back oracle on seeded triples.
  CounterRng rng(7);
  for (int i = 0; i < 200; ++i) {
    Vec3 a(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Vec3 b(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    Vec3 c(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    if (0.5 * (b - a).cross(c - a).norm() <= 1e-6) continue;
    PlaneEq p = plane_from_points(a, b, c);
    CHECK(std::abs(p.normal.dot(a) - p.offset) < 1e-12);
    CHECK(std::abs(p.normal.dot(b) - p.offset) < 1e-12);
    CHECK(std::abs(p.normal.dot(c) - p.offset) < 1e-12);
  }
}

TEST_CASE("circles from a chord") {
  const double r = 0.0125;

  SUBCASE("diameter chord yields a single centered circle") {
    auto circles = circles_from_pair(Vec3(-r, 0, 0), Vec3(r, 0, 0), Vec3::UnitZ(), r);
    REQUIRE(circles.size() == 1);
    CHECK(circles[0].center.norm() < 1e-12);
    CHECK(circles[0].radius == doctest::Approx(r));
  }

  SUBCASE("short chord yields perpendicular-bisector mirror centers") {
    // Oracle: h = sqrt(r^2 - (|p1-p2|/2)^2).
    Vec3 p1(0, 0, 0), p2(0.01, 0, 0);
    double h = std::sqrt(r * r - 0.005 * 0.005);
    auto circles = circles_from_pair(p1, p2, Vec3::UnitZ(), r);
    REQUIRE(circles.size() == 2);
    for (const Circle3& c : circles) {
      CHECK(c.center.x() == doctest::Approx(0.005));
      CHECK(std::abs(c.center.y()) == doctest::Approx(h));
      CHECK(c.center.z() == doctest::Approx(0.0));
    }
    CHECK(circles[0].center.y() * circles[1].center.y() < 0.0);  // mirror pair
  }

  SUBCASE("over-long chord is rejected") {
    CHECK(test_helpers::error_code_of([&] {
            circles_from_pair(Vec3(0, 0, 0), Vec3(3 * r, 0, 0), Vec3::UnitZ(), r);
          }) == ErrorCode::ChordTooLong);
  }

  SUBCASE("post conditions hold over seeded chords") {
    CounterRng rng(99);
    for (int i = 0; i < 500; ++i) {
      Vec3 n(rng.normal(), rng.normal(), rng.normal());
      if (n.norm() < 1e-6) continue;
      n.normalize();
      Vec3 e1, e2;
      plane_basis(n, e1, e2);
      Vec3 p1 = rng.uniform(-0.01, 0.01) * e1 + rng.uniform(-0.01, 0.01) * e2;
      Vec3 p2 = rng.uniform(-0.01, 0.01) * e1 + rng.uniform(-0.01, 0.01) * e2;
      if ((p2 - p1).norm() > 2 * r || (p2 - p1).norm() < 1e-9) continue;
      auto circles = circles_from_pair(p1, p2, n, r);
      CHECK(!circles.empty());
      for (const Circle3& c : circles) {
        CHECK(c.radius == doctest::Approx(r));
        CHECK((c.normal - n).norm() < 1e-12);
        CHECK(point_circle_distance(c, p1) < 1e-9);
        CHECK(point_circle_distance(c, p2) < 1e-9);
      }
    }
  }
}

TEST_CASE("point-circle distance") {
  Circle3 unit{Vec3::Zero(), Vec3::UnitZ(), 1.0};
  CHECK(point_circle_distance(unit, Vec3(1, 0, 0)) == doctest::Approx(0.0));
  CHECK(point_circle_distance(unit, Vec3(0, 0, 0)) == doctest::Approx(1.0));

  // Pythagorean decomposition: in-plane overshoot r, axial offset r.
  const double r = 0.0125;
  Circle3 c{Vec3(0.3, -0.2, 0.1), Vec3(0, 1, 0), r};
  Vec3 in_plane_dir(1, 0, 0);
  Vec3 p = c.center + 2 * r * in_plane_dir + r * c.normal;
  CHECK(point_circle_distance(c, p) == doctest::Approx(std::sqrt(2.0) * r));

  // Axis case: distance = sqrt(r^2 + axial^2) with the in-plane term r.
  CHECK(point_circle_distance(c, c.center + 0.02 * c.normal) ==
        doctest::Approx(std::hypot(r, 0.02)));

  // Zero iff on the curve, by sampling.
  CounterRng rng(5);
  Vec3 e1, e2;
  plane_basis(c.normal, e1, e2);
  for (int i = 0; i < 200; ++i) {
    double theta = rng.uniform(0, 2 * M_PI);
    Vec3 on = c.center + r * (std::cos(theta) * e1 + std::sin(theta) * e2);
    CHECK(point_circle_distance(c, on) < 1e-9);
    Vec3 off = on + 1e-6 * (std::cos(theta) * e1 + std::sin(theta) * e2);
    CHECK(point_circle_distance(c, off) > 1e-7);
  }
}

TEST_CASE("rectified rig construction") {
  StereoRig rig = test_rig();
  CHECK(is_rectified(rig));
  StereoRig broken = rig;
  broken.right.pose.translation += Vec3(0, 1e-6, 0);
  CHECK(!is_rectified(broken));
}
