#include <benchmark/benchmark.h>

#include "regrasp/perception.hpp"
#include "regrasp/rng.hpp"
#include "regrasp/servo.hpp"
#include "regrasp/sim.hpp"

namespace {

using namespace regrasp;

SimWorld bench_world() {
  SystemConfig config;  // calibrated noise profile
  return make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 42, config);
}

RansacParams bench_ransac() {
  RansacParams params;
  params.seed = 7;
  return params;
}

void BM_RenderMasks(benchmark::State& state) {
  SimWorld world = bench_world();
  for (auto _ : state) {
    benchmark::DoNotOptimize(render_masks(world));
  }
}
BENCHMARK(BM_RenderMasks);

void BM_DistanceTransform(benchmark::State& state) {
  SimWorld world = bench_world();
  SegMask mask = render_masks(world).left_mask;
  for (auto _ : state) {
    benchmark::DoNotOptimize(distance_transform(mask));
  }
}
BENCHMARK(BM_DistanceTransform);

void BM_RansacCircle(benchmark::State& state) {
  SimWorld world = bench_world();
  ObservationBundle obs = render_masks(world);
  DistanceGrid dl = distance_transform(obs.left_mask);
  DistanceGrid dr = distance_transform(obs.right_mask);
  PointCloud cloud = build_cloud(world.rig, scanline_peaks(dl), scanline_peaks(dr));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ransac_circle(cloud, 0.0125, bench_ransac()));
  }
}
BENCHMARK(BM_RansacCircle);

void BM_EstimateState(benchmark::State& state) {
  SimWorld world = bench_world();
  ObservationBundle obs = render_masks(world);
  Vec3 gripper = world.left_gripper.commanded_pose.translation;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        estimate_state(obs.left_mask, obs.right_mask, world.rig, gripper, 0.0125,
                       bench_ransac()));
  }
}
BENCHMARK(BM_EstimateState);

void BM_IkSolve(benchmark::State& state) {
  SimWorld world = bench_world();
  Vec3 t(0.01, -0.01, 0.10);
  RigidTransform target = RigidTransform::from(
      reachable_rotation(world.left_arm, t, 0.4, 0.6) * axis_angle(Vec3::UnitZ(), 0.2), t);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ik_solve(world.left_arm, target, default_ik_tolerance()));
  }
}
BENCHMARK(BM_IkSolve);

}  // namespace

BENCHMARK_MAIN();
