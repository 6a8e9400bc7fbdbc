// Command line front end: experiment runner (single / multi), standalone
// circle fitting on mask pairs (fit), and mask dumps for a configuration
// (render).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regrasp/experiment.hpp"
#include "regrasp/grasp.hpp"
#include "regrasp/perception.hpp"
#include "regrasp/rng.hpp"
#include "regrasp/servo.hpp"

namespace {

using namespace regrasp;

std::vector<std::uint64_t> seed_list(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

int run_single(const ExperimentSpec& spec, const std::string& out_dir) {
  std::vector<TrialRecord> records = run_single_grid(spec);
  ResultTable table;
  std::string variant = std::string("needle") + std::to_string(spec.needle_id) + "-" +
                        to_string(spec.direction);
  table.rows.push_back(aggregate(records, variant));
  emit_results(records, table, spec, out_dir);

  const ResultRow& row = table.rows.front();
  std::printf("%s: %d/%d success (%.1f%%), 95%% CI [%.1f, %.1f], failures P=%d X=%d Y=%d T=%d\n",
              row.variant.c_str(), row.successes, row.total, row.percent, row.ci_low, row.ci_high,
              row.fail_p, row.fail_x, row.fail_y, row.timeouts);
  std::printf("wrote %s/trials.csv and %s/summary.json\n", out_dir.c_str(), out_dir.c_str());
  return 0;
}

int run_multi_mode(const ExperimentSpec& spec, const std::string& out_dir) {
  std::vector<MultiTrialRecord> records = run_multi(spec);
  emit_multi_results(records, spec, out_dir);
  double mean = 0.0;
  for (const MultiTrialRecord& r : records) mean += r.handovers;
  if (!records.empty()) mean /= static_cast<double>(records.size());
  std::printf("%s config: %zu trials, mean successful handovers %.2f\n",
              to_string(spec.multi_config), records.size(), mean);
  for (const MultiTrialRecord& r : records) {
    std::printf("  seed %llu: %d handovers, %.2f steps/handover, terminal %s\n",
                static_cast<unsigned long long>(r.seed), r.handovers, r.mean_steps_per_handover,
                r.terminal == Outcome::Success ? "-" : to_string(r.terminal));
  }
  std::printf("wrote %s/trials.csv and %s/summary.json\n", out_dir.c_str(), out_dir.c_str());
  return 0;
}

int run_fit(const std::string& left_path, const std::string& right_path, double radius,
            const std::vector<double>& gripper, const std::string& overlay_path,
            const SystemConfig& config, std::uint64_t seed) {
  SegMask left = read_pgm(left_path);
  SegMask right = read_pgm(right_path);
  const auto& st = config.stereo;
  StereoRig rig = make_stereo_rig(st.fx, st.fy, st.cx, st.cy, st.width, st.height, st.position,
                                  st.look_at, st.baseline);
  Vec3 gripper_pos(gripper[0], gripper[1], gripper[2]);

  RansacParams params;
  params.inlier_radius = config.ransac.inlier_radius;
  params.iterations = config.ransac.iterations;
  params.min_inliers = config.ransac.min_inliers;
  params.seed = seed;

  DistanceGrid dt_left = distance_transform(left);
  DistanceGrid dt_right = distance_transform(right);
  PointCloud cloud = build_cloud(rig, scanline_peaks(dt_left), scanline_peaks(dt_right));
  std::printf("cloud: %zu triangulated points\n", cloud.size());

  try {
    NeedleStateEstimate estimate =
        estimate_state(left, right, rig, gripper_pos, radius, params);
    std::printf("center: %.6f %.6f %.6f\n", estimate.circle.center.x(),
                estimate.circle.center.y(), estimate.circle.center.z());
    std::printf("normal: %.6f %.6f %.6f\n", estimate.circle.normal.x(),
                estimate.circle.normal.y(), estimate.circle.normal.z());
    std::printf("radius: %.6f\n", estimate.circle.radius);
    std::printf("tip:    %.6f %.6f %.6f\n", estimate.tip.x(), estimate.tip.y(),
                estimate.tip.z());
    std::printf("inliers: %d\n", estimate.inlier_count);
    if (!overlay_path.empty()) {
      CircleFit fit = ransac_circle(cloud, radius, params);
      write_debug_overlay(overlay_path, left, rig.left, cloud, fit);
      std::printf("wrote overlay %s\n", overlay_path.c_str());
    }
    return 0;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InsufficientObservation) {
      std::printf("insufficient observation: %s\n", e.what());
      return 0;  // a legitimate fit outcome, not a harness error
    }
    throw;
  }
}

int run_render(const StartConfig& config, int needle_id, std::uint64_t seed,
               const SystemConfig& system, const std::string& out_dir) {
  SimWorld world = make_world(config, needle_radius(needle_id), seed, system);
  ObservationBundle bundle = render_masks(world);
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  write_pgm(out_dir + "/left.pgm", bundle.left_mask);
  write_pgm(out_dir + "/right.pgm", bundle.right_mask);
  write_pgm(out_dir + "/overhead.pgm", bundle.overhead_mask);
  std::printf("wrote %s/{left,right,overhead}.pgm (config %d, needle %d, seed %llu)\n",
              out_dir.c_str(), config_index(config), needle_id,
              static_cast<unsigned long long>(seed));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bimanual needle handover simulator and evaluation harness"};
  app.require_subcommand(1);

  std::string noise_profile;
  app.add_option("--noise-profile", noise_profile, "sectioned key=value profile file")
      ->check(CLI::ExistingFile);

  int needle_id = 1;
  std::string direction = "l2r";
  int trials = 1;
  std::uint64_t seed = 1;
  std::string config_name = "towards";
  std::string out_dir = "out";
  int jobs = 1;

  CLI::App* single = app.add_subcommand("single", "single-handover grid over 28 start configs");
  single->add_option("--needle", needle_id, "needle id 1..4")->check(CLI::Range(1, 4));
  single->add_option("--direction", direction, "l2r or r2l")
      ->check(CLI::IsMember({"l2r", "r2l"}));
  single->add_option("--trials", trials, "seeds per configuration")->check(CLI::PositiveNumber);
  single->add_option("--seed", seed, "base seed");
  single->add_option("--out", out_dir, "output directory");
  single->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* multi = app.add_subcommand("multi", "sequential handovers until failure or N_max");
  int n_max = 50;
  multi->add_option("--needle", needle_id, "needle id 1..4")->check(CLI::Range(1, 4));
  multi->add_option("--config", config_name, "towards or away")
      ->check(CLI::IsMember({"towards", "away"}));
  multi->add_option("--trials", trials, "number of endurance trials")
      ->check(CLI::PositiveNumber);
  multi->add_option("--seed", seed, "base seed");
  multi->add_option("--max-handoffs", n_max, "N_max")->check(CLI::PositiveNumber);
  multi->add_option("--out", out_dir, "output directory");
  multi->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  CLI::App* fit = app.add_subcommand("fit", "fit a needle state to a stereo PGM mask pair");
  std::string left_path, right_path, overlay_path;
  double radius = 0.0125;
  std::vector<double> gripper{0.0, 0.0, 0.118};
  fit->add_option("--left", left_path, "left mask (binary PGM)")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--right", right_path, "right mask (binary PGM)")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--radius", radius, "needle radius in meters");
  fit->add_option("--gripper", gripper, "holding gripper position x y z")->expected(3);
  fit->add_option("--overlay", overlay_path, "write a PPM overlay of the fit");
  fit->add_option("--seed", seed, "RANSAC seed");

  CLI::App* render = app.add_subcommand("render", "dump the masks for a start configuration");
  std::string face = "towards";
  std::string grip = "tip";
  int bin = 0;
  render->add_option("--needle", needle_id, "needle id 1..4")->check(CLI::Range(1, 4));
  render->add_option("--face", face, "towards or away")
      ->check(CLI::IsMember({"towards", "away"}));
  render->add_option("--grip", grip, "tip or inward30")
      ->check(CLI::IsMember({"tip", "inward30"}));
  render->add_option("--bin", bin, "rotation bin 0..6")->check(CLI::Range(0, 6));
  render->add_option("--seed", seed, "world seed");
  render->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    SystemConfig system;
    if (!noise_profile.empty()) system = load_config(noise_profile);

    ExperimentSpec spec;
    spec.needle_id = needle_id;
    spec.direction = direction == "r2l" ? Direction::RightToLeft : Direction::LeftToRight;
    spec.trials_per_config = trials;
    spec.multi_config = config_name == "away" ? Face::Away : Face::Towards;
    spec.n_max_handoffs = n_max;
    spec.seeds = seed_list(seed, trials);
    spec.config = system;
    spec.jobs = jobs;

    if (single->parsed()) {
      spec.mode = Mode::Single;
      return run_single(spec, out_dir);
    }
    if (multi->parsed()) {
      spec.mode = Mode::Multi;
      return run_multi_mode(spec, out_dir);
    }
    if (fit->parsed()) {
      return run_fit(left_path, right_path, radius, gripper, overlay_path, system, seed);
    }
    if (render->parsed()) {
      StartConfig config{face == "away" ? Face::Away : Face::Towards,
                         grip == "inward30" ? Grip::Inward30 : Grip::Tip, bin};
      return run_render(config, needle_id, seed, system, out_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
