#include "regrasp/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "regrasp/grasp.hpp"
#include "regrasp/rng.hpp"
#include "regrasp/servo.hpp"

namespace regrasp {
namespace {

constexpr std::uint64_t kStreamRansac = 0x72616e73;
constexpr std::uint64_t kStreamPolicyX = 0x706f6c78;
constexpr std::uint64_t kStreamPolicyY = 0x706f6c79;

ServoParams servo_params(const SystemConfig& system) {
  return {system.servo.max_iterations, system.servo.tolerance, system.servo.step_cap,
          system.servo.translation_scale};
}

RansacParams ransac_params(const SystemConfig& system, std::uint64_t trial_seed) {
  RansacParams params;
  params.inlier_radius = system.ransac.inlier_radius;
  params.iterations = system.ransac.iterations;
  params.min_inliers = system.ransac.min_inliers;
  params.seed = CounterRng::combine(trial_seed, kStreamRansac);
  return params;
}

GraspParams grasp_params(const SystemConfig& system) {
  return {system.grasp.beta_decay, system.grasp.stop_threshold, system.grasp.initial_step,
          system.grasp.descent, system.grasp.max_steps};
}

AxisPolicy constant_policy(GraspAxis axis) {
  return {axis, [](SimWorld&) { return 1; }};
}

AxisPolicy make_policy(GraspAxis axis, const SimWorld& world, std::uint64_t seed,
                       const PolicyOverrides& overrides) {
  if (axis == GraspAxis::X && overrides.force_constant_x) return constant_policy(axis);
  if (axis == GraspAxis::Y && overrides.force_constant_y) return constant_policy(axis);
  return oracle_policy(axis, world, world.config.noise.label_flip_rate, seed);
}

bool timed_out(const SimWorld& world) {
  return world.clock - world.last_handoff_clock >= world.config.sim.tau_max;
}

/// One acquisition + positioning + grasp sequence on an existing world.
/// Returns the outcome; `handover_index` salts the policy seeds.
Outcome attempt_handover(SimWorld& world, ArmId holder, std::uint64_t trial_seed,
                         int handover_index, const PolicyOverrides& overrides) {
  ServoParams sp = servo_params(world.config);
  RansacParams rp = ransac_params(world.config, trial_seed);
  try {
    acquire_needle(world, holder, sp, rp);
    if (timed_out(world)) return Outcome::Timeout;
    ServoResult presented = handover_position(world, holder, sp, rp);
    if (timed_out(world)) return Outcome::Timeout;

    std::uint64_t salt = static_cast<std::uint64_t>(handover_index);
    AxisPolicy x_policy = make_policy(
        GraspAxis::X, world, CounterRng::combine(trial_seed, kStreamPolicyX + salt), overrides);
    AxisPolicy y_policy = make_policy(
        GraspAxis::Y, world, CounterRng::combine(trial_seed, kStreamPolicyY + salt), overrides);
    GraspOutcome grasp = execute_grasp(world, other_arm(holder), x_policy, y_policy,
                                       grasp_params(world.config), presented.estimate);
    if (timed_out(world)) return Outcome::Timeout;
    if (grasp.success) return Outcome::Success;
    return grasp.failure_axis == 'X' ? Outcome::FailX : Outcome::FailY;
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::AcquisitionFailed:
      case ErrorCode::PositioningFailed:
      case ErrorCode::EstimationFailed:
      case ErrorCode::NotConverged:
      case ErrorCode::InsufficientObservation:
      case ErrorCode::Unreachable:
      case ErrorCode::BothUnreachable:
        return timed_out(world) ? Outcome::Timeout : Outcome::FailP;
      default:
        throw;
    }
  }
}

}  // namespace

double needle_radius(int needle_id) {
  switch (needle_id) {
    case 1: return 0.0125;
    case 2: return 0.0175;
    case 3: return 0.0125;
    case 4: return 0.0075;
    default: raise(ErrorCode::InvalidConfig, "needle id must be 1..4");
  }
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "success";
    case Outcome::FailP: return "P";
    case Outcome::FailX: return "X";
    case Outcome::FailY: return "Y";
    case Outcome::Timeout: return "timeout";
  }
  return "?";
}

TrialRecord run_single_trial(const StartConfig& config, Direction direction, std::uint64_t seed,
                             int needle_id, const SystemConfig& system,
                             const PolicyOverrides& overrides) {
  ArmId holder = direction == Direction::LeftToRight ? ArmId::Left : ArmId::Right;
  SimWorld world = make_world(config, needle_radius(needle_id), seed, system, holder);

  TrialRecord record;
  record.config = config;
  record.direction = direction;
  record.seed = seed;
  record.outcome = attempt_handover(world, holder, seed, 0, overrides);
  record.handovers_completed = record.outcome == Outcome::Success ? 1 : 0;
  record.steps = world.clock;
  record.elapsed_seconds = world.clock * system.sim.step_latency;
  return record;
}

std::vector<TrialRecord> run_single_grid(const ExperimentSpec& spec,
                                         const PolicyOverrides& overrides) {
  const std::vector<StartConfig> configs = all_start_configs();
  struct Task {
    StartConfig config;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const StartConfig& config : configs) {
    for (std::uint64_t seed : spec.seeds) {
      tasks.push_back({config, CounterRng::combine(seed, static_cast<std::uint64_t>(
                                                             config_index(config)))});
    }
  }

  std::vector<TrialRecord> records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
      records[i] = run_single_trial(tasks[i].config, spec.direction, tasks[i].seed,
                                    spec.needle_id, spec.config, overrides);
    }
  };
  int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return records;
}

ResultRow aggregate(const std::vector<TrialRecord>& records, const std::string& variant) {
  ResultRow row;
  row.variant = variant;
  row.total = static_cast<int>(records.size());
  double time_sum = 0.0;
  for (const TrialRecord& r : records) {
    switch (r.outcome) {
      case Outcome::Success:
        ++row.successes;
        time_sum += r.elapsed_seconds;
        break;
      case Outcome::FailP: ++row.fail_p; break;
      case Outcome::FailX: ++row.fail_x; break;
      case Outcome::FailY: ++row.fail_y; break;
      case Outcome::Timeout: ++row.timeouts; break;
    }
  }
  if (row.total > 0) {
    row.percent = 100.0 * row.successes / row.total;
    Ci95 ci = binomial_ci95(row.successes, row.total);
    row.ci_low = ci.low;
    row.ci_high = ci.high;
  }
  if (row.successes > 0) row.mean_time_seconds = time_sum / row.successes;
  return row;
}

MultiTrialRecord run_multi_trial(Face config, std::uint64_t seed, int needle_id,
                                 const SystemConfig& system, int n_max_handoffs) {
  StartConfig start{config, Grip::Tip, 0};
  SimWorld world = make_world(start, needle_radius(needle_id), seed, system, ArmId::Left);

  MultiTrialRecord record;
  record.config = config;
  record.seed = seed;

  ArmId holder = ArmId::Left;
  Outcome last = Outcome::Success;
  for (int h = 0; h < n_max_handoffs; ++h) {
    last = attempt_handover(world, holder, seed, h, {});
    if (last != Outcome::Success) break;
    ++record.handovers;
    holder = other_arm(holder);
  }
  record.terminal = last;  // Success here means the trial ran out its N_max budget
  record.elapsed_seconds = world.clock * system.sim.step_latency;
  record.mean_steps_per_handover =
      record.handovers > 0 ? static_cast<double>(world.clock) / record.handovers : 0.0;
  return record;
}

std::vector<MultiTrialRecord> run_multi(const ExperimentSpec& spec) {
  std::vector<MultiTrialRecord> records(spec.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < spec.seeds.size(); i = next.fetch_add(1)) {
      records[i] = run_multi_trial(spec.multi_config, spec.seeds[i], spec.needle_id, spec.config,
                                   spec.n_max_handoffs);
    }
  };
  int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return records;
}

std::string single_records_csv(const std::vector<TrialRecord>& records) {
  std::string csv = "config_index,face,grip,bin,direction,seed,outcome,handovers,steps,time_s\n";
  char line[256];
  for (const TrialRecord& r : records) {
    std::snprintf(line, sizeof(line), "%d,%s,%s,%d,%s,%llu,%s,%d,%ld,%.2f\n",
                  config_index(r.config), to_string(r.config.face), to_string(r.config.grip),
                  r.config.rotation_bin, to_string(r.direction),
                  static_cast<unsigned long long>(r.seed), to_string(r.outcome),
                  r.handovers_completed, r.steps, r.elapsed_seconds);
    csv += line;
  }
  return csv;
}

std::string multi_records_csv(const std::vector<MultiTrialRecord>& records) {
  std::string csv = "config,seed,handovers,mean_steps_per_handover,time_s,terminal\n";
  char line[256];
  for (const MultiTrialRecord& r : records) {
    std::snprintf(line, sizeof(line), "%s,%llu,%d,%.2f,%.2f,%s\n", to_string(r.config),
                  static_cast<unsigned long long>(r.seed), r.handovers,
                  r.mean_steps_per_handover, r.elapsed_seconds,
                  r.terminal == Outcome::Success ? "-" : to_string(r.terminal));
    csv += line;
  }
  return csv;
}

namespace {

void write_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot open " + tmp + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) raise(ErrorCode::IoFailure, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) raise(ErrorCode::IoFailure, "cannot move " + tmp + " into place: " + ec.message());
}

void ensure_directory(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    raise(ErrorCode::IoFailure, "cannot create output directory " + out_dir);
  }
}

nlohmann::ordered_json spec_json(const ExperimentSpec& spec) {
  nlohmann::ordered_json j;
  j["needle"] = spec.needle_id;
  j["direction"] = to_string(spec.direction);
  j["trials_per_config"] = spec.trials_per_config;
  j["n_max_handoffs"] = spec.n_max_handoffs;
  j["multi_config"] = to_string(spec.multi_config);
  j["seeds"] = spec.seeds;
  return j;
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace

void emit_results(const std::vector<TrialRecord>& records, const ResultTable& table,
                  const ExperimentSpec& spec, const std::string& out_dir) {
  ensure_directory(out_dir);
  write_atomic(out_dir + "/trials.csv", single_records_csv(records));

  nlohmann::ordered_json j;
  j["mode"] = "single";
  j["spec"] = spec_json(spec);
  j["rows"] = nlohmann::ordered_json::array();
  for (const ResultRow& row : table.rows) {
    nlohmann::ordered_json r;
    r["variant"] = row.variant;
    r["successes"] = row.successes;
    r["total"] = row.total;
    r["percent"] = round1(row.percent);
    r["ci_low"] = round1(row.ci_low);
    r["ci_high"] = round1(row.ci_high);
    r["mean_time_s"] = std::round(row.mean_time_seconds * 100.0) / 100.0;
    r["failures"] = {{"P", row.fail_p}, {"X", row.fail_x}, {"Y", row.fail_y},
                     {"timeout", row.timeouts}};
    j["rows"].push_back(r);
  }
  write_atomic(out_dir + "/summary.json", j.dump(2) + "\n");
}

void emit_multi_results(const std::vector<MultiTrialRecord>& records, const ExperimentSpec& spec,
                        const std::string& out_dir) {
  ensure_directory(out_dir);
  write_atomic(out_dir + "/trials.csv", multi_records_csv(records));

  double handover_sum = 0.0;
  double time_per_handover_sum = 0.0;
  int counted = 0;
  for (const MultiTrialRecord& r : records) {
    handover_sum += r.handovers;
    if (r.handovers > 0) {
      time_per_handover_sum += r.elapsed_seconds / r.handovers;
      ++counted;
    }
  }
  nlohmann::ordered_json j;
  j["mode"] = "multi";
  j["spec"] = spec_json(spec);
  j["trials"] = records.size();
  j["mean_handovers"] =
      records.empty() ? 0.0 : std::round(handover_sum / records.size() * 100.0) / 100.0;
  j["mean_time_per_handover_s"] =
      counted == 0 ? 0.0 : std::round(time_per_handover_sum / counted * 100.0) / 100.0;
  write_atomic(out_dir + "/summary.json", j.dump(2) + "\n");
}

}  // namespace regrasp
