#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "regrasp/experiment.hpp"
#include "regrasp/rng.hpp"
#include "regrasp/stats.hpp"

using namespace regrasp;
using test_helpers::error_code_of;

namespace {

ExperimentSpec small_spec(const SystemConfig& config) {
  ExperimentSpec spec;
  spec.mode = Mode::Single;
  spec.needle_id = 1;
  spec.direction = Direction::LeftToRight;
  spec.seeds = {5};
  spec.trials_per_config = 1;
  spec.config = config;
  spec.jobs = 1;
  return spec;
}

}  // namespace

TEST_CASE("exact binomial confidence intervals reproduce the reference table") {
  struct Row {
    int s, n;
    double low, high;
  };
  const Row rows[] = {
      {28, 56, 36.3, 63.7}, {2, 28, 0.9, 23.5},    {53, 56, 85.1, 98.9},
      {6, 28, 8.3, 41.0},   {108, 112, 91.1, 99.0}, {26, 28, 76.5, 99.1},
      {25, 28, 71.8, 97.7}, {21, 28, 55.1, 89.3},
  };
  for (const Row& row : rows) {
    Ci95 ci = binomial_ci95(row.s, row.n);
    CHECK(std::abs(ci.low - row.low) <= 0.1);
    CHECK(std::abs(ci.high - row.high) <= 0.1);
  }

  // Closed-form edge: zero successes out of one trial.
  Ci95 edge = binomial_ci95(0, 1);
  CHECK(edge.low == doctest::Approx(0.0));
  CHECK(edge.high == doctest::Approx(97.5).epsilon(0.001));
}

TEST_CASE("confidence interval bounds bracket the point estimate") {
  CounterRng rng(12);
  for (int i = 0; i < 200; ++i) {
    int n = 1 + int(rng.uniform_index(200));
    int s = int(rng.uniform_index(std::size_t(n) + 1));
    Ci95 ci = binomial_ci95(s, n);
    double pct = 100.0 * s / n;
    CHECK(ci.low >= 0.0);
    CHECK(ci.high <= 100.0);
    CHECK(ci.low <= pct + 1e-9);
    CHECK(ci.high >= pct - 1e-9);
  }
}

TEST_CASE("aggregation partitions failures") {
  std::vector<TrialRecord> records;
  auto add = [&](Outcome o) {
    TrialRecord r;
    r.outcome = o;
    r.elapsed_seconds = 10.0;
    records.push_back(r);
  };
  for (int i = 0; i < 9; ++i) add(Outcome::Success);
  add(Outcome::FailP);
  add(Outcome::FailP);
  add(Outcome::FailX);
  add(Outcome::FailY);
  add(Outcome::Timeout);

  ResultRow row = aggregate(records, "synthetic");
  CHECK(row.total == 14);
  CHECK(row.successes == 9);
  CHECK(row.fail_p + row.fail_x + row.fail_y + row.timeouts == row.total - row.successes);
  CHECK(row.fail_p == 2);
  CHECK(row.mean_time_seconds == doctest::Approx(10.0));
}

TEST_CASE("zero-noise single grid sweeps clean") {
  ExperimentSpec spec = small_spec(zero_noise(SystemConfig{}));
  std::vector<TrialRecord> records = run_single_grid(spec);
  REQUIRE(records.size() == 28);
  ResultRow row = aggregate(records, "zero-noise");
  CHECK(row.successes == 28);
  for (const TrialRecord& r : records) CHECK(r.handovers_completed == 1);
}

TEST_CASE("forced constant y policy reproduces the all-Y failure signature") {
  ExperimentSpec spec = small_spec(zero_noise(SystemConfig{}));
  PolicyOverrides overrides;
  overrides.force_constant_y = true;
  std::vector<TrialRecord> records = run_single_grid(spec, overrides);
  ResultRow row = aggregate(records, "open-loop-y");
  CHECK(row.successes == 0);
  CHECK(row.fail_y == row.total);
  CHECK(row.fail_p == 0);
  CHECK(row.fail_x == 0);
}

TEST_CASE("single grid output is deterministic and order independent") {
  ExperimentSpec spec = small_spec(SystemConfig{});  // calibrated noise on
  std::vector<TrialRecord> serial = run_single_grid(spec);
  spec.jobs = 2;
  std::vector<TrialRecord> parallel = run_single_grid(spec);
  CHECK(single_records_csv(serial) == single_records_csv(parallel));

  std::vector<TrialRecord> replay = run_single_grid(spec);
  CHECK(single_records_csv(parallel) == single_records_csv(replay));
}

TEST_CASE("empty seed lists produce empty result sets") {
  ExperimentSpec spec = small_spec(zero_noise(SystemConfig{}));
  spec.seeds.clear();
  CHECK(run_single_grid(spec).empty());
}

TEST_CASE("multi-handover endurance") {
  SUBCASE("zero noise runs out the handoff budget with terminal '-'") {
    MultiTrialRecord record =
        run_multi_trial(Face::Towards, 3, 1, zero_noise(SystemConfig{}), 5);
    CHECK(record.handovers == 5);
    CHECK(record.terminal == Outcome::Success);
    std::string csv = multi_records_csv({record});
    CHECK(csv.find(",-\n") != std::string::npos);
  }

  SUBCASE("an invisible needle fails the first handover as P") {
    SystemConfig dark = zero_noise(SystemConfig{});
    dark.noise.dropout_rate = 1.0;
    MultiTrialRecord record = run_multi_trial(Face::Towards, 3, 1, dark, 5);
    CHECK(record.handovers == 0);
    CHECK(record.terminal == Outcome::FailP);
  }

  SUBCASE("direction alternates: both grippers hold the needle across a trial") {
    SimWorld probe = make_world({Face::Towards, Grip::Tip, 0}, 0.0125, 3,
                                zero_noise(SystemConfig{}));
    CHECK(probe.needle.attached_arm == ArcNeedle::Attachment::Left);
    MultiTrialRecord record =
        run_multi_trial(Face::Towards, 3, 1, zero_noise(SystemConfig{}), 2);
    CHECK(record.handovers == 2);  // left -> right -> left
  }
}

TEST_CASE("results are emitted atomically and deterministically") {
  ExperimentSpec spec = small_spec(zero_noise(SystemConfig{}));
  std::vector<TrialRecord> records = run_single_grid(spec);
  ResultTable table;
  table.rows.push_back(aggregate(records, "unit"));

  auto dir = std::filesystem::temp_directory_path() / "regrasp_emit_test";
  std::filesystem::remove_all(dir);
  emit_results(records, table, spec, dir.string());
  auto read = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  };
  std::string csv_a = read(dir / "trials.csv");
  std::string json_a = read(dir / "summary.json");
  CHECK(!csv_a.empty());
  CHECK(!json_a.empty());

  emit_results(records, table, spec, dir.string());
  CHECK(read(dir / "trials.csv") == csv_a);
  CHECK(read(dir / "summary.json") == json_a);
  std::filesystem::remove_all(dir);
}

TEST_CASE("unwritable output paths raise IoFailure") {
  ExperimentSpec spec = small_spec(zero_noise(SystemConfig{}));
  std::vector<TrialRecord> records;
  ResultTable table;
  auto file_path = std::filesystem::temp_directory_path() / "regrasp_not_a_dir";
  std::ofstream(file_path) << "occupied";
  CHECK(error_code_of([&] {
          emit_results(records, table, spec, (file_path / "sub").string());
        }) == ErrorCode::IoFailure);
  std::filesystem::remove(file_path);
}

TEST_CASE("mirrored directions succeed symmetrically at zero noise") {
  SystemConfig config = zero_noise(SystemConfig{});
  for (int bin : {0, 2}) {
    StartConfig start{Face::Towards, Grip::Tip, bin};
    TrialRecord l2r = run_single_trial(start, Direction::LeftToRight, 9, 1, config);
    TrialRecord r2l = run_single_trial(start, Direction::RightToLeft, 9, 1, config);
    CHECK(l2r.outcome == Outcome::Success);
    CHECK(r2l.outcome == Outcome::Success);
  }
}
