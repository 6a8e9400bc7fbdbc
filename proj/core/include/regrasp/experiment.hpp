#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regrasp/config.hpp"
#include "regrasp/sim.hpp"
#include "regrasp/stats.hpp"

namespace regrasp {

enum class Mode { Single, Multi, Fit, Render };
enum class Direction { LeftToRight, RightToLeft };

inline const char* to_string(Direction d) {
  return d == Direction::LeftToRight ? "l2r" : "r2l";
}

/// Needle radii by id: 1 and 3 are 1.25 cm, 2 is 1.75 cm, 4 is 0.75 cm.
double needle_radius(int needle_id);

struct ExperimentSpec {
  Mode mode = Mode::Single;
  int needle_id = 1;
  Direction direction = Direction::LeftToRight;
  int trials_per_config = 1;  // seeds per start configuration (single mode)
  int n_max_handoffs = 50;    // multi mode
  Face multi_config = Face::Towards;
  std::vector<std::uint64_t> seeds;
  SystemConfig config;
  int jobs = 1;
};

enum class Outcome { Success, FailP, FailX, FailY, Timeout };
const char* to_string(Outcome o);

struct TrialRecord {
  StartConfig config;
  Direction direction = Direction::LeftToRight;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Success;
  int handovers_completed = 0;
  long steps = 0;
  double elapsed_seconds = 0.0;
};

struct ResultRow {
  std::string variant;
  int successes = 0;
  int total = 0;
  double percent = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean_time_seconds = 0.0;
  int fail_p = 0;
  int fail_x = 0;
  int fail_y = 0;
  int timeouts = 0;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

/// Optional fault injections, used by tests and ablation runs.
struct PolicyOverrides {
  bool force_constant_y = false;  // y policy always outputs +1
  bool force_constant_x = false;
};

/// One full handover attempt: acquisition, handover positioning, fine grasp.
TrialRecord run_single_trial(const StartConfig& config, Direction direction, std::uint64_t seed,
                             int needle_id, const SystemConfig& system,
                             const PolicyOverrides& overrides = {});

/// Systematic pass over the 28 start configurations x seeds. Failures are
/// data, not errors. Deterministic and independent of `jobs`.
std::vector<TrialRecord> run_single_grid(const ExperimentSpec& spec,
                                         const PolicyOverrides& overrides = {});

ResultRow aggregate(const std::vector<TrialRecord>& records, const std::string& variant);

struct MultiTrialRecord {
  Face config = Face::Towards;
  std::uint64_t seed = 0;
  int handovers = 0;
  double mean_steps_per_handover = 0.0;
  double elapsed_seconds = 0.0;
  Outcome terminal = Outcome::Success;  // Success means N_max was reached ("-")
};

MultiTrialRecord run_multi_trial(Face config, std::uint64_t seed, int needle_id,
                                 const SystemConfig& system, int n_max_handoffs);

std::vector<MultiTrialRecord> run_multi(const ExperimentSpec& spec);

/// Deterministic CSV serializations (byte-identical for identical inputs).
std::string single_records_csv(const std::vector<TrialRecord>& records);
std::string multi_records_csv(const std::vector<MultiTrialRecord>& records);

/// Writes trials.csv and summary.json atomically under out_dir. Raises
/// IoFailure when the directory is not writable.
void emit_results(const std::vector<TrialRecord>& records, const ResultTable& table,
                  const ExperimentSpec& spec, const std::string& out_dir);
void emit_multi_results(const std::vector<MultiTrialRecord>& records, const ExperimentSpec& spec,
                        const std::string& out_dir);

}  // namespace regrasp
