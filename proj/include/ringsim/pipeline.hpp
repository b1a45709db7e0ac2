#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ringsim/analysis.hpp"
#include "ringsim/config.hpp"
#include "ringsim/integrators.hpp"
#include "ringsim/ring.hpp"

namespace ringsim {

enum class RunOutcome { success, collision, solver_failure };

const char* to_string(RunOutcome outcome);

struct RunResult {
  RunConfig config;
  RunOutcome outcome = RunOutcome::success;
  Trajectory trajectory;      // lap-continuous positions
  std::vector<Event> events;  // collisions and stop onsets at accepted steps
  UniformSeries series;       // resampled, positions wrapped to [0, L)
  std::vector<FdSample> fd;
  HeatmapGrid heatmap;
  std::vector<std::vector<PhasePoint>> phase;  // per vehicle
  FleetStats stats;
  std::optional<LyapunovResult> lyapunov;
  std::string analysis_note;  // why part of the analysis was skipped
};

/// Integrates the scenario (delay path iff tau > 0), resamples and runs every
/// analysis. Throws ConfigError / ParameterError on invalid input only.
RunResult execute_run(const RunConfig& config);

/// Writes trajectory.csv, fd.csv, heatmap.csv, phase.csv, events.csv,
/// stats.json and manifest.json into `dir` (created if missing).
void write_artifacts(const RunResult& result, const std::filesystem::path& dir);

struct CompareRow {
  std::string label;
  RunOutcome outcome = RunOutcome::success;
  double lambda_max = 0;
  bool lyapunov_degenerate = false;
  double max_density = 0;
  std::size_t stop_count = 0;
  double min_gap = 0;
  double final_v_std = 0;
  std::string error;  // non-empty when the run could not be performed
};

CompareRow summarize(const RunResult& result);

/// Max cross-fleet speed std over the last `window` seconds.
double final_v_std(const RunResult& result, double window = 100.0);

/// Runs each config (concurrently) into `out_dir`/<index>_<label>/ and
/// returns one row per config in input order.
std::vector<CompareRow> compare_runs(const std::vector<RunConfig>& configs,
                                     const std::filesystem::path& out_dir);

std::string format_compare_table(const std::vector<CompareRow>& rows);

/// Reads a trajectory.csv back into a uniform series.
UniformSeries read_trajectory_csv(const std::filesystem::path& path);

}  // namespace ringsim
