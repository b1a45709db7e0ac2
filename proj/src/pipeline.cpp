#include "ringsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "json.hpp"

namespace ringsim {

const char* to_string(RunOutcome outcome) {
  switch (outcome) {
    case RunOutcome::success:
      return "success";
    case RunOutcome::collision:
      return "collision";
    case RunOutcome::solver_failure:
      return "solver_failure";
  }
  return "unknown";
}

RunResult execute_run(const RunConfig& config) {
  RunResult res;
  res.config = config;
  const RingScenario& scenario = config.scenario;
  const RingSystem system(scenario);
  const double length = scenario.length;
  const std::size_t n = scenario.size();

  const StateVector z0 = apply_perturbation(uniform_initial_state(scenario),
                                            scenario.perturb_amp, scenario.seed);

  std::vector<bool> stopped(n, false);
  bool collided = false;
  StepHooks hooks;
  hooks.project = [](std::span<double> z) { clamp_velocities(z); };
  hooks.observe = [&](double t, std::span<const double> z) {
    const auto gaps = ordered_gaps(z, length);
    for (std::size_t i = 0; i < n; ++i) {
      if (gaps[i] <= config.analysis.events.gap_min) {
        res.events.push_back({EventKind::collision, i, t});
        collided = true;
      }
      const bool now = z[2 * i + 1] < config.analysis.events.v_stop;
      if (now && !stopped[i]) res.events.push_back({EventKind::stop, i, t});
      stopped[i] = now;
    }
    return collided;
  };

  if (scenario.tau > 0) {
    const auto history = [z0](double) { return z0; };
    res.trajectory = integrate_dde(system.dde_rhs(), history, scenario.tau, 0.0,
                                   scenario.t_end, config.integrator, hooks);
  } else {
    res.trajectory = integrate_ode(system.ode_rhs(), z0, 0.0, scenario.t_end,
                                   config.integrator, hooks);
  }

  switch (res.trajectory.status) {
    case IntegrationStatus::completed:
      res.outcome = RunOutcome::success;
      break;
    case IntegrationStatus::terminated:
      res.outcome = collided ? RunOutcome::collision : RunOutcome::success;
      break;
    case IntegrationStatus::budget_exhausted:
    case IntegrationStatus::step_underflow:
      res.outcome = RunOutcome::solver_failure;
      break;
  }

  res.series = resample(res.trajectory, scenario.sample_hz);
  for (auto& z : res.series.states) wrap_positions(z, length);

  res.stats = fleet_stats(res.series, length, config.analysis.events.v_stop);
  if (res.outcome == RunOutcome::collision) {
    res.analysis_note = "collision: density analyses skipped";
    return res;
  }
  res.fd = fundamental_diagram(res.series, length);
  res.heatmap = heatmap_grid(res.series, length, config.analysis.heatmap_bins);
  res.phase.reserve(n);
  for (std::size_t i = 0; i < n; ++i) res.phase.push_back(phase_projection(res.series, i, length));

  const std::size_t vehicle = config.analysis.lyapunov_vehicle;
  const auto skip = static_cast<std::size_t>(
      std::llround(config.analysis.lyapunov_trim_s * scenario.sample_hz));
  std::vector<double> signal;
  for (std::size_t j = skip; j < res.series.size(); ++j) {
    signal.push_back(res.series.states[j][2 * vehicle + 1]);
  }
  if (signal.size() < kMinLyapunovSamples) {
    res.analysis_note = "series shorter than " + std::to_string(kMinLyapunovSamples) +
                        " samples: exponent not estimated";
  } else {
    try {
      res.lyapunov = max_lyapunov(signal, scenario.sample_hz, config.analysis.lyapunov);
    } catch (const std::invalid_argument& e) {
      res.analysis_note = e.what();
    }
  }
  return res;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace

double final_v_std(const RunResult& result, double window) {
  const auto& times = result.series.times;
  if (times.empty()) return 0.0;
  return result.stats.max_v_std_after(times.back() - window, times);
}

void write_artifacts(const RunResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& series = result.series;
  const auto& outputs = result.config.outputs;

  if (outputs.trajectory) {
    auto out = open_output(dir / "trajectory.csv");
    out << "t_s,vehicle,x_m,v_m_per_s\n";
    for (std::size_t j = 0; j < series.size(); ++j) {
      const auto& z = series.states[j];
      for (std::size_t i = 0; i < z.size() / 2; ++i) {
        out << series.times[j] << ',' << i << ',' << z[2 * i] << ',' << z[2 * i + 1] << '\n';
      }
    }
  }
  if (outputs.fd) {
    auto out = open_output(dir / "fd.csv");
    out << "t_s,vehicle,k_cars_per_m,q_cars_per_s,v_m_per_s\n";
    for (const auto& s : result.fd) {
      out << s.t << ',' << s.vehicle << ',' << s.k << ',' << s.q << ',' << s.v << '\n';
    }
  }
  if (outputs.heatmap) {
    // Only occupied cells are listed.
    auto out = open_output(dir / "heatmap.csv");
    out << "t_s,bin,mean_v_m_per_s\n";
    const auto& h = result.heatmap;
    for (std::size_t j = 0; j < h.times.size(); ++j) {
      for (std::size_t b = 0; b < h.n_bins; ++b) {
        if (const auto& cell = h.at(j, b)) out << h.times[j] << ',' << b << ',' << *cell << '\n';
      }
    }
  }
  if (outputs.phase) {
    auto out = open_output(dir / "phase.csv");
    out << "t_s,vehicle,gap_m,dv_m_per_s\n";
    if (!result.phase.empty()) {
      for (std::size_t j = 0; j < result.phase.front().size(); ++j) {
        for (std::size_t i = 0; i < result.phase.size(); ++i) {
          const auto& p = result.phase[i][j];
          out << p.t << ',' << i << ',' << p.gap << ',' << p.dv << '\n';
        }
      }
    }
  }
  {
    auto out = open_output(dir / "events.csv");
    out << "t_s,kind,vehicle\n";
    for (const auto& e : result.events) {
      out << e.t << ',' << to_string(e.kind) << ',' << e.vehicle << '\n';
    }
  }
  {
    using nlohmann::json;
    const auto& st = result.stats;
    auto finite_or_null = [](double v) -> json {
      return std::isfinite(v) ? json(v) : json(nullptr);
    };
    json stats = {
        {"label", result.config.label()},
        {"outcome", to_string(result.outcome)},
        {"integration",
         {{"status", to_string(result.trajectory.status)},
          {"diagnostic", result.trajectory.diagnostic},
          {"accepted_steps", result.trajectory.segments().size()},
          {"rejected_steps", result.trajectory.rejected_steps},
          {"rhs_evals", result.trajectory.rhs_evals},
          {"t_final_s", result.trajectory.empty() ? 0.0 : result.trajectory.t_end()}}},
        {"samples", series.size()},
        {"max_density_cars_per_m", finite_or_null(st.max_density)},
        {"median_density_cars_per_m", st.median_density},
        {"stop_event_count", st.stop_event_count},
        {"first_stop_t_s", st.first_stop() ? json(*st.first_stop()) : json(nullptr)},
        {"min_gap_m", finite_or_null(st.min_gap)},
        {"final_v_std_m_per_s", final_v_std(result)},
        {"analysis_note", result.analysis_note},
    };
    if (result.lyapunov) {
      const auto& ly = *result.lyapunov;
      stats["lyapunov"] = {
          {"lambda_max_per_s", ly.lambda_max},
          {"degenerate", ly.degenerate},
          {"diagnostic", ly.diagnostic},
          {"embed_dim", ly.embed_dim},
          {"lag_samples", ly.lag},
          {"min_separation_samples", ly.min_separation},
          {"fit_range_samples", {ly.fit_range.first, ly.fit_range.second}},
          {"pairs", ly.pairs},
          {"divergence_curve", ly.divergence_curve},
      };
    } else {
      stats["lyapunov"] = nullptr;
    }
    auto out = open_output(dir / "stats.json");
    out << stats.dump(2) << '\n';
  }
  {
    auto out = open_output(dir / "manifest.json");
    out << dump_manifest(result.config) << '\n';
  }
}

CompareRow summarize(const RunResult& result) {
  CompareRow row;
  row.label = result.config.label();
  row.outcome = result.outcome;
  if (result.lyapunov) {
    row.lambda_max = result.lyapunov->lambda_max;
    row.lyapunov_degenerate = result.lyapunov->degenerate;
  } else {
    row.lambda_max = std::numeric_limits<double>::quiet_NaN();
  }
  row.max_density = result.stats.max_density;
  row.stop_count = result.stats.stop_event_count;
  row.min_gap = result.stats.min_gap;
  row.final_v_std = final_v_std(result);
  return row;
}

std::vector<CompareRow> compare_runs(const std::vector<RunConfig>& configs,
                                     const std::filesystem::path& out_dir) {
  std::vector<std::future<CompareRow>> jobs;
  jobs.reserve(configs.size());
  for (std::size_t idx = 0; idx < configs.size(); ++idx) {
    jobs.push_back(std::async(std::launch::async, [&configs, idx, &out_dir] {
      const RunConfig& cfg = configs[idx];
      std::ostringstream sub;
      sub << std::setw(2) << std::setfill('0') << idx << '_' << cfg.label();
      try {
        RunResult res = execute_run(cfg);
        if (!out_dir.empty()) write_artifacts(res, out_dir / sub.str());
        return summarize(res);
      } catch (const std::exception& e) {
        CompareRow row;
        row.label = cfg.label();
        row.outcome = RunOutcome::solver_failure;
        row.lambda_max = std::numeric_limits<double>::quiet_NaN();
        row.error = e.what();
        return row;
      }
    }));
  }
  std::vector<CompareRow> rows;
  rows.reserve(jobs.size());
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

std::string format_compare_table(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "preset,lambda_max_per_s,max_density_cars_per_m,stop_count,min_gap_m,"
         "final_v_std_m_per_s,status\n";
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      out << r.label << ",,,,,,FAILED: " << r.error << '\n';
      continue;
    }
    out << r.label << ',' << r.lambda_max << ',' << r.max_density << ','
        << r.stop_count << ',' << r.min_gap << ',' << r.final_v_std << ','
        << to_string(r.outcome) << (r.lyapunov_degenerate ? " (degenerate exponent)" : "")
        << '\n';
  }
  return out.str();
}

UniformSeries read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "t_s,vehicle,x_m,v_m_per_s")
    throw std::runtime_error("unexpected trajectory header: " + line);
  UniformSeries series;
  std::map<std::size_t, std::pair<double, double>> row;
  double current_t = std::numeric_limits<double>::quiet_NaN();
  auto flush = [&] {
    if (row.empty()) return;
    StateVector z(2 * row.size());
    for (const auto& [i, xv] : row) {
      if (i >= row.size()) throw std::runtime_error("non-contiguous vehicle ids");
      z[2 * i] = xv.first;
      z[2 * i + 1] = xv.second;
    }
    series.times.push_back(current_t);
    series.states.push_back(std::move(z));
    row.clear();
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string ft, fi, fx, fv;
    std::getline(ls, ft, ',');
    std::getline(ls, fi, ',');
    std::getline(ls, fx, ',');
    std::getline(ls, fv, ',');
    const double t = std::stod(ft);
    if (t != current_t) {
      flush();
      current_t = t;
    }
    row[std::stoul(fi)] = {std::stod(fx), std::stod(fv)};
  }
  flush();
  if (!series.times.empty()) {
    series.t0 = series.times.front();
    if (series.times.size() > 1) {
      series.hz = static_cast<double>(series.times.size() - 1) /
                  (series.times.back() - series.times.front());
    }
  }
  return series;
}

}  // namespace ringsim
