#include "ringsim/ringsim.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>

#include "ringsim/pipeline.hpp"

struct ringsim_run {
  ringsim::RunConfig config;
  std::optional<ringsim::RunResult> result;
};

namespace {

thread_local std::string g_last_error;

ringsim_status fail(ringsim_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Maps exceptions escaping the C++ core onto status codes.
template <typename F>
ringsim_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const ringsim::ConfigError& e) {
    return fail(RINGSIM_ERR_CONFIG, e.what());
  } catch (const ringsim::ParameterError& e) {
    return fail(RINGSIM_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(RINGSIM_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RINGSIM_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(RINGSIM_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(RINGSIM_ERR_INTERNAL, "unknown error");
  }
}

ringsim_status copy_out(const std::string& text, char* buf, std::size_t capacity,
                        std::size_t* needed) {
  if (needed) *needed = text.size() + 1;
  if (buf == nullptr || capacity == 0) return RINGSIM_OK;
  if (capacity < text.size() + 1)
    return fail(RINGSIM_ERR_INVALID_ARGUMENT, "buffer too small");
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return RINGSIM_OK;
}

ringsim_status outcome_status(ringsim::RunOutcome o) {
  switch (o) {
    case ringsim::RunOutcome::success:
      return RINGSIM_OK;
    case ringsim::RunOutcome::collision:
      return RINGSIM_ERR_COLLISION;
    case ringsim::RunOutcome::solver_failure:
      return RINGSIM_ERR_SOLVER;
  }
  return RINGSIM_ERR_INTERNAL;
}

ringsim_status create(ringsim::RunConfig config, ringsim_run** out) {
  if (out == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null output handle");
  auto run = std::make_unique<ringsim_run>();
  run->config = std::move(config);
  *out = run.release();
  return RINGSIM_OK;
}

}  // namespace

extern "C" {

const char* ringsim_version(void) { return ringsim::kVersion; }

const char* ringsim_status_string(ringsim_status status) {
  switch (status) {
    case RINGSIM_OK:
      return "ok";
    case RINGSIM_ERR_IO:
      return "i/o error";
    case RINGSIM_ERR_CONFIG:
      return "configuration error";
    case RINGSIM_ERR_COLLISION:
      return "collision";
    case RINGSIM_ERR_SOLVER:
      return "solver failure";
    case RINGSIM_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case RINGSIM_ERR_NOT_EXECUTED:
      return "run not executed";
    case RINGSIM_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* ringsim_last_error(void) { return g_last_error.c_str(); }

ringsim_status ringsim_run_create_preset(const char* preset, ringsim_run** out) {
  return guarded([&] {
    if (preset == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null preset");
    const auto p = ringsim::parse_preset(preset);
    if (!p) {
      return fail(RINGSIM_ERR_CONFIG, std::string("unknown preset '") + preset +
                                          "' (expected idm, idm_delayed, mixed, mixed_delayed)");
    }
    return create(ringsim::preset_config(*p), out);
  });
}

ringsim_status ringsim_run_create_from_json(const char* json, ringsim_run** out) {
  return guarded([&] {
    if (json == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null JSON text");
    return create(ringsim::parse_run_config(json), out);
  });
}

ringsim_status ringsim_run_create_from_file(const char* path, ringsim_run** out) {
  return guarded([&] {
    if (path == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null path");
    return create(ringsim::load_run_config(path), out);
  });
}

void ringsim_run_destroy(ringsim_run* run) { delete run; }

ringsim_status ringsim_run_set_seed(ringsim_run* run, uint64_t seed) {
  if (run == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null handle");
  run->config.scenario.seed = seed;
  run->result.reset();
  return RINGSIM_OK;
}

ringsim_status ringsim_run_set_tolerances(ringsim_run* run, double rel_tol,
                                          double abs_tol) {
  if (run == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null handle");
  if (!(rel_tol > 0) || !(abs_tol > 0))
    return fail(RINGSIM_ERR_CONFIG, "tolerances must be positive");
  run->config.integrator.rel_tol = rel_tol;
  run->config.integrator.abs_tol = abs_tol;
  run->result.reset();
  return RINGSIM_OK;
}

ringsim_status ringsim_run_set_duration(ringsim_run* run, double t_end) {
  if (run == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null handle");
  if (!(t_end >= 0)) return fail(RINGSIM_ERR_CONFIG, "duration must be >= 0");
  run->config.scenario.t_end = t_end;
  run->result.reset();
  return RINGSIM_OK;
}

ringsim_status ringsim_run_execute(ringsim_run* run) {
  return guarded([&] {
    if (run == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null handle");
    run->result = ringsim::execute_run(run->config);
    const ringsim_status s = outcome_status(run->result->outcome);
    if (s != RINGSIM_OK) {
      const std::string diag = run->result->trajectory.diagnostic;
      return fail(s, diag.empty() ? ringsim_status_string(s) : diag);
    }
    return s;
  });
}

ringsim_status ringsim_run_summary(const ringsim_run* run, ringsim_summary* out) {
  if (run == nullptr || out == nullptr)
    return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null argument");
  if (!run->result) return fail(RINGSIM_ERR_NOT_EXECUTED, "run has not been executed");
  const auto& r = *run->result;
  ringsim_summary s{};
  s.outcome = outcome_status(r.outcome);
  s.has_lyapunov = r.lyapunov ? 1 : 0;
  if (r.lyapunov) {
    s.lyapunov_degenerate = r.lyapunov->degenerate ? 1 : 0;
    s.lambda_max = r.lyapunov->lambda_max;
    s.embed_dim = r.lyapunov->embed_dim;
    s.lag = r.lyapunov->lag;
  }
  s.max_density = r.stats.max_density;
  s.median_density = r.stats.median_density;
  s.min_gap = r.stats.min_gap;
  s.stop_count = r.stats.stop_event_count;
  s.first_stop_time = r.stats.first_stop() ? *r.stats.first_stop() : -1.0;
  s.final_v_std = ringsim::final_v_std(r);
  s.t_final = r.trajectory.empty() ? 0.0 : r.trajectory.t_end();
  s.samples = r.series.size();
  s.vehicles = r.config.scenario.size();
  s.accepted_steps = r.trajectory.segments().size();
  *out = s;
  return RINGSIM_OK;
}

ringsim_status ringsim_run_stops_after(const ringsim_run* run, double t, size_t* out) {
  if (run == nullptr || out == nullptr)
    return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null argument");
  if (!run->result) return fail(RINGSIM_ERR_NOT_EXECUTED, "run has not been executed");
  *out = run->result->stats.stops_after(t);
  return RINGSIM_OK;
}

ringsim_status ringsim_run_manifest(const ringsim_run* run, char* buf,
                                    size_t capacity, size_t* needed) {
  return guarded([&] {
    if (run == nullptr) return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null handle");
    return copy_out(ringsim::dump_manifest(run->config), buf, capacity, needed);
  });
}

ringsim_status ringsim_run_write_artifacts(const ringsim_run* run, const char* dir) {
  return guarded([&] {
    if (run == nullptr || dir == nullptr)
      return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null argument");
    if (!run->result) return fail(RINGSIM_ERR_NOT_EXECUTED, "run has not been executed");
    try {
      ringsim::write_artifacts(*run->result, dir);
    } catch (const std::runtime_error& e) {
      return fail(RINGSIM_ERR_IO, e.what());
    }
    return RINGSIM_OK;
  });
}

ringsim_status ringsim_compare_presets(const char* presets, uint64_t seed,
                                       double rel_tol, double abs_tol,
                                       const char* out_dir, char** table_out) {
  return guarded([&] {
    if (presets == nullptr || table_out == nullptr)
      return fail(RINGSIM_ERR_INVALID_ARGUMENT, "null argument");
    *table_out = nullptr;
    std::vector<ringsim::RunConfig> configs;
    std::string list(presets);
    std::size_t pos = 0;
    while (pos <= list.size()) {
      const std::size_t comma = std::min(list.find(',', pos), list.size());
      const std::string name = list.substr(pos, comma - pos);
      pos = comma + 1;
      if (name.empty()) continue;
      const auto p = ringsim::parse_preset(name);
      if (!p) return fail(RINGSIM_ERR_CONFIG, "unknown preset '" + name + "'");
      auto cfg = ringsim::preset_config(*p);
      cfg.scenario.seed = seed;
      if (rel_tol > 0) cfg.integrator.rel_tol = rel_tol;
      if (abs_tol > 0) cfg.integrator.abs_tol = abs_tol;
      configs.push_back(std::move(cfg));
    }
    if (configs.empty()) return fail(RINGSIM_ERR_CONFIG, "no presets given");
    if (out_dir) std::filesystem::create_directories(out_dir);
    const auto rows =
        ringsim::compare_runs(configs, out_dir ? std::filesystem::path(out_dir)
                                               : std::filesystem::path());
    const std::string table = ringsim::format_compare_table(rows);
    if (out_dir) {
      std::ofstream f(std::filesystem::path(out_dir) / "compare.csv");
      if (!f) return fail(RINGSIM_ERR_IO, "cannot write compare.csv");
      f << table;
    }
    ringsim_status worst = RINGSIM_OK;
    for (const auto& r : rows) {
      if (!r.error.empty()) worst = RINGSIM_ERR_SOLVER;
    }
    char* copy = static_cast<char*>(std::malloc(table.size() + 1));
    if (copy == nullptr) return fail(RINGSIM_ERR_INTERNAL, "out of memory");
    std::memcpy(copy, table.c_str(), table.size() + 1);
    *table_out = copy;
    if (worst != RINGSIM_OK) fail(worst, "one or more runs failed");
    return worst;
  });
}

void ringsim_string_free(char* s) { std::free(s); }

}  // extern "C"
