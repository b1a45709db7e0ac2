// Command-line front end; talks to the simulator only through the C API.
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ringsim/ringsim.h"

namespace {

using RunHandle = std::unique_ptr<ringsim_run, decltype(&ringsim_run_destroy)>;

constexpr const char* kOutDirEnv = "RINGSIM_OUT_DIR";

std::string default_out_dir() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "ringsim_out";
}

int report(ringsim_status status, const std::string& what) {
  std::cerr << "ringsim: " << what << ": " << ringsim_status_string(status);
  const std::string detail = ringsim_last_error();
  if (!detail.empty()) std::cerr << " (" << detail << ")";
  std::cerr << '\n';
  return static_cast<int>(status);
}

struct RunOptions {
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  double rel_tol = 0;
  double abs_tol = 0;
};

int cmd_run(const RunOptions& opt) {
  ringsim_run* raw = nullptr;
  ringsim_status st = opt.config.empty()
                          ? ringsim_run_create_preset(opt.preset.c_str(), &raw)
                          : ringsim_run_create_from_file(opt.config.c_str(), &raw);
  if (st != RINGSIM_OK) return report(st, "invalid configuration");
  RunHandle run(raw, &ringsim_run_destroy);
  if (opt.seed) ringsim_run_set_seed(run.get(), *opt.seed);
  if (opt.rel_tol > 0 || opt.abs_tol > 0) {
    st = ringsim_run_set_tolerances(run.get(), opt.rel_tol > 0 ? opt.rel_tol : 1e-3,
                                    opt.abs_tol > 0 ? opt.abs_tol : 1e-6);
    if (st != RINGSIM_OK) return report(st, "invalid tolerances");
  }

  const ringsim_status outcome = ringsim_run_execute(run.get());
  if (outcome != RINGSIM_OK && outcome != RINGSIM_ERR_COLLISION &&
      outcome != RINGSIM_ERR_SOLVER) {
    return report(outcome, "run failed");
  }
  const std::string out = opt.out.empty() ? default_out_dir() : opt.out;
  st = ringsim_run_write_artifacts(run.get(), out.c_str());
  if (st != RINGSIM_OK) return report(st, "writing artifacts");

  ringsim_summary s{};
  ringsim_run_summary(run.get(), &s);
  std::cout << "outcome:        " << ringsim_status_string(outcome) << '\n'
            << "t_final_s:      " << s.t_final << '\n'
            << "samples:        " << s.samples << '\n';
  if (s.has_lyapunov) {
    std::cout << "lambda_max:     " << s.lambda_max
              << (s.lyapunov_degenerate ? " (degenerate: constant signal)" : "") << '\n';
  } else {
    std::cout << "lambda_max:     n/a\n";
  }
  std::cout << "max_density:    " << s.max_density << '\n'
            << "stop_events:    " << s.stop_count << '\n'
            << "min_gap_m:      " << s.min_gap << '\n'
            << "artifacts:      " << out << '\n';
  if (outcome != RINGSIM_OK) return report(outcome, "run ended early");
  return 0;
}

int cmd_compare(const std::string& presets, std::uint64_t seed,
                const std::string& out_opt, double rel_tol, double abs_tol) {
  const std::string out = out_opt.empty() ? default_out_dir() : out_opt;
  char* table = nullptr;
  const ringsim_status st =
      ringsim_compare_presets(presets.c_str(), seed, rel_tol, abs_tol, out.c_str(), &table);
  if (table != nullptr) {
    std::cout << table;
    ringsim_string_free(table);
  }
  if (st != RINGSIM_OK) return report(st, "compare");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ring-road car-following simulator and stability analysis"};
  app.set_version_flag("--version", std::string(ringsim_version()));
  app.require_subcommand(1);

  RunOptions run_opt;
  std::uint64_t seed_value = 0;
  auto* run = app.add_subcommand("run", "Simulate one scenario and write its artifacts");
  auto* preset_opt = run->add_option("--preset", run_opt.preset, "idm | idm_delayed | mixed | mixed_delayed")
                         ->check(CLI::IsMember({"idm", "idm_delayed", "mixed", "mixed_delayed"}));
  auto* config_opt = run->add_option("--config", run_opt.config, "JSON run configuration or manifest")
                         ->check(CLI::ExistingFile);
  preset_opt->excludes(config_opt);
  auto* seed_opt = run->add_option("--seed", seed_value, "Perturbation RNG seed");
  run->add_option("--out", run_opt.out,
                  std::string("Output directory (default $") + kOutDirEnv + " or ./ringsim_out)");
  run->add_option("--rel-tol", run_opt.rel_tol, "Integrator relative tolerance");
  run->add_option("--abs-tol", run_opt.abs_tol, "Integrator absolute tolerance");

  std::string presets = "idm,idm_delayed,mixed,mixed_delayed";
  std::uint64_t cmp_seed = 0;
  std::string cmp_out;
  double cmp_rel = 0;
  double cmp_abs = 0;
  auto* compare = app.add_subcommand("compare", "Run several presets and tabulate their metrics");
  compare->add_option("--presets", presets, "Comma-separated preset names");
  compare->add_option("--seed", cmp_seed, "Shared perturbation RNG seed");
  compare->add_option("--out", cmp_out, "Output directory for per-run artifacts");
  compare->add_option("--rel-tol", cmp_rel, "Integrator relative tolerance");
  compare->add_option("--abs-tol", cmp_abs, "Integrator absolute tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : RINGSIM_ERR_CONFIG;
  }

  if (run->parsed()) {
    if (run_opt.preset.empty() && run_opt.config.empty()) {
      std::cerr << "ringsim run: one of --preset or --config is required\n";
      return RINGSIM_ERR_CONFIG;
    }
    if (*seed_opt) run_opt.seed = seed_value;
    return cmd_run(run_opt);
  }
  return cmd_compare(presets, cmp_seed, cmp_out, cmp_rel, cmp_abs);
}
