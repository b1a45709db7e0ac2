#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ringsim/analysis.hpp"
#include "ringsim/integrators.hpp"
#include "ringsim/ring.hpp"

namespace ringsim {

inline constexpr const char* kVersion = "0.1.0";

// Invalid configuration; `field()` is a dotted path such as
// "scenario.tau_s".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct AnalysisConfig {
  LyapunovConfig lyapunov;
  std::size_t lyapunov_vehicle = 0;
  double lyapunov_trim_s = 0.0;  // leading transient dropped before estimation
  std::size_t heatmap_bins = 100;
  EventThresholds events;
};

struct OutputConfig {
  std::string dir;  // empty: caller decides
  bool trajectory = true;
  bool fd = true;
  bool heatmap = true;
  bool phase = true;
};

struct RunConfig {
  std::optional<Preset> preset;
  RingScenario scenario;
  IntegratorConfig integrator;
  AnalysisConfig analysis;
  OutputConfig outputs;

  std::string label() const;
};

RunConfig preset_config(Preset preset);

/// Parses a config document (or a run manifest, which embeds one under
/// "config"). Throws ConfigError naming the offending field.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Fully resolved config as JSON; parse_run_config(dump_run_config(c))
/// reproduces c.
std::string dump_run_config(const RunConfig& config);

/// Config plus tool name and version.
std::string dump_manifest(const RunConfig& config);

}  // namespace ringsim
