#include <gtest/gtest.h>

#include "json.hpp"

#include "ringsim/config.hpp"

namespace ringsim {
namespace {

std::string field_of(std::string_view text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

TEST(Config, PresetDefaults) {
  const auto c = parse_run_config(R"({"scenario": {"preset": "mixed_delayed"}})");
  ASSERT_TRUE(c.preset.has_value());
  EXPECT_EQ(*c.preset, Preset::mixed_delayed);
  EXPECT_EQ(c.label(), "mixed_delayed");
  EXPECT_EQ(c.scenario.size(), 10u);
  EXPECT_EQ(c.scenario.tau, 0.5);
  EXPECT_TRUE(is_fs(c.scenario.controllers[0]));
  EXPECT_EQ(c.integrator.rel_tol, 1e-3);
  EXPECT_EQ(c.integrator.abs_tol, 1e-6);
  EXPECT_EQ(c.analysis.heatmap_bins, 100u);
  EXPECT_EQ(c.analysis.events.v_stop, 0.1);
  EXPECT_EQ(c.analysis.lyapunov.embed_dim, 3u);
}

TEST(Config, PresetOverrides) {
  const auto c = parse_run_config(R"({
    "scenario": {"preset": "idm", "seed": 7, "t_end_s": 20, "idm": {"T": 1.2}},
    "integrator": {"rel_tol": 1e-6, "abs_tol": 1e-9}
  })");
  EXPECT_EQ(c.scenario.seed, 7u);
  EXPECT_EQ(c.scenario.t_end, 20.0);
  EXPECT_EQ(std::get<IdmController>(c.scenario.controllers[4]).params.T, 1.2);
  EXPECT_EQ(c.integrator.rel_tol, 1e-6);
}

TEST(Config, InlineScenario) {
  const auto c = parse_run_config(R"({"scenario": {
    "ring_length_m": 230, "vehicle_count": 22, "fs_vehicles": [3, 11],
    "tau_s": 0.2, "v_init_m_per_s": 4, "perturb_amp_m_per_s": 0.01,
    "seed": 5, "t_end_s": 60, "sample_hz": 10, "fs": {"r": 6}}})");
  EXPECT_FALSE(c.preset.has_value());
  EXPECT_EQ(c.label(), "custom");
  EXPECT_EQ(c.scenario.size(), 22u);
  EXPECT_TRUE(is_fs(c.scenario.controllers[3]));
  EXPECT_TRUE(is_fs(c.scenario.controllers[11]));
  EXPECT_FALSE(is_fs(c.scenario.controllers[0]));
  EXPECT_EQ(std::get<FsController>(c.scenario.controllers[3]).params.r(), 6.0);
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm", "tau_s": "slow"}})"), "scenario.tau_s");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm", "colour": 1}})"), "scenario.colour");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "bogus"}})"), "scenario.preset");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm", "idm": {"a": -1}}})"), "scenario.idm");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm", "fs": {"omega": [1, 2]}}})"),
            "scenario.fs.omega");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm", "fs": {"alpha": [0.5, 1.0, 0.5]}}})"),
            "scenario.fs");
  EXPECT_EQ(field_of(R"({"scenario": {"ring_length_m": 100}})"), "scenario.vehicle_count");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm", "fs_vehicles": [10]}})"),
            "scenario.fs_vehicles");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm", "vehicle_count": 60}})"), "scenario");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm"}, "integrator": {"rel_tol": 0}})"),
            "integrator");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm"}, "integrator": {"max_steps": -3}})"),
            "integrator.max_steps");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm"},
                         "analysis": {"lyapunov": {"embed_dim": 0}}})"),
            "analysis.lyapunov.embed_dim");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm"},
                         "analysis": {"lyapunov": {"vehicle": 10}}})"),
            "analysis.lyapunov.vehicle");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm"}, "outputs": {"fd": "yes"}})"),
            "outputs.fd");
  EXPECT_EQ(field_of(R"({"scenario": {"preset": "idm"}, "extra": {}})"), "extra");
  EXPECT_EQ(field_of("{not json"), "");
  EXPECT_EQ(field_of("[1, 2]"), "");
}

TEST(Config, DumpRoundTrip) {
  for (Preset p : {Preset::idm, Preset::idm_delayed, Preset::mixed, Preset::mixed_delayed}) {
    auto c = preset_config(p);
    c.scenario.seed = 99;
    c.integrator.rel_tol = 1e-7;
    c.analysis.lyapunov_trim_s = 12.5;
    c.outputs.heatmap = false;
    const auto text = dump_run_config(c);
    const auto back = parse_run_config(text);
    EXPECT_EQ(dump_run_config(back), text);
    EXPECT_EQ(back.scenario.seed, 99u);
    EXPECT_EQ(back.integrator.rel_tol, 1e-7);
    EXPECT_FALSE(back.outputs.heatmap);
  }
}

TEST(Config, ManifestEmbedsConfig) {
  auto c = preset_config(Preset::mixed);
  c.scenario.seed = 1234;
  const auto manifest = nlohmann::json::parse(dump_manifest(c));
  EXPECT_EQ(manifest["tool"], "ringsim");
  EXPECT_EQ(manifest["version"], kVersion);
  EXPECT_EQ(manifest["seed"], 1234);
  const auto back = parse_run_config(manifest.dump());
  EXPECT_EQ(dump_run_config(back), dump_run_config(c));
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_run_config("/nonexistent/ringsim.json"), ConfigError);
}

}  // namespace
}  // namespace ringsim
