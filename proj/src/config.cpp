#include "ringsim/config.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ringsim {

using nlohmann::json;

namespace {

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

// Typed accessor that reports the dotted field path on failure.
template <typename T>
std::optional<T> optional_field(const json& obj, const std::string& parent,
                                const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw ConfigError(join(parent, key), "expected a number");
    } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_integer() && !it->is_number_unsigned())
        throw ConfigError(join(parent, key), "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (it->is_number_integer() && it->get<long long>() < 0)
          throw ConfigError(join(parent, key), "expected a non-negative integer");
      }
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw ConfigError(join(parent, key), "expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw ConfigError(join(parent, key), "expected a string");
    }
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(join(parent, key), e.what());
  }
}

template <typename T>
void read_into(const json& obj, const std::string& parent,
               const std::string& key, T& target) {
  if (auto v = optional_field<T>(obj, parent, key)) target = *v;
}

const json& object_at(const json& obj, const std::string& parent,
                      const std::string& key) {
  static const json empty = json::object();
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return empty;
  if (!it->is_object()) throw ConfigError(join(parent, key), "expected an object");
  return *it;
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<const char*> known) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(join(path, it.key()), "unknown field");
  }
}

std::array<double, 3> triple(const json& obj, const std::string& path,
                             const std::string& key, std::array<double, 3> fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_array() || it->size() != 3)
    throw ConfigError(join(path, key), "expected an array of three numbers");
  std::array<double, 3> out{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!(*it)[i].is_number())
      throw ConfigError(join(path, key) + "[" + std::to_string(i) + "]",
                        "expected a number");
    out[i] = (*it)[i].get<double>();
  }
  return out;
}

IdmParams parse_idm(const json& obj, const std::string& path, IdmParams p) {
  reject_unknown(obj, path, {"a", "v0", "delta", "s0", "T", "b"});
  read_into(obj, path, "a", p.a);
  read_into(obj, path, "v0", p.v0);
  read_into(obj, path, "delta", p.delta);
  read_into(obj, path, "s0", p.s0);
  read_into(obj, path, "T", p.T);
  read_into(obj, path, "b", p.b);
  try {
    p.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
  return p;
}

FsParams parse_fs(const json& obj, const std::string& path, const FsParams& base) {
  reject_unknown(obj, path, {"r", "omega", "alpha", "k_track"});
  double r = base.r();
  double k = base.k_track();
  read_into(obj, path, "r", r);
  read_into(obj, path, "k_track", k);
  const auto omega = triple(obj, path, "omega", base.omega());
  const auto alpha = triple(obj, path, "alpha", base.alpha());
  try {
    return FsParams(r, omega, alpha, k);
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
}

IdmParams first_idm(const RingScenario& s) {
  for (const auto& c : s.controllers)
    if (const auto* p = std::get_if<IdmController>(&c)) return p->params;
  return IdmParams{};
}

FsParams first_fs(const RingScenario& s) {
  for (const auto& c : s.controllers)
    if (const auto* p = std::get_if<FsController>(&c)) return p->params;
  return FsParams::defaults();
}

RingScenario parse_scenario(const json& obj, std::optional<Preset>& preset) {
  const std::string path = "scenario";
  reject_unknown(obj, path,
                 {"preset", "ring_length_m", "vehicle_count", "fs_vehicles",
                  "tau_s", "v_init_m_per_s", "perturb_amp_m_per_s", "seed",
                  "t_end_s", "sample_hz", "idm", "fs"});
  RingScenario s;
  if (auto name = optional_field<std::string>(obj, path, "preset")) {
    preset = parse_preset(*name);
    if (!preset) {
      throw ConfigError(join(path, "preset"),
                        "unknown preset '" + *name +
                            "' (expected idm, idm_delayed, mixed, mixed_delayed)");
    }
    s = build_uniform_scenario(*preset);
  } else {
    // Inline scenarios must spell out their structure.
    for (const char* key : {"ring_length_m", "vehicle_count", "tau_s",
                            "v_init_m_per_s", "perturb_amp_m_per_s", "seed",
                            "t_end_s", "sample_hz"}) {
      if (!obj.contains(key)) throw ConfigError(join(path, key), "required field missing");
    }
  }

  std::size_t n = s.controllers.size();
  std::vector<std::size_t> fs_ids;
  for (std::size_t i = 0; i < n; ++i)
    if (is_fs(s.controllers[i])) fs_ids.push_back(i);
  read_into(obj, path, "vehicle_count", n);
  if (auto it = obj.find("fs_vehicles"); it != obj.end()) {
    if (!it->is_array()) throw ConfigError(join(path, "fs_vehicles"), "expected an array");
    fs_ids.clear();
    for (std::size_t j = 0; j < it->size(); ++j) {
      const auto& e = (*it)[j];
      if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<long long>() >= 0))
        throw ConfigError("scenario.fs_vehicles[" + std::to_string(j) + "]",
                          "expected a vehicle index");
      fs_ids.push_back(e.get<std::size_t>());
    }
  }
  const IdmParams idm = parse_idm(object_at(obj, path, "idm"), join(path, "idm"), first_idm(s));
  const FsParams fs = parse_fs(object_at(obj, path, "fs"), join(path, "fs"), first_fs(s));
  if (n < 2) throw ConfigError(join(path, "vehicle_count"), "need at least 2 vehicles");
  s.controllers.assign(n, IdmController{idm});
  for (std::size_t id : fs_ids) {
    if (id >= n) throw ConfigError(join(path, "fs_vehicles"), "index out of range");
    s.controllers[id] = FsController{fs};
  }

  read_into(obj, path, "ring_length_m", s.length);
  read_into(obj, path, "tau_s", s.tau);
  read_into(obj, path, "v_init_m_per_s", s.v_init);
  read_into(obj, path, "perturb_amp_m_per_s", s.perturb_amp);
  read_into(obj, path, "seed", s.seed);
  read_into(obj, path, "t_end_s", s.t_end);
  read_into(obj, path, "sample_hz", s.sample_hz);
  try {
    s.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(path, e.what());
  }
  return s;
}

IntegratorConfig parse_integrator(const json& obj) {
  const std::string path = "integrator";
  reject_unknown(obj, path, {"rel_tol", "abs_tol", "h_init", "h_max", "max_steps"});
  IntegratorConfig c;
  read_into(obj, path, "rel_tol", c.rel_tol);
  read_into(obj, path, "abs_tol", c.abs_tol);
  read_into(obj, path, "h_init", c.h_init);
  read_into(obj, path, "h_max", c.h_max);
  read_into(obj, path, "max_steps", c.max_steps);
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path, e.what());
  }
  return c;
}

AnalysisConfig parse_analysis(const json& obj) {
  const std::string path = "analysis";
  reject_unknown(obj, path,
                 {"lyapunov", "heatmap_bins", "stop_speed_m_per_s", "collision_gap_m"});
  AnalysisConfig c;
  const json& ly = object_at(obj, path, "lyapunov");
  const std::string lp = join(path, "lyapunov");
  reject_unknown(ly, lp,
                 {"vehicle", "trim_s", "embed_dim", "lag", "min_separation",
                  "fit_start", "fit_end", "fit_seconds"});
  read_into(ly, lp, "vehicle", c.lyapunov_vehicle);
  read_into(ly, lp, "trim_s", c.lyapunov_trim_s);
  read_into(ly, lp, "embed_dim", c.lyapunov.embed_dim);
  read_into(ly, lp, "lag", c.lyapunov.lag);
  read_into(ly, lp, "min_separation", c.lyapunov.min_separation);
  read_into(ly, lp, "fit_start", c.lyapunov.fit_start);
  read_into(ly, lp, "fit_end", c.lyapunov.fit_end);
  read_into(ly, lp, "fit_seconds", c.lyapunov.fit_seconds);
  if (c.lyapunov.embed_dim == 0) throw ConfigError(join(lp, "embed_dim"), "must be >= 1");
  if (!(c.lyapunov.fit_seconds > 0)) throw ConfigError(join(lp, "fit_seconds"), "must be positive");
  if (!(c.lyapunov_trim_s >= 0)) throw ConfigError(join(lp, "trim_s"), "must be >= 0");
  read_into(obj, path, "heatmap_bins", c.heatmap_bins);
  if (c.heatmap_bins == 0) throw ConfigError(join(path, "heatmap_bins"), "must be >= 1");
  read_into(obj, path, "stop_speed_m_per_s", c.events.v_stop);
  read_into(obj, path, "collision_gap_m", c.events.gap_min);
  return c;
}

OutputConfig parse_outputs(const json& obj) {
  const std::string path = "outputs";
  reject_unknown(obj, path, {"dir", "trajectory", "fd", "heatmap", "phase"});
  OutputConfig c;
  read_into(obj, path, "dir", c.dir);
  read_into(obj, path, "trajectory", c.trajectory);
  read_into(obj, path, "fd", c.fd);
  read_into(obj, path, "heatmap", c.heatmap);
  read_into(obj, path, "phase", c.phase);
  return c;
}

json config_to_json(const RunConfig& c) {
  const RingScenario& s = c.scenario;
  json fs_ids = json::array();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (is_fs(s.controllers[i])) fs_ids.push_back(i);
  const IdmParams idm = first_idm(s);
  const FsParams fs = first_fs(s);
  json scenario = {
      {"ring_length_m", s.length},
      {"vehicle_count", s.size()},
      {"fs_vehicles", fs_ids},
      {"tau_s", s.tau},
      {"v_init_m_per_s", s.v_init},
      {"perturb_amp_m_per_s", s.perturb_amp},
      {"seed", s.seed},
      {"t_end_s", s.t_end},
      {"sample_hz", s.sample_hz},
      {"idm", {{"a", idm.a}, {"v0", idm.v0}, {"delta", idm.delta},
               {"s0", idm.s0}, {"T", idm.T}, {"b", idm.b}}},
      {"fs", {{"r", fs.r()}, {"omega", fs.omega()}, {"alpha", fs.alpha()},
              {"k_track", fs.k_track()}}},
  };
  if (c.preset) scenario["preset"] = to_string(*c.preset);
  const auto& ly = c.analysis.lyapunov;
  return {
      {"scenario", scenario},
      {"integrator",
       {{"rel_tol", c.integrator.rel_tol},
        {"abs_tol", c.integrator.abs_tol},
        {"h_init", c.integrator.h_init},
        {"h_max", c.integrator.h_max},
        {"max_steps", c.integrator.max_steps}}},
      {"analysis",
       {{"lyapunov",
         {{"vehicle", c.analysis.lyapunov_vehicle},
          {"trim_s", c.analysis.lyapunov_trim_s},
          {"embed_dim", ly.embed_dim},
          {"lag", ly.lag},
          {"min_separation", ly.min_separation},
          {"fit_start", ly.fit_start},
          {"fit_end", ly.fit_end},
          {"fit_seconds", ly.fit_seconds}}},
        {"heatmap_bins", c.analysis.heatmap_bins},
        {"stop_speed_m_per_s", c.analysis.events.v_stop},
        {"collision_gap_m", c.analysis.events.gap_min}}},
      {"outputs",
       {{"dir", c.outputs.dir},
        {"trajectory", c.outputs.trajectory},
        {"fd", c.outputs.fd},
        {"heatmap", c.outputs.heatmap},
        {"phase", c.outputs.phase}}},
  };
}

}  // namespace

std::string RunConfig::label() const {
  return preset ? to_string(*preset) : "custom";
}

RunConfig preset_config(Preset preset) {
  RunConfig c;
  c.preset = preset;
  c.scenario = build_uniform_scenario(preset);
  return c;
}

RunConfig parse_run_config(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be an object");
  if (doc.contains("config") && doc.contains("tool")) doc = doc["config"];
  reject_unknown(doc, "", {"scenario", "integrator", "analysis", "outputs"});
  RunConfig c;
  c.scenario = parse_scenario(object_at(doc, "", "scenario"), c.preset);
  c.integrator = parse_integrator(object_at(doc, "", "integrator"));
  c.analysis = parse_analysis(object_at(doc, "", "analysis"));
  c.outputs = parse_outputs(object_at(doc, "", "outputs"));
  if (c.analysis.lyapunov_vehicle >= c.scenario.size()) {
    throw ConfigError("analysis.lyapunov.vehicle", "index out of range");
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string dump_run_config(const RunConfig& config) {
  return config_to_json(config).dump(2);
}

std::string dump_manifest(const RunConfig& config) {
  json m = {{"tool", "ringsim"},
            {"version", kVersion},
            {"seed", config.scenario.seed},
            {"config", config_to_json(config)}};
  return m.dump(2);
}

}  // namespace ringsim
