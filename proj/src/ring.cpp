#include "ringsim/ring.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace ringsim {

bool is_fs(const Controller& c) {
  return std::holds_alternative<FsController>(c);
}

std::optional<Preset> parse_preset(std::string_view name) {
  if (name == "idm") return Preset::idm;
  if (name == "idm_delayed") return Preset::idm_delayed;
  if (name == "mixed") return Preset::mixed;
  if (name == "mixed_delayed") return Preset::mixed_delayed;
  return std::nullopt;
}

const char* to_string(Preset preset) {
  switch (preset) {
    case Preset::idm:
      return "idm";
    case Preset::idm_delayed:
      return "idm_delayed";
    case Preset::mixed:
      return "mixed";
    case Preset::mixed_delayed:
      return "mixed_delayed";
  }
  return "unknown";
}

void RingScenario::validate() const {
  if (controllers.size() < 2)
    throw ParameterError("a ring needs at least two vehicles");
  if (!(length > 0)) throw ParameterError("ring length must be positive");
  if (!(tau >= 0)) throw ParameterError("delay must be non-negative");
  if (!(v_init >= 0)) throw ParameterError("initial speed must be non-negative");
  if (!(perturb_amp >= 0))
    throw ParameterError("perturbation amplitude must be non-negative");
  if (!(t_end >= 0)) throw ParameterError("duration must be non-negative");
  if (!(sample_hz > 0)) throw ParameterError("sample rate must be positive");
  double max_s0 = 0.0;
  for (const auto& c : controllers) {
    if (const auto* idm = std::get_if<IdmController>(&c)) {
      idm->params.validate();
      max_s0 = std::max(max_s0, idm->params.s0);
    }
  }
  if (!(spacing() > max_s0)) {
    throw ParameterError("ring spacing " + std::to_string(spacing()) +
                         " m does not exceed the IDM standstill distance");
  }
}

RingScenario build_uniform_scenario(Preset preset) {
  RingScenario s;
  constexpr std::size_t kVehicles = 10;
  const bool delayed =
      preset == Preset::idm_delayed || preset == Preset::mixed_delayed;
  const bool mixed = preset == Preset::mixed || preset == Preset::mixed_delayed;
  s.tau = delayed ? 0.5 : 0.0;
  s.controllers.assign(kVehicles, IdmController{});
  if (mixed) s.controllers[0] = FsController{};
  return s;
}

double gap(double x_follower, double x_leader, double length) {
  double d = std::fmod(x_leader - x_follower, length);
  if (d < 0) d += length;
  if (d >= length) d -= length;
  return d;
}

std::vector<double> ordered_gaps(std::span<const double> z, double length) {
  const std::size_t n = z.size() / 2;
  std::vector<double> g(n);
  for (std::size_t i = 1; i < n; ++i) g[i] = z[2 * (i - 1)] - z[2 * i];
  g[0] = z[2 * (n - 1)] + length - z[0];
  return g;
}

std::vector<double> circular_gaps(std::span<const double> z, double length) {
  const std::size_t n = z.size() / 2;
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = gap(z[2 * i], z[2 * leader_of(i, n)], length);
  }
  return g;
}

VehicleState vehicle_state(std::span<const double> z, std::size_t i) {
  return {z[2 * i], z[2 * i + 1]};
}

StateVector uniform_initial_state(const RingScenario& scenario) {
  const std::size_t n = scenario.size();
  StateVector z(2 * n);
  const double spacing = scenario.spacing();
  for (std::size_t i = 0; i < n; ++i) {
    z[2 * i] = static_cast<double>(n - 1 - i) * spacing;
    z[2 * i + 1] = scenario.v_init;
  }
  return z;
}

StateVector apply_perturbation(StateVector z, double amp, std::uint64_t seed) {
  if (!(amp >= 0)) throw ParameterError("perturbation amplitude must be >= 0");
  if (amp == 0) return z;
  std::mt19937_64 gen(seed);
  for (std::size_t i = 1; i < z.size(); i += 2) {
    // 53-bit uniform in [0, 1); avoids library-specific distributions.
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    z[i] = std::max(0.0, z[i] + amp * (2.0 * u - 1.0));
  }
  return z;
}

void wrap_positions(std::span<double> z, double length) {
  for (std::size_t i = 0; i < z.size(); i += 2) {
    double x = std::fmod(z[i], length);
    if (x < 0) x += length;
    if (x >= length) x -= length;
    z[i] = x;
  }
}

void clamp_velocities(std::span<double> z) {
  for (std::size_t i = 1; i < z.size(); i += 2) z[i] = std::max(0.0, z[i]);
}

RingSystem::RingSystem(RingScenario scenario) : scenario_(std::move(scenario)) {
  scenario_.validate();
}

void RingSystem::rhs(double /*t*/, std::span<const double> z,
                     std::span<const double> z_delayed,
                     std::span<double> dz) const {
  const std::size_t n = scenario_.size();
  const double length = scenario_.length;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lead = leader_of(i, n);
    const double offset = i == 0 ? length : 0.0;
    const double v = z[2 * i + 1];
    double acc = 0.0;
    if (const auto* fs = std::get_if<FsController>(&scenario_.controllers[i])) {
      const double dx = z[2 * lead] + offset - z[2 * i];
      if (!(dx > 0)) {
        throw InadmissibleState("vehicle " + std::to_string(i) +
                                " reached its leader");
      }
      const double v_lead = z[2 * lead + 1];
      acc = fs_accel(v, fs_command(dx, v_lead - v, v_lead, fs->params),
                     fs->params);
    } else {
      const auto& idm = std::get<IdmController>(scenario_.controllers[i]);
      const double s_now = z[2 * lead] + offset - z[2 * i];
      const double s = z_delayed[2 * lead] + offset - z_delayed[2 * i];
      if (!(s_now > 0) || !(s > 0)) {
        throw InadmissibleState("vehicle " + std::to_string(i) +
                                " reached its leader");
      }
      const double v_own = z_delayed[2 * i + 1];
      const double v_lead = z_delayed[2 * lead + 1];
      acc = idm_accel(s, v_own, v_own - v_lead, idm.params);
    }
    if (v <= 0 && acc < 0) acc = 0.0;
    dz[2 * i] = v;
    dz[2 * i + 1] = acc;
  }
}

OdeRhs RingSystem::ode_rhs() const {
  return [this](double t, std::span<const double> z, std::span<double> dz) {
    rhs(t, z, z, dz);
  };
}

DdeRhs RingSystem::dde_rhs() const {
  const double tau = scenario_.tau;
  return [this, tau](double t, std::span<const double> z,
                     const DelayedAccessor& delayed, std::span<double> dz) {
    thread_local StateVector lagged;
    lagged.resize(z.size());
    delayed(t - tau, lagged);
    rhs(t, z, lagged, dz);
  };
}

const char* to_string(EventKind kind) {
  return kind == EventKind::collision ? "collision" : "stop";
}

std::vector<Event> detect_events(std::span<const double> z,
                                 const RingScenario& scenario,
                                 const EventThresholds& thresholds) {
  std::vector<Event> events;
  const std::size_t n = z.size() / 2;
  const auto gaps = circular_gaps(z, scenario.length);
  for (std::size_t i = 0; i < n; ++i) {
    if (gaps[i] <= thresholds.gap_min) events.push_back({EventKind::collision, i});
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (z[2 * i + 1] < thresholds.v_stop) events.push_back({EventKind::stop, i});
  }
  return events;
}

}  // namespace ringsim
