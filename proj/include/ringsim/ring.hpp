#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "ringsim/integrators.hpp"
#include "ringsim/models.hpp"

namespace ringsim {

struct IdmController {
  IdmParams params;
};

struct FsController {
  FsParams params = FsParams::defaults();
};

using Controller = std::variant<IdmController, FsController>;

bool is_fs(const Controller& c);

struct VehicleState {
  double x;  // m, position on the ring
  double v;  // m/s
};

enum class Preset { idm, idm_delayed, mixed, mixed_delayed };

std::optional<Preset> parse_preset(std::string_view name);
const char* to_string(Preset preset);

// A closed single-lane road. Vehicle i follows vehicle i-1; vehicle 0 follows
// vehicle N-1. The state vector interleaves [x0, v0, x1, v1, ...].
struct RingScenario {
  double length = 100.0;  // m
  std::vector<Controller> controllers;
  double tau = 0.0;  // s, reaction delay on IDM inputs only
  double v_init = 5.0;
  double perturb_amp = 1e-3;
  std::uint64_t seed = 0;
  double t_end = 1500.0;
  double sample_hz = 30.0;

  std::size_t size() const { return controllers.size(); }
  double spacing() const { return length / static_cast<double>(size()); }
  void validate() const;
};

RingScenario build_uniform_scenario(Preset preset);

inline std::size_t leader_of(std::size_t i, std::size_t n) {
  return i == 0 ? n - 1 : i - 1;
}

/// Forward circular distance from follower to leader, in [0, L). Zero means
/// coincident positions.
double gap(double x_follower, double x_leader, double length);

/// Per-vehicle gaps from lap-continuous positions. Negative values mean a
/// vehicle has passed its leader.
std::vector<double> ordered_gaps(std::span<const double> z, double length);

/// Per-vehicle circular gaps; valid for wrapped or lap-continuous positions.
std::vector<double> circular_gaps(std::span<const double> z, double length);

VehicleState vehicle_state(std::span<const double> z, std::size_t i);

/// Equal spacing at v_init. Vehicle 0 starts furthest along the road.
StateVector uniform_initial_state(const RingScenario& scenario);

/// Adds i.i.d. uniform[-amp, amp] offsets to each velocity, clamped at zero.
StateVector apply_perturbation(StateVector z, double amp, std::uint64_t seed);

void wrap_positions(std::span<double> z, double length);
void clamp_velocities(std::span<double> z);

class RingSystem {
 public:
  explicit RingSystem(RingScenario scenario);

  const RingScenario& scenario() const { return scenario_; }

  /// Vehicle dynamics. IDM vehicles read gap, speed and approach rate from
  /// `z_delayed` (the state tau seconds ago); FollowerStopper and kinematics
  /// read `z`. Throws InadmissibleState on a non-positive gap.
  void rhs(double t, std::span<const double> z,
           std::span<const double> z_delayed, std::span<double> dz) const;

  OdeRhs ode_rhs() const;
  DdeRhs dde_rhs() const;

 private:
  RingScenario scenario_;
};

enum class EventKind { collision, stop };

const char* to_string(EventKind kind);

struct Event {
  EventKind kind;
  std::size_t vehicle;
  double t = 0.0;
};

struct EventThresholds {
  double gap_min = 0.0;  // m
  double v_stop = 0.1;   // m/s
};

std::vector<Event> detect_events(std::span<const double> z,
                                 const RingScenario& scenario,
                                 const EventThresholds& thresholds = {});

}  // namespace ringsim
