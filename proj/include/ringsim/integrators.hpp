#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringsim {

using StateVector = std::vector<double>;

struct IntegratorConfig {
  double rel_tol = 1e-3;
  double abs_tol = 1e-6;
  double h_init = 0.01;  // s
  double h_max = 0.1;    // s
  std::size_t max_steps = 10'000'000;

  void validate() const;
};

enum class IntegrationStatus {
  completed,
  terminated,        // a step observer asked to stop (e.g. collision)
  budget_exhausted,  // max_steps reached before t_end
  step_underflow,    // step size collapsed; stiffness or discontinuity
};

const char* to_string(IntegrationStatus status);

/// Dormand-Prince continuous extension for one accepted step, stored in the
/// five-vector form r1 + th*(r2 + (1-th)*(r3 + th*(r4 + (1-th)*r5))).
struct DenseSegment {
  double t0 = 0;
  double h = 0;
  std::vector<double> coeffs;  // 5 * n, row-major by coefficient
};

/// Accepted-step solution with dense output. `states[i]` is the solution at
/// `times[i]`; segment i spans [times[i], times[i+1]].
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  bool empty() const { return times_.empty(); }
  std::size_t size() const { return times_.size(); }
  double t_begin() const { return times_.front(); }
  double t_end() const { return times_.back(); }

  const std::vector<double>& times() const { return times_; }
  const std::vector<StateVector>& states() const { return states_; }
  const std::vector<DenseSegment>& segments() const { return segments_; }

  /// Dense evaluation anywhere in [t_begin, t_end]. Exact at stored instants.
  void eval(double t, std::span<double> out) const;
  StateVector eval(double t) const;

  IntegrationStatus status = IntegrationStatus::completed;
  std::string diagnostic;
  std::size_t rhs_evals = 0;
  std::size_t rejected_steps = 0;

  void push_initial(double t, StateVector z);
  void push_step(DenseSegment segment, double t, StateVector z);

 private:
  std::size_t dim_ = 0;
  std::vector<double> times_;
  std::vector<StateVector> states_;
  std::vector<DenseSegment> segments_;
};

// Thrown from a right-hand side to signal an inadmissible state. The
// integrator retries with a smaller step; if the step collapses the error
// propagates to the caller.
class InadmissibleState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using OdeRhs = std::function<void(double t, std::span<const double> z,
                                  std::span<double> dz)>;

// Writes the solution at an earlier time into `out`.
using DelayedAccessor =
    std::function<void(double t_query, std::span<double> out)>;

using DdeRhs = std::function<void(double t, std::span<const double> z,
                                  const DelayedAccessor& delayed,
                                  std::span<double> dz)>;

// Optional hooks applied to every accepted step.
struct StepHooks {
  // In-place projection of the accepted state (e.g. clamping to a feasible set).
  std::function<void(std::span<double> z)> project;
  // Return true to end the integration after this step.
  std::function<bool(double t, std::span<const double> z)> observe;
};

Trajectory integrate_ode(const OdeRhs& rhs, const StateVector& z0, double t0,
                         double t1, const IntegratorConfig& cfg,
                         const StepHooks& hooks = {});

/// Method-of-steps integration for a single constant lag. `history` supplies
/// the solution on [t0 - tau, t0]; steps never cross t0 + k*tau.
Trajectory integrate_dde(const DdeRhs& rhs,
                         const std::function<StateVector(double)>& history,
                         double tau, double t0, double t1,
                         const IntegratorConfig& cfg,
                         const StepHooks& hooks = {});

struct UniformSeries {
  double t0 = 0;
  double hz = 0;
  std::vector<double> times;
  std::vector<StateVector> states;

  std::size_t size() const { return times.size(); }
};

/// Linear interpolation between stored steps onto t0 + k/hz.
UniformSeries resample(const Trajectory& traj, double hz);

}  // namespace ringsim
