#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ringsim/integrators.hpp"

namespace ringsim {
namespace {

const OdeRhs kDecay = [](double, std::span<const double> y, std::span<double> dy) {
  dy[0] = -y[0];
};

const OdeRhs kOscillator = [](double, std::span<const double> y,
                              std::span<double> dy) {
  dy[0] = y[1];
  dy[1] = -y[0];
};

IntegratorConfig tight(double rel) {
  IntegratorConfig c;
  c.rel_tol = rel;
  c.abs_tol = rel * 1e-3;
  return c;
}

TEST(IntegrateOde, ExponentialDecay) {
  const auto cfg = tight(1e-6);
  const auto traj = integrate_ode(kDecay, {1.0}, 0.0, 1.0, cfg);
  EXPECT_EQ(traj.status, IntegrationStatus::completed);
  EXPECT_EQ(traj.t_end(), 1.0);
  EXPECT_NEAR(traj.states().back()[0], std::exp(-1.0), 10 * cfg.rel_tol);
}

TEST(IntegrateOde, HarmonicOscillatorOnePeriod) {
  auto cfg = tight(1e-7);
  cfg.h_max = 1.0;
  const double period = 2 * std::numbers::pi;
  const auto traj = integrate_ode(kOscillator, {1.0, 0.0}, 0.0, period, cfg);
  const auto& end = traj.states().back();
  EXPECT_NEAR(end[0], 1.0, 100 * cfg.rel_tol);
  EXPECT_NEAR(end[1], 0.0, 100 * cfg.rel_tol);
  double drift = 0.0;
  for (const auto& z : traj.states()) {
    drift = std::max(drift, std::abs(z[0] * z[0] + z[1] * z[1] - 1.0));
  }
  EXPECT_LT(drift, 100 * cfg.rel_tol);
}

// Observed order from global error against accepted steps over four
// tolerance decades.
TEST(IntegrateOde, ConvergenceOrderAtLeastFour) {
  std::vector<double> log_steps, log_err;
  for (double rel : {1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
    auto cfg = tight(rel);
    cfg.h_max = 10.0;
    cfg.h_init = 0.05;
    const auto traj = integrate_ode(kDecay, {1.0}, 0.0, 5.0, cfg);
    log_steps.push_back(std::log(static_cast<double>(traj.segments().size())));
    log_err.push_back(std::log(std::abs(traj.states().back()[0] - std::exp(-5.0))));
  }
  const double n = static_cast<double>(log_steps.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < log_steps.size(); ++i) {
    sx += log_steps[i];
    sy += log_err[i];
    sxx += log_steps[i] * log_steps[i];
    sxy += log_steps[i] * log_err[i];
  }
  const double order = -(n * sxy - sx * sy) / (n * sxx - sx * sx);
  EXPECT_GE(order, 4.0);
}

TEST(IntegrateOde, TighterToleranceDoesNotIncreaseError) {
  double prev_decay = 1.0, prev_osc = 1.0;
  for (double rel : {1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
    auto cfg = tight(rel);
    cfg.h_max = 1.0;
    const double e_decay = std::abs(
        integrate_ode(kDecay, {1.0}, 0.0, 3.0, cfg).states().back()[0] - std::exp(-3.0));
    const auto osc = integrate_ode(kOscillator, {1.0, 0.0}, 0.0, 3.0, cfg);
    const double e_osc = std::abs(osc.states().back()[0] - std::cos(3.0));
    EXPECT_LE(e_decay, prev_decay) << rel;
    EXPECT_LE(e_osc, prev_osc) << rel;
    prev_decay = e_decay;
    prev_osc = e_osc;
  }
}

TEST(IntegrateOde, DenseOutputMatchesStepEndpoints) {
  const auto traj = integrate_ode(kOscillator, {1.0, 0.0}, 0.0, 10.0, tight(1e-6));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto z = traj.eval(traj.times()[i]);
    EXPECT_EQ(z, traj.states()[i]);
  }
  // The polynomial itself reproduces both ends of each step.
  const std::size_t n = traj.dim();
  for (std::size_t s = 0; s < traj.segments().size(); ++s) {
    const auto& r = traj.segments()[s].coeffs;
    for (std::size_t k = 0; k < n; ++k) {
      EXPECT_EQ(r[k], traj.states()[s][k]);
      EXPECT_NEAR(r[k] + r[n + k], traj.states()[s + 1][k], 1e-15);
    }
  }
  // Between nodes the interpolant tracks the analytic solution.
  for (double t = 0.013; t < 10.0; t += 0.0371) {
    EXPECT_NEAR(traj.eval(t)[0], std::cos(t), 1e-5);
  }
}

TEST(IntegrateOde, Deterministic) {
  const auto a = integrate_ode(kOscillator, {1.0, 0.3}, 0.0, 20.0, tight(1e-6));
  const auto b = integrate_ode(kOscillator, {1.0, 0.3}, 0.0, 20.0, tight(1e-6));
  EXPECT_EQ(a.times(), b.times());
  EXPECT_EQ(a.states(), b.states());
}

TEST(IntegrateOde, ZeroLengthSpan) {
  const auto traj = integrate_ode(kDecay, {2.0}, 3.0, 3.0, tight(1e-6));
  EXPECT_EQ(traj.size(), 1u);
  EXPECT_EQ(traj.status, IntegrationStatus::completed);
  EXPECT_EQ(traj.eval(3.0)[0], 2.0);
}

TEST(IntegrateOde, ObserverTerminates) {
  StepHooks hooks;
  hooks.observe = [](double, std::span<const double> y) { return y[0] < 0.5; };
  const auto traj = integrate_ode(kDecay, {1.0}, 0.0, 10.0, tight(1e-6), hooks);
  EXPECT_EQ(traj.status, IntegrationStatus::terminated);
  EXPECT_LT(traj.states().back()[0], 0.5);
  EXPECT_LT(traj.t_end(), 1.0);
}

TEST(IntegrateOde, ProjectionAppliedToAcceptedStates) {
  StepHooks hooks;
  hooks.project = [](std::span<double> y) { y[0] = std::max(0.0, y[0]); };
  const OdeRhs fall = [](double, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[0] > 0 ? -1.0 : 0.0;
  };
  const auto traj = integrate_ode(fall, {0.5}, 0.0, 2.0, tight(1e-6), hooks);
  for (const auto& z : traj.states()) EXPECT_GE(z[0], 0.0);
  EXPECT_EQ(traj.states().back()[0], 0.0);
}

TEST(IntegrateOde, BudgetAndUnderflowDiagnostics) {
  auto cfg = tight(1e-6);
  cfg.max_steps = 5;
  const auto short_budget = integrate_ode(kDecay, {1.0}, 0.0, 10.0, cfg);
  EXPECT_EQ(short_budget.status, IntegrationStatus::budget_exhausted);
  EXPECT_FALSE(short_budget.diagnostic.empty());

  // A right-hand side that refuses to leave y < 1 collapses the step size.
  const OdeRhs wall = [](double, std::span<const double> y, std::span<double> dy) {
    if (y[0] > 1.0) throw InadmissibleState("past the wall");
    dy[0] = 1.0;
  };
  const auto blocked = integrate_ode(wall, {0.0}, 0.0, 5.0, tight(1e-6));
  EXPECT_EQ(blocked.status, IntegrationStatus::step_underflow);
  EXPECT_NEAR(blocked.t_end(), 1.0, 1e-6);
}

TEST(IntegrateOde, RejectsInvalidConfig) {
  IntegratorConfig cfg;
  cfg.rel_tol = 0;
  EXPECT_THROW(integrate_ode(kDecay, {1.0}, 0.0, 1.0, cfg), std::invalid_argument);
  EXPECT_THROW(integrate_ode(kDecay, {1.0}, 1.0, 0.0, IntegratorConfig{}),
               std::invalid_argument);
}

const DdeRhs kLinearDelay = [](double t, std::span<const double>,
                               const DelayedAccessor& delayed, std::span<double> dy) {
  double lagged[1];
  delayed(t - 1.0, lagged);
  dy[0] = -lagged[0];
};

const auto kUnitHistory = [](double) { return StateVector{1.0}; };

// Method of steps by hand: y = 1 - t on [0,1], y = 1 - t + (t-1)^2/2 on [1,2].
double hand_solution(double t) {
  return t <= 1.0 ? 1.0 - t : 1.0 - t + 0.5 * (t - 1.0) * (t - 1.0);
}

TEST(IntegrateDde, MatchesMethodOfStepsHandSolution) {
  const auto traj = integrate_dde(kLinearDelay, kUnitHistory, 1.0, 0.0, 2.0, tight(1e-6));
  ASSERT_EQ(traj.status, IntegrationStatus::completed);
  double worst = 0.0;
  for (double t = 0.0; t <= 2.0; t += 1.0 / 512) {
    worst = std::max(worst, std::abs(traj.eval(t)[0] - hand_solution(t)));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_NEAR(traj.states().back()[0], -0.5, 1e-6);
}

TEST(IntegrateDde, StepsLandOnBreakpoints) {
  const auto traj = integrate_dde(kLinearDelay, kUnitHistory, 1.0, 0.0, 3.5, tight(1e-6));
  const auto& ts = traj.times();
  for (double b : {1.0, 2.0, 3.0}) {
    EXPECT_NE(std::find(ts.begin(), ts.end(), b), ts.end()) << b;
  }
  EXPECT_EQ(ts.back(), 3.5);
}

TEST(IntegrateDde, LongDelayDegeneratesToOde) {
  const double tau = 10.0;
  const auto history = [](double t) { return StateVector{std::cos(t)}; };
  const DdeRhs dde = [tau](double t, std::span<const double> y,
                           const DelayedAccessor& delayed, std::span<double> dy) {
    double lagged[1];
    delayed(t - tau, lagged);
    dy[0] = -y[0] + lagged[0];
  };
  const OdeRhs ode = [tau](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = -y[0] + std::cos(t - tau);
  };
  const auto cfg = tight(1e-6);
  const auto a = integrate_dde(dde, history, tau, 0.0, 2.0, cfg);
  const auto b = integrate_ode(ode, {1.0}, 0.0, 2.0, cfg);
  EXPECT_EQ(a.times(), b.times());
  EXPECT_EQ(a.states(), b.states());
}

TEST(IntegrateDde, LookupBeyondComputedSolutionIsRejected) {
  const DdeRhs peeks_ahead = [](double t, std::span<const double>,
                                const DelayedAccessor& delayed, std::span<double> dy) {
    double lagged[1];
    delayed(t - 0.25, lagged);  // declared lag is 1.0
    dy[0] = -lagged[0];
  };
  auto cfg = tight(1e-6);
  cfg.h_max = 1.0;
  EXPECT_THROW(integrate_dde(peeks_ahead, kUnitHistory, 1.0, 0.0, 2.0, cfg),
               std::logic_error);
}

Trajectory manual(const std::vector<double>& ts, const std::vector<double>& ys) {
  Trajectory traj(1);
  traj.push_initial(ts[0], {ys[0]});
  for (std::size_t i = 1; i < ts.size(); ++i) {
    traj.push_step(DenseSegment{ts[i - 1], ts[i] - ts[i - 1], {}}, ts[i], {ys[i]});
  }
  return traj;
}

TEST(Resample, TwoPointLinearity) {
  const auto s = resample(manual({0.0, 1.0}, {0.0, 10.0}), 2.0);
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.times, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(s.states[0][0], 0.0);
  EXPECT_EQ(s.states[1][0], 5.0);
  EXPECT_EQ(s.states[2][0], 10.0);
}

TEST(Resample, ExactGridIsIdentity) {
  std::vector<double> ts, ys;
  for (int k = 0; k <= 90; ++k) {
    ts.push_back(k / 30.0);
    ys.push_back(std::sin(k * 0.1));
  }
  const auto s = resample(manual(ts, ys), 30.0);
  ASSERT_EQ(s.size(), ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_EQ(s.states[k][0], ys[k]);
}

TEST(Resample, RampAtIrregularStepsIsExact) {
  std::vector<double> ts{0.0}, ys{1.0};
  double t = 0.0;
  for (int k = 0; k < 200; ++k) {
    t += 0.013 + 0.05 * std::abs(std::sin(k * 1.7));
    ts.push_back(t);
    ys.push_back(1.0 + 2.5 * t);
  }
  const auto s = resample(manual(ts, ys), 30.0);
  EXPECT_LE(s.times.back(), ts.back());
  for (std::size_t k = 0; k < s.size(); ++k) {
    EXPECT_NEAR(s.states[k][0], 1.0 + 2.5 * s.times[k], 1e-12);
  }
}

TEST(Resample, Errors) {
  EXPECT_THROW(resample(Trajectory(1), 30.0), std::invalid_argument);
  EXPECT_THROW(resample(manual({0.0, 1.0}, {0.0, 1.0}), 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace ringsim
