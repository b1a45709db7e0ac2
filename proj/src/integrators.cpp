#include "ringsim/integrators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace ringsim {

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0) || !(abs_tol > 0))
    throw std::invalid_argument("integrator tolerances must be positive");
  if (!(h_max > 0)) throw std::invalid_argument("h_max must be positive");
  if (!(h_init >= 0)) throw std::invalid_argument("h_init must be >= 0");
  if (max_steps == 0) throw std::invalid_argument("max_steps must be >= 1");
}

const char* to_string(IntegrationStatus status) {
  switch (status) {
    case IntegrationStatus::completed:
      return "completed";
    case IntegrationStatus::terminated:
      return "terminated";
    case IntegrationStatus::budget_exhausted:
      return "budget_exhausted";
    case IntegrationStatus::step_underflow:
      return "step_underflow";
  }
  return "unknown";
}

void Trajectory::push_initial(double t, StateVector z) {
  times_.assign(1, t);
  states_.assign(1, std::move(z));
  segments_.clear();
}

void Trajectory::push_step(DenseSegment segment, double t, StateVector z) {
  segments_.push_back(std::move(segment));
  times_.push_back(t);
  states_.push_back(std::move(z));
}

void Trajectory::eval(double t, std::span<double> out) const {
  if (times_.empty()) throw std::logic_error("evaluating an empty trajectory");
  if (out.size() != dim_) throw std::invalid_argument("output size mismatch");
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end()));
  if (t < t_begin() - slack || t > t_end() + slack) {
    std::ostringstream msg;
    msg << "dense lookup at t=" << t << " outside [" << t_begin() << ", "
        << t_end() << "]";
    throw std::out_of_range(msg.str());
  }
  auto it = std::upper_bound(times_.begin(), times_.end(), t);
  std::size_t i = it == times_.begin()
                      ? 0
                      : static_cast<std::size_t>(it - times_.begin()) - 1;
  if (times_[i] == t || segments_.empty()) {
    std::copy(states_[i].begin(), states_[i].end(), out.begin());
    return;
  }
  if (i >= segments_.size()) i = segments_.size() - 1;
  const DenseSegment& seg = segments_[i];
  const double theta = (t - seg.t0) / seg.h;
  const double theta1 = 1.0 - theta;
  const std::size_t n = dim_;
  const double* r = seg.coeffs.data();
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = r[k] + theta * (r[n + k] +
                             theta1 * (r[2 * n + k] +
                                       theta * (r[3 * n + k] +
                                                theta1 * r[4 * n + k])));
  }
}

StateVector Trajectory::eval(double t) const {
  StateVector out(dim_);
  eval(t, out);
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                 a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer, Norsett & Wanner).
constexpr double d1 = -12715105075.0 / 11282082432.0,
                 d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0,
                 d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0,
                 d7 = 69997945.0 / 29380423.0;

// PI controller constants.
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kSafety = 0.9;
constexpr double kMinShrink = 0.2;
constexpr double kMaxGrow = 10.0;

using Stage = std::function<void(double, std::span<const double>,
                                 std::span<double>)>;

// Shared adaptive loop. `breakpoints` is increasing and ends at t1; no step
// crosses a breakpoint.
void run_dopri(const Stage& f, double t0, double t1,
               const std::vector<double>& breakpoints,
               const IntegratorConfig& cfg, const StepHooks& hooks,
               Trajectory& traj) {
  const std::size_t n = traj.dim();
  StateVector y = traj.states().front();
  std::array<StateVector, 7> k;
  for (auto& v : k) v.assign(n, 0.0);
  StateVector ytmp(n), ynew(n), yproj(n);

  if (t1 <= t0) return;

  f(t0, y, k[0]);
  ++traj.rhs_evals;

  double t = t0;
  double h = cfg.h_init > 0 ? cfg.h_init : std::min(cfg.h_max, 1e-2 * (t1 - t0));
  h = std::min(h, cfg.h_max);
  double err_old = 1e-4;
  bool last_rejected = false;
  std::size_t accepted = 0;
  std::size_t bp = 0;
  while (bp < breakpoints.size() && breakpoints[bp] <= t0) ++bp;

  while (t < t1) {
    if (accepted >= cfg.max_steps) {
      traj.status = IntegrationStatus::budget_exhausted;
      traj.diagnostic = "step budget of " + std::to_string(cfg.max_steps) +
                        " exhausted at t=" + std::to_string(t);
      return;
    }
    const double target = breakpoints[bp];
    bool lands_on_target = false;
    if (t + 1.01 * h >= target) {
      h = target - t;
      lands_on_target = true;
    }
    const double h_floor =
        16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t));
    if (h < h_floor) {
      traj.status = IntegrationStatus::step_underflow;
      if (traj.diagnostic.empty())
        traj.diagnostic = "step size underflow at t=" + std::to_string(t);
      return;
    }

    bool admissible = true;
    try {
      for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + h * a21 * k[0][i];
      f(t + c2 * h, ytmp, k[1]);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
      f(t + c3 * h, ytmp, k[2]);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
      f(t + c4 * h, ytmp, k[3]);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] +
                              a54 * k[3][i]);
      f(t + c5 * h, ytmp, k[4]);
      for (std::size_t i = 0; i < n; ++i)
        ytmp[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] +
                              a64 * k[3][i] + a65 * k[4][i]);
      const double t_new = lands_on_target ? target : t + h;
      f(t_new, ytmp, k[5]);
      for (std::size_t i = 0; i < n; ++i)
        ynew[i] = y[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] +
                              a75 * k[4][i] + a76 * k[5][i]);
      f(t_new, ynew, k[6]);
      traj.rhs_evals += 6;
    } catch (const InadmissibleState& e) {
      admissible = false;
      traj.diagnostic = e.what();
    }

    if (!admissible) {
      ++traj.rejected_steps;
      last_rejected = true;
      h *= 0.25;
      continue;
    }

    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double est = h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] +
                              e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
      const double scale =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(est) / scale);
    }

    const double fac11 = std::pow(err, kExpo);
    if (err <= 1.0) {
      const double t_new = lands_on_target ? target : t + h;
      yproj = ynew;
      if (hooks.project) {
        hooks.project(yproj);
        if (yproj != ynew) {
          f(t_new, yproj, k[6]);
          ++traj.rhs_evals;
        }
      }

      DenseSegment seg;
      seg.t0 = t;
      seg.h = t_new - t;
      seg.coeffs.resize(5 * n);
      double* r = seg.coeffs.data();
      for (std::size_t i = 0; i < n; ++i) {
        const double ydiff = yproj[i] - y[i];
        const double bspl = h * k[0][i] - ydiff;
        r[i] = y[i];
        r[n + i] = ydiff;
        r[2 * n + i] = bspl;
        r[3 * n + i] = ydiff - h * k[6][i] - bspl;
        r[4 * n + i] = h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] +
                            d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
      }
      traj.push_step(std::move(seg), t_new, yproj);
      ++accepted;
      y = yproj;
      k[0] = k[6];
      t = t_new;
      if (lands_on_target) ++bp;

      if (hooks.observe && hooks.observe(t, y)) {
        traj.status = IntegrationStatus::terminated;
        return;
      }

      double fac = fac11 / std::pow(err_old, kBeta);
      fac = std::clamp(fac / kSafety, 1.0 / kMaxGrow, 1.0 / kMinShrink);
      double h_new = h / fac;
      if (last_rejected) h_new = std::min(h_new, h);
      err_old = std::max(err, 1e-4);
      last_rejected = false;
      h = std::min(h_new, cfg.h_max);
    } else {
      ++traj.rejected_steps;
      last_rejected = true;
      h /= std::min(1.0 / kMinShrink, fac11 / kSafety);
    }
  }
  traj.status = IntegrationStatus::completed;
}

}  // namespace

Trajectory integrate_ode(const OdeRhs& rhs, const StateVector& z0, double t0,
                         double t1, const IntegratorConfig& cfg,
                         const StepHooks& hooks) {
  cfg.validate();
  if (t1 < t0) throw std::invalid_argument("integration span is reversed");
  Trajectory traj(z0.size());
  StateVector start = z0;
  if (hooks.project) hooks.project(start);
  traj.push_initial(t0, std::move(start));
  if (hooks.observe && hooks.observe(t0, traj.states().front())) {
    traj.status = IntegrationStatus::terminated;
    return traj;
  }
  run_dopri(rhs, t0, t1, {t1}, cfg, hooks, traj);
  return traj;
}

Trajectory integrate_dde(const DdeRhs& rhs,
                         const std::function<StateVector(double)>& history,
                         double tau, double t0, double t1,
                         const IntegratorConfig& cfg, const StepHooks& hooks) {
  cfg.validate();
  if (!(tau > 0)) throw std::invalid_argument("delay must be positive");
  if (t1 < t0) throw std::invalid_argument("integration span is reversed");
  IntegratorConfig local = cfg;
  local.h_max = std::min(cfg.h_max, tau);

  StateVector start = history(t0);
  if (hooks.project) hooks.project(start);
  Trajectory traj(start.size());
  traj.push_initial(t0, std::move(start));
  if (hooks.observe && hooks.observe(t0, traj.states().front())) {
    traj.status = IntegrationStatus::terminated;
    return traj;
  }

  // Breakpoints of the first-derivative discontinuity chain t0 + k*tau.
  std::vector<double> breakpoints;
  for (std::size_t j = 1;; ++j) {
    const double b = t0 + static_cast<double>(j) * tau;
    if (b >= t1) break;
    breakpoints.push_back(b);
  }
  breakpoints.push_back(t1);

  const DelayedAccessor delayed = [&](double tq, std::span<double> out) {
    if (tq <= t0) {
      const StateVector h = history(tq);
      std::copy(h.begin(), h.end(), out.begin());
      return;
    }
    const double slack = 1e-12 * std::max(1.0, std::abs(traj.t_end()));
    if (tq > traj.t_end() + slack) {
      throw std::logic_error("delayed lookup beyond the computed solution");
    }
    traj.eval(std::min(tq, traj.t_end()), out);
  };
  const Stage stage = [&](double t, std::span<const double> z,
                          std::span<double> dz) { rhs(t, z, delayed, dz); };
  run_dopri(stage, t0, t1, breakpoints, local, hooks, traj);
  return traj;
}

UniformSeries resample(const Trajectory& traj, double hz) {
  if (!(hz > 0)) throw std::invalid_argument("resample rate must be positive");
  if (traj.empty()) throw std::invalid_argument("cannot resample an empty trajectory");
  UniformSeries out;
  out.t0 = traj.t_begin();
  out.hz = hz;
  const auto& ts = traj.times();
  const auto& zs = traj.states();
  const double span = traj.t_end() - traj.t_begin();
  const auto count = static_cast<std::size_t>(std::floor(span * hz + 1e-9)) + 1;
  out.times.reserve(count);
  out.states.reserve(count);
  std::size_t seg = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double t = std::min(out.t0 + static_cast<double>(j) / hz, traj.t_end());
    while (seg + 2 < ts.size() && ts[seg + 1] < t) ++seg;
    out.times.push_back(t);
    if (ts.size() == 1) {
      out.states.push_back(zs[0]);
      continue;
    }
    const double ta = ts[seg];
    const double tb = ts[seg + 1];
    const double w = (t - ta) / (tb - ta);
    StateVector z(traj.dim());
    for (std::size_t i = 0; i < z.size(); ++i) {
      z[i] = (1.0 - w) * zs[seg][i] + w * zs[seg + 1][i];
    }
    out.states.push_back(std::move(z));
  }
  return out;
}

}  // namespace ringsim
