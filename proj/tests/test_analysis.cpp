#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ringsim/analysis.hpp"
#include "ringsim/ring.hpp"

namespace ringsim {
namespace {

UniformSeries uniform_fleet(std::size_t n, double length, double v, std::size_t samples,
                            double hz = 30.0) {
  UniformSeries s;
  s.hz = hz;
  for (std::size_t j = 0; j < samples; ++j) {
    const double t = static_cast<double>(j) / hz;
    StateVector z(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      double x = std::fmod(static_cast<double>(n - 1 - i) * length / static_cast<double>(n) +
                               v * t, length);
      z[2 * i] = x;
      z[2 * i + 1] = v;
    }
    s.times.push_back(t);
    s.states.push_back(z);
  }
  return s;
}

TEST(Voronoi, Examples) {
  const std::vector<double> gaps{10.0, 0.667, 2.0};
  const auto k = voronoi_density(gaps);
  EXPECT_DOUBLE_EQ(k[0], 0.1);
  EXPECT_NEAR(k[1], 1.5, 1e-3);
  EXPECT_DOUBLE_EQ(k[2], 0.5);
  EXPECT_THROW(voronoi_density(std::vector<double>{1.0, 0.0}), std::domain_error);
  EXPECT_THROW(voronoi_density(std::vector<double>{-1.0}), std::domain_error);
}

TEST(FundamentalDiagram, UniformFlow) {
  const auto fd = fundamental_diagram(uniform_fleet(10, 100.0, 5.0, 4), 100.0);
  ASSERT_EQ(fd.size(), 40u);
  for (const auto& p : fd) {
    EXPECT_NEAR(p.k, 0.1, 1e-12);
    EXPECT_NEAR(p.q, 0.5, 1e-12);
    EXPECT_EQ(p.v, 5.0);
  }
}

TEST(FundamentalDiagram, FlowIdentityAndDensityBudget) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(unit(gen) * 20);
    const double length = 50.0 + 200.0 * unit(gen);
    std::vector<double> xs(n);
    for (auto& x : xs) x = unit(gen) * length;
    std::sort(xs.begin(), xs.end(), std::greater<>());
    if (std::adjacent_find(xs.begin(), xs.end()) != xs.end()) continue;
    UniformSeries s;
    s.times = {0.0};
    StateVector z(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
      z[2 * i] = xs[i];
      z[2 * i + 1] = 20.0 * unit(gen);
    }
    s.states = {z};
    const auto fd = fundamental_diagram(s, length);
    const auto g = circular_gaps(z, length);
    double budget = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_DOUBLE_EQ(fd[i].q, fd[i].k * fd[i].v);
      budget += fd[i].k * g[i];
    }
    EXPECT_NEAR(budget, static_cast<double>(n), 1e-9);
  }
}

TEST(Phase, UniformFlowIsAFixedPoint) {
  const auto s = uniform_fleet(10, 100.0, 5.0, 50);
  for (std::size_t veh = 0; veh < 10; ++veh) {
    const auto pts = phase_projection(s, veh, 100.0);
    ASSERT_EQ(pts.size(), 50u);
    for (const auto& p : pts) {
      EXPECT_NEAR(p.gap, 10.0, 1e-9);
      EXPECT_EQ(p.dv, 0.0);
    }
  }
  EXPECT_THROW(phase_projection(s, 10, 100.0), std::out_of_range);
}

TEST(Heatmap, UniformFlowAndSingleBin) {
  const auto s = uniform_fleet(10, 100.0, 5.0, 3);
  const auto grid = heatmap_grid(s, 100.0, 100);
  EXPECT_EQ(grid.bin_width, 1.0);
  std::size_t occupied = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    for (std::size_t b = 0; b < 100; ++b) {
      if (grid.at(j, b)) {
        ++occupied;
        EXPECT_EQ(*grid.at(j, b), 5.0);
      }
    }
  }
  EXPECT_EQ(occupied, 30u);

  UniformSeries mixed;
  mixed.times = {0.0};
  mixed.states = {{10.0, 2.0, 40.0, 4.0, 70.0, 9.0}};
  const auto one = heatmap_grid(mixed, 100.0, 1);
  ASSERT_TRUE(one.at(0, 0).has_value());
  EXPECT_DOUBLE_EQ(*one.at(0, 0), 5.0);
  EXPECT_THROW(heatmap_grid(mixed, 100.0, 0), std::invalid_argument);
}

TEST(FleetStats, StopOnsetsAndDensity) {
  UniformSeries s;
  // Vehicle 1 dips below 0.1 m/s twice; vehicle 2 starts stopped.
  const std::vector<double> v1{1.0, 0.05, 0.2, 0.09, 0.09};
  for (std::size_t j = 0; j < v1.size(); ++j) {
    s.times.push_back(static_cast<double>(j));
    s.states.push_back({60.0, 3.0, 50.0, v1[j], 45.0, 0.0});
  }
  const auto st = fleet_stats(s, 100.0);
  ASSERT_EQ(st.stop_event_count, 3u);
  EXPECT_EQ(st.stop_onsets[0].vehicle, 2u);
  EXPECT_EQ(st.stop_onsets[0].t, 0.0);
  EXPECT_EQ(st.stop_onsets[1].t, 1.0);
  EXPECT_EQ(st.stop_onsets[2].t, 3.0);
  EXPECT_EQ(st.first_stop(), 0.0);
  EXPECT_EQ(st.stops_after(0.5), 2u);
  EXPECT_EQ(st.min_gap, 5.0);
  EXPECT_DOUBLE_EQ(st.max_density, 0.2);
  EXPECT_DOUBLE_EQ(st.median_density, 0.1);
  EXPECT_NEAR(st.v_std[0], std::sqrt(((3 - 4.0 / 3) * (3 - 4.0 / 3) +
                                      (1 - 4.0 / 3) * (1 - 4.0 / 3) + 16.0 / 9) / 3),
              1e-12);
  EXPECT_DOUBLE_EQ(st.max_v_std_after(4.0, s.times), st.v_std[4]);
}

TEST(FleetStats, UniformFlowHasNoSpread) {
  const auto st = fleet_stats(uniform_fleet(10, 100.0, 5.0, 30), 100.0);
  for (double sd : st.v_std) EXPECT_EQ(sd, 0.0);
  EXPECT_EQ(st.stop_event_count, 0u);
  EXPECT_FALSE(st.first_stop().has_value());
  EXPECT_NEAR(st.max_density, 0.1, 1e-9);
}

std::vector<double> logistic(std::size_t n, double x0 = 0.123456) {
  std::vector<double> xs(n);
  double x = x0;
  for (int k = 0; k < 1000; ++k) x = 4.0 * x * (1.0 - x);
  for (auto& v : xs) {
    v = x;
    x = 4.0 * x * (1.0 - x);
  }
  return xs;
}

TEST(Lyapunov, LogisticMapIsLnTwo) {
  const auto xs = logistic(5000);
  const auto r = max_lyapunov(xs, 1.0);
  EXPECT_FALSE(r.degenerate);
  EXPECT_NEAR(r.lambda_max, std::numbers::ln2, 0.15 * std::numbers::ln2);
}

TEST(Lyapunov, ScaleInvariant) {
  const auto xs = logistic(3000);
  auto scaled = xs;
  for (auto& v : scaled) v *= 1234.5;
  const double a = max_lyapunov(xs, 1.0).lambda_max;
  const double b = max_lyapunov(scaled, 1.0).lambda_max;
  EXPECT_NEAR(a, b, 1e-9 * std::abs(a));
}

TEST(Lyapunov, ContractionIsNegativeAndReversalFlipsSign) {
  const double rate = 30.0;
  std::vector<double> decay(1500);
  for (std::size_t k = 0; k < decay.size(); ++k) {
    decay[k] = std::exp(-0.5 * static_cast<double>(k) / rate);
  }
  const auto down = max_lyapunov(decay, rate);
  std::vector<double> growth(decay.rbegin(), decay.rend());
  const auto up = max_lyapunov(growth, rate);
  EXPECT_LT(down.lambda_max, 0.0);
  EXPECT_GT(up.lambda_max, 0.0);
  EXPECT_NEAR(down.lambda_max, -0.5, 0.05);
  EXPECT_NEAR(up.lambda_max, 0.5, 0.05);
}

TEST(Lyapunov, ConstantSignalIsFlagged) {
  const std::vector<double> flat(1000, 3.0);
  const auto r = max_lyapunov(flat, 30.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.lambda_max, kDegenerateLambda);
  EXPECT_FALSE(r.diagnostic.empty());
}

TEST(Lyapunov, RejectsShortOrBadInput) {
  const auto xs = logistic(kMinLyapunovSamples - 1);
  EXPECT_THROW(max_lyapunov(xs, 1.0), std::invalid_argument);
  const auto ok = logistic(kMinLyapunovSamples);
  EXPECT_THROW(max_lyapunov(ok, 0.0), std::invalid_argument);
  LyapunovConfig cfg;
  cfg.embed_dim = 0;
  EXPECT_THROW(max_lyapunov(ok, 1.0, cfg), std::invalid_argument);
  cfg = {};
  cfg.fit_start = 5;
  cfg.fit_end = 5;
  EXPECT_THROW(max_lyapunov(ok, 1.0, cfg), std::invalid_argument);
}

TEST(Spectral, LagAndPeriodOfSine) {
  std::vector<double> s(2000);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s[k] = std::sin(2 * std::numbers::pi * static_cast<double>(k) / 100.0);
  }
  EXPECT_NEAR(static_cast<double>(autocorrelation_lag(s)), 25.0, 1.0);
  EXPECT_NEAR(dominant_period(s), 100.0, 1e-9);
}

// Lorenz system, sigma 10, rho 28, beta 8/3.
void lorenz(std::span<const double> y, std::span<double> dy) {
  dy[0] = 10.0 * (y[1] - y[0]);
  dy[1] = y[0] * (28.0 - y[2]) - y[1];
  dy[2] = y[0] * y[1] - 8.0 / 3.0 * y[2];
}

// Largest exponent from the tangent dynamics with periodic renormalisation.
double benettin_lorenz() {
  const OdeRhs rhs = [](double, std::span<const double> y, std::span<double> dy) {
    lorenz(y.first(3), dy.first(3));
    const double j[3][3] = {{-10.0, 10.0, 0.0},
                            {28.0 - y[2], -1.0, -y[0]},
                            {y[1], y[0], -8.0 / 3.0}};
    for (int r = 0; r < 3; ++r) {
      dy[3 + r] = j[r][0] * y[3] + j[r][1] * y[4] + j[r][2] * y[5];
    }
  };
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  StateVector y{1.0, 1.0, 20.0, 1.0, 0.0, 0.0};
  y = integrate_ode(rhs, y, 0.0, 50.0, cfg).states().back();
  double log_sum = 0.0;
  const int windows = 1000;
  for (int w = 0; w < windows; ++w) {
    const double norm = std::hypot(y[3], y[4], y[5]);
    for (int k = 3; k < 6; ++k) y[k] /= norm;
    y = integrate_ode(rhs, y, 0.0, 1.0, cfg).states().back();
    log_sum += std::log(std::hypot(y[3], y[4], y[5]));
  }
  return log_sum / windows;
}

TEST(Lyapunov, LorenzAgreesWithTangentOracle) {
  const double oracle = benettin_lorenz();
  EXPECT_NEAR(oracle, 0.9, 0.1);

  const OdeRhs rhs = [](double, std::span<const double> y, std::span<double> dy) {
    lorenz(y, dy);
  };
  IntegratorConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  cfg.h_max = 0.01;
  const auto warm = integrate_ode(rhs, {1.0, 1.0, 20.0}, 0.0, 50.0, cfg);
  const double hz = 100.0;
  const auto traj = integrate_ode(rhs, warm.states().back(), 0.0, 150.0, cfg);
  const auto series = resample(traj, hz);
  std::vector<double> x;
  for (const auto& z : series.states) x.push_back(z[0]);
  // Skip the first 0.2 s of the divergence curve, where neighbor offsets are
  // still rotating onto the unstable direction.
  LyapunovConfig lc;
  lc.fit_start = 20;
  const auto r = max_lyapunov(x, hz, lc);
  EXPECT_FALSE(r.degenerate);
  EXPECT_NEAR(r.lambda_max, oracle, 0.25 * oracle);
}

}  // namespace
}  // namespace ringsim
