#include "ringsim/analysis.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "ringsim/ring.hpp"

namespace ringsim {

std::vector<double> voronoi_density(std::span<const double> gaps) {
  std::vector<double> k(gaps.size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    if (!(gaps[i] > 0)) {
      throw std::domain_error("Voronoi density needs positive gaps (vehicle " +
                              std::to_string(i) + ")");
    }
    k[i] = 1.0 / gaps[i];
  }
  return k;
}

std::vector<FdSample> fundamental_diagram(const UniformSeries& series,
                                          double length) {
  std::vector<FdSample> out;
  if (series.states.empty()) return out;
  const std::size_t n = series.states.front().size() / 2;
  out.reserve(series.size() * n);
  for (std::size_t j = 0; j < series.size(); ++j) {
    const auto& z = series.states[j];
    const auto k = voronoi_density(circular_gaps(z, length));
    for (std::size_t i = 0; i < n; ++i) {
      const double v = z[2 * i + 1];
      out.push_back({series.times[j], i, k[i], k[i] * v, v});
    }
  }
  return out;
}

std::vector<PhasePoint> phase_projection(const UniformSeries& series,
                                         std::size_t vehicle, double length) {
  std::vector<PhasePoint> out;
  out.reserve(series.size());
  for (std::size_t j = 0; j < series.size(); ++j) {
    const auto& z = series.states[j];
    const std::size_t n = z.size() / 2;
    if (vehicle >= n) throw std::out_of_range("vehicle index out of range");
    const std::size_t lead = leader_of(vehicle, n);
    out.push_back({series.times[j], gap(z[2 * vehicle], z[2 * lead], length),
                   z[2 * lead + 1] - z[2 * vehicle + 1]});
  }
  return out;
}

HeatmapGrid heatmap_grid(const UniformSeries& series, double length,
                         std::size_t n_bins) {
  if (n_bins == 0) throw std::invalid_argument("heatmap needs at least one bin");
  HeatmapGrid grid;
  grid.times = series.times;
  grid.n_bins = n_bins;
  grid.bin_width = length / static_cast<double>(n_bins);
  grid.cells.assign(series.size() * n_bins, std::nullopt);
  std::vector<double> sum(n_bins);
  std::vector<std::size_t> count(n_bins);
  for (std::size_t j = 0; j < series.size(); ++j) {
    std::fill(sum.begin(), sum.end(), 0.0);
    std::fill(count.begin(), count.end(), 0);
    const auto& z = series.states[j];
    for (std::size_t i = 0; i < z.size(); i += 2) {
      double x = std::fmod(z[i], length);
      if (x < 0) x += length;
      auto bin = static_cast<std::size_t>(x / grid.bin_width);
      bin = std::min(bin, n_bins - 1);
      sum[bin] += z[i + 1];
      ++count[bin];
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
      if (count[b] > 0) {
        grid.cells[j * n_bins + b] = sum[b] / static_cast<double>(count[b]);
      }
    }
  }
  return grid;
}

std::size_t FleetStats::stops_after(double t) const {
  return static_cast<std::size_t>(
      std::count_if(stop_onsets.begin(), stop_onsets.end(),
                    [t](const StopOnset& s) { return s.t > t; }));
}

std::optional<double> FleetStats::first_stop() const {
  if (stop_onsets.empty()) return std::nullopt;
  return stop_onsets.front().t;
}

double FleetStats::max_v_std_after(double t,
                                   const std::vector<double>& times) const {
  double m = 0.0;
  for (std::size_t j = 0; j < times.size() && j < v_std.size(); ++j) {
    if (times[j] >= t) m = std::max(m, v_std[j]);
  }
  return m;
}

FleetStats fleet_stats(const UniformSeries& series, double length,
                       double v_stop) {
  FleetStats stats;
  if (series.states.empty()) return stats;
  const std::size_t n = series.states.front().size() / 2;
  std::vector<bool> stopped(n, false);
  std::vector<double> densities;
  densities.reserve(series.size() * n);
  stats.min_gap = std::numeric_limits<double>::infinity();
  stats.v_std.reserve(series.size());
  for (std::size_t j = 0; j < series.size(); ++j) {
    const auto& z = series.states[j];
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += z[2 * i + 1];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = z[2 * i + 1] - mean;
      var += d * d;
    }
    stats.v_std.push_back(std::sqrt(var / static_cast<double>(n)));

    for (std::size_t i = 0; i < n; ++i) {
      const bool now = z[2 * i + 1] < v_stop;
      if (now && !stopped[i]) stats.stop_onsets.push_back({series.times[j], i});
      stopped[i] = now;
    }

    for (double g : circular_gaps(z, length)) {
      stats.min_gap = std::min(stats.min_gap, g);
      if (g > 0) densities.push_back(1.0 / g);
    }
  }
  stats.stop_event_count = stats.stop_onsets.size();
  if (!densities.empty()) {
    stats.max_density = *std::max_element(densities.begin(), densities.end());
    const auto mid = densities.begin() + static_cast<std::ptrdiff_t>(densities.size() / 2);
    std::nth_element(densities.begin(), mid, densities.end());
    stats.median_density = *mid;
  }
  if (stats.min_gap <= 0) stats.max_density = std::numeric_limits<double>::infinity();
  return stats;
}

namespace {

// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Power spectrum of the mean-removed signal zero-padded to `nfft`.
std::vector<double> power_spectrum(std::span<const double> signal,
                                   std::size_t nfft) {
  const double mean =
      std::accumulate(signal.begin(), signal.end(), 0.0) /
      static_cast<double>(signal.size());
  std::vector<double> in(nfft, 0.0);
  for (std::size_t i = 0; i < signal.size(); ++i) in[i] = signal[i] - mean;
  const std::size_t nc = nfft / 2 + 1;
  auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc));
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in.data(), out,
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::vector<double> power(nc);
  for (std::size_t i = 0; i < nc; ++i) {
    power[i] = out[i][0] * out[i][0] + out[i][1] * out[i][1];
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  return power;
}

// Unnormalized autocorrelation at lags 0..n-1 via Wiener-Khinchin.
std::vector<double> autocorrelation(std::span<const double> signal) {
  const std::size_t n = signal.size();
  std::size_t nfft = 1;
  while (nfft < 2 * n) nfft <<= 1;
  std::vector<double> power = power_spectrum(signal, nfft);
  const std::size_t nc = power.size();
  auto* spec = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * nc));
  for (std::size_t i = 0; i < nc; ++i) {
    spec[i][0] = power[i];
    spec[i][1] = 0.0;
  }
  std::vector<double> acf(nfft);
  fftw_plan plan;
  {
    std::lock_guard lock(fftw_planner_mutex());
    plan = fftw_plan_dft_c2r_1d(static_cast<int>(nfft), spec, acf.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(spec);
  acf.resize(n);
  return acf;
}

}  // namespace

std::size_t autocorrelation_lag(std::span<const double> signal) {
  if (signal.size() < 3) return 1;
  const auto acf = autocorrelation(signal);
  if (!(acf[0] > 0)) return 1;
  // Values inside the white-noise band count as zero; a literal sign change
  // is unreliable when the true correlation vanishes after one step.
  const double band = 2.0 / std::sqrt(static_cast<double>(signal.size())) * acf[0];
  for (std::size_t k = 1; k < acf.size(); ++k) {
    if (acf[k] <= band) return k;
  }
  const double threshold = acf[0] / std::exp(1.0);
  for (std::size_t k = 1; k < acf.size(); ++k) {
    if (acf[k] <= threshold) return k;
  }
  return 1;
}

double dominant_period(std::span<const double> signal) {
  const std::size_t n = signal.size();
  if (n < 4) return 1.0;
  const auto power = power_spectrum(signal, n);
  std::size_t best = 0;
  double best_power = 0.0;
  for (std::size_t k = 1; k < power.size(); ++k) {
    if (power[k] > best_power) {
      best_power = power[k];
      best = k;
    }
  }
  if (best == 0) return 1.0;
  return static_cast<double>(n) / static_cast<double>(best);
}

LyapunovResult max_lyapunov(std::span<const double> signal, double sample_rate,
                            const LyapunovConfig& cfg) {
  if (!(sample_rate > 0))
    throw std::invalid_argument("sample rate must be positive");
  if (cfg.embed_dim == 0)
    throw std::invalid_argument("embedding dimension must be >= 1");
  if (signal.size() < kMinLyapunovSamples) {
    throw std::invalid_argument("series too short for exponent estimation (" +
                                std::to_string(signal.size()) + " < " +
                                std::to_string(kMinLyapunovSamples) +
                                " samples)");
  }
  const std::size_t n = signal.size();
  LyapunovResult res;
  res.embed_dim = cfg.embed_dim;
  res.fit_range.first = cfg.fit_start;
  res.fit_range.second =
      cfg.fit_end > 0
          ? cfg.fit_end
          : std::max<std::size_t>(
                1, static_cast<std::size_t>(std::lround(cfg.fit_seconds * sample_rate)));
  if (res.fit_range.first >= res.fit_range.second)
    throw std::invalid_argument("fit range must satisfy start < end");
  const std::size_t horizon = res.fit_range.second;

  const auto [lo, hi] = std::minmax_element(signal.begin(), signal.end());
  if (*hi - *lo == 0.0) {
    res.degenerate = true;
    res.lambda_max = kDegenerateLambda;
    res.diagnostic = "constant signal; divergence undefined";
    return res;
  }

  // Automatic choices are capped so that a useful neighbor pool remains.
  const std::size_t budget = n / 4;
  res.lag = cfg.lag > 0 ? cfg.lag : autocorrelation_lag(signal);
  if (cfg.lag == 0 && cfg.embed_dim > 1) {
    res.lag = std::clamp<std::size_t>(res.lag, 1, std::max<std::size_t>(1, budget / (cfg.embed_dim - 1)));
  }
  res.min_separation =
      cfg.min_separation > 0
          ? cfg.min_separation
          : std::min(budget, static_cast<std::size_t>(std::ceil(dominant_period(signal))));

  const std::size_t span = (cfg.embed_dim - 1) * res.lag;
  if (span + horizon + 2 >= n) {
    throw std::invalid_argument("series too short for the embedding and fit range");
  }
  const std::size_t m = n - span;   // embedded points
  const std::size_t usable = m - horizon;  // points that can be tracked
  const std::size_t dim = cfg.embed_dim;
  const std::size_t lag = res.lag;
  auto coord = [&](std::size_t p, std::size_t d) { return signal[p + d * lag]; };
  const double magnitude = std::max(std::abs(*lo), std::abs(*hi));
  const double floor_d2 = std::pow(cfg.noise_floor * magnitude, 2);

  // Nearest neighbors with a sweep over points sorted by first coordinate.
  std::vector<std::size_t> order(usable);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return signal[a] < signal[b];
  });
  std::vector<std::size_t> rank(usable);
  for (std::size_t r = 0; r < usable; ++r) rank[order[r]] = r;

  std::vector<std::ptrdiff_t> neighbor(usable, -1);
  std::vector<double> neighbor_dist(usable, 0.0);
  for (std::size_t p = 0; p < usable; ++p) {
    double best = std::numeric_limits<double>::infinity();
    std::ptrdiff_t best_q = -1;
    auto consider = [&](std::size_t q) {
      const std::size_t sep = p > q ? p - q : q - p;
      if (sep <= res.min_separation) return;
      double d2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = coord(p, d) - coord(q, d);
        d2 += diff * diff;
        if (d2 >= best) return;
      }
      // Pairs at or below the resolution floor carry no divergence information.
      if (d2 <= floor_d2) return;
      best = d2;
      best_q = static_cast<std::ptrdiff_t>(q);
    };
    const std::size_t r = rank[p];
    for (std::size_t up = r + 1; up < usable; ++up) {
      const double dx = signal[order[up]] - signal[p];
      if (dx * dx >= best) break;
      consider(order[up]);
    }
    for (std::size_t down = r; down-- > 0;) {
      const double dx = signal[p] - signal[order[down]];
      if (dx * dx >= best) break;
      consider(order[down]);
    }
    neighbor[p] = best_q;
    neighbor_dist[p] = std::sqrt(best);
  }

  res.divergence_curve.assign(horizon + 1, 0.0);
  std::vector<std::size_t> counts(horizon + 1, 0);
  for (std::size_t p = 0; p < usable; ++p) {
    if (neighbor[p] < 0) continue;
    ++res.pairs;
    const auto q = static_cast<std::size_t>(neighbor[p]);
    for (std::size_t i = 0; i <= horizon; ++i) {
      double d2 = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double diff = coord(p + i, d) - coord(q + i, d);
        d2 += diff * diff;
      }
      if (d2 > 0) {
        res.divergence_curve[i] += 0.5 * std::log(d2);
        ++counts[i];
      }
    }
  }
  for (std::size_t i = res.fit_range.first; i <= horizon; ++i) {
    if (counts[i] == 0) {
      res.degenerate = true;
      res.lambda_max = kDegenerateLambda;
      res.diagnostic = "no separated neighbor pairs at offset " + std::to_string(i);
      return res;
    }
  }
  for (std::size_t i = 0; i <= horizon; ++i) {
    if (counts[i] > 0) res.divergence_curve[i] /= static_cast<double>(counts[i]);
  }

  // Least-squares slope over the fit range.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  double cnt = 0;
  for (std::size_t i = res.fit_range.first; i <= res.fit_range.second; ++i) {
    const auto x = static_cast<double>(i);
    const double y = res.divergence_curve[i];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    cnt += 1;
  }
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  res.lambda_max = slope * sample_rate;
  return res;
}

}  // namespace ringsim
