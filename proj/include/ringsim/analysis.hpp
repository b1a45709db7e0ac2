#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ringsim/integrators.hpp"

namespace ringsim {

// Per-vehicle, per-instant fundamental diagram point; q = k * v.
struct FdSample {
  double t;
  std::size_t vehicle;
  double k;  // cars/m
  double q;  // cars/s
  double v;  // m/s
};

/// 1-D Voronoi density, k_i = 1 / gap_i. Throws std::domain_error on a
/// non-positive gap.
std::vector<double> voronoi_density(std::span<const double> gaps);

/// Requires wrapped or lap-continuous positions; vehicle i follows i-1.
std::vector<FdSample> fundamental_diagram(const UniformSeries& series,
                                          double length);

struct PhasePoint {
  double t;
  double gap;  // m
  double dv;   // v_leader - v_i, m/s
};

std::vector<PhasePoint> phase_projection(const UniformSeries& series,
                                         std::size_t vehicle, double length);

// Mean speed per (instant, position bin). Cells with no vehicle are empty.
struct HeatmapGrid {
  std::vector<double> times;
  std::size_t n_bins = 0;
  double bin_width = 0;
  std::vector<std::optional<double>> cells;  // times.size() x n_bins

  const std::optional<double>& at(std::size_t ti, std::size_t bin) const {
    return cells[ti * n_bins + bin];
  }
};

HeatmapGrid heatmap_grid(const UniformSeries& series, double length,
                         std::size_t n_bins = 100);

struct StopOnset {
  double t;
  std::size_t vehicle;
};

struct FleetStats {
  std::vector<double> v_std;  // cross-fleet speed standard deviation per instant
  std::vector<StopOnset> stop_onsets;
  std::size_t stop_event_count = 0;
  double min_gap = 0;
  double max_density = 0;
  double median_density = 0;

  std::size_t stops_after(double t) const;
  std::optional<double> first_stop() const;
  double max_v_std_after(double t, const std::vector<double>& times) const;
};

/// A Stop event is the onset of v < v_stop for one vehicle (including a
/// vehicle already below the threshold at the first sample).
FleetStats fleet_stats(const UniformSeries& series, double length,
                       double v_stop = 0.1);

struct LyapunovConfig {
  std::size_t embed_dim = 3;
  std::size_t lag = 0;             // samples; 0 selects from the autocorrelation
  std::size_t min_separation = 0;  // samples; 0 selects the dominant period
  std::size_t fit_start = 0;
  std::size_t fit_end = 0;         // samples; 0 means fit_seconds * rate
  double fit_seconds = 1.0;
  // Neighbor pairs closer than this fraction of the signal's largest
  // magnitude are treated as indistinguishable.
  double noise_floor = 1e-9;
};

// Returned in place of an exponent when the divergence curve is undefined.
inline constexpr double kDegenerateLambda = -1.0e3;

struct LyapunovResult {
  double lambda_max = 0;  // 1/s
  std::size_t embed_dim = 0;
  std::size_t lag = 0;
  std::size_t min_separation = 0;
  std::pair<std::size_t, std::size_t> fit_range{0, 0};
  std::vector<double> divergence_curve;  // mean log divergence per offset
  std::size_t pairs = 0;
  bool degenerate = false;
  std::string diagnostic;
};

inline constexpr std::size_t kMinLyapunovSamples = 500;

/// Rosenstein-style largest exponent of a uniformly sampled scalar series.
LyapunovResult max_lyapunov(std::span<const double> signal, double sample_rate,
                            const LyapunovConfig& cfg = {});

/// First zero crossing of the autocorrelation, treating values within
/// 2/sqrt(n) of zero as zero (falling back to its 1/e crossing, then 1).
std::size_t autocorrelation_lag(std::span<const double> signal);

/// Period of the strongest non-DC spectral peak, in samples.
double dominant_period(std::span<const double> signal);

}  // namespace ringsim
