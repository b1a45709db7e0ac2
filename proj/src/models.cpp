#include "ringsim/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ringsim {

void IdmParams::validate() const {
  if (!(a > 0) || !(v0 > 0) || !(s0 > 0) || !(T >= 0) || !(b > 0) ||
      !(delta > 0)) {
    throw ParameterError(
        "IDM parameters require a, v0, s0, b, delta > 0 and T >= 0");
  }
}

FsParams::FsParams(double r, std::array<double, 3> omega,
                   std::array<double, 3> alpha, double k_track)
    : r_(r), omega_(omega), alpha_(alpha), k_track_(k_track) {
  if (!(r > 0)) throw ParameterError("FollowerStopper r must be positive");
  if (!(k_track > 0))
    throw ParameterError("FollowerStopper k_track must be positive");
  if (!(omega[0] > 0 && omega[0] < omega[1] && omega[1] < omega[2]))
    throw ParameterError("FollowerStopper requires 0 < omega1 < omega2 < omega3");
  for (double a : alpha) {
    if (!(a > 0)) throw ParameterError("FollowerStopper alphas must be positive");
  }
  constexpr int kGrid = 1000;
  constexpr double kMinDv = -40.0;
  for (int i = 0; i < kGrid; ++i) {
    const double dv = kMinDv * static_cast<double>(i) / (kGrid - 1);
    const double d1 = fs_boundary(1, dv, *this);
    const double d2 = fs_boundary(2, dv, *this);
    const double d3 = fs_boundary(3, dv, *this);
    if (!(d1 < d2 && d2 < d3)) {
      throw ParameterError("FollowerStopper envelopes cross at dv = " +
                           std::to_string(dv));
    }
  }
}

FsParams FsParams::defaults() {
  return FsParams(4.75, {2.25, 3.0, 4.5}, {1.0, 0.7, 0.5}, 1.0);
}

double idm_desired_gap(double v, double dv, const IdmParams& p) {
  return p.s0 + v * p.T + v * dv / (2.0 * std::sqrt(p.a * p.b));
}

double idm_accel(double s, double v, double dv, const IdmParams& p) {
  if (!(s > 0)) {
    throw CollisionError("IDM evaluated at non-positive gap " +
                         std::to_string(s));
  }
  const double s_star = idm_desired_gap(v, dv, p);
  const double interaction = s_star / s;
  return p.a * (1.0 - std::pow(v / p.v0, p.delta) - interaction * interaction);
}

double idm_equilibrium_speed(double s, const IdmParams& p) {
  if (!(s > p.s0)) return 0.0;
  // accel(v) is strictly decreasing on [0, v0]: positive at 0, <= 0 at v0.
  double lo = 0.0;
  double hi = p.v0;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double acc = idm_accel(s, mid, 0.0, p);
    if (std::abs(acc) < 1e-12) return mid;
    if (acc > 0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4 * std::numeric_limits<double>::epsilon() * p.v0) break;
  }
  return 0.5 * (lo + hi);
}

double fs_boundary(int j, double dv, const FsParams& p) {
  if (j < 1 || j > 3) throw std::out_of_range("envelope index must be 1..3");
  const double closing = std::min(0.0, dv);
  const auto k = static_cast<std::size_t>(j - 1);
  return p.omega()[k] + closing * closing / (2.0 * p.alpha()[k]);
}

FsRegion fs_region(double dx, double dv, const FsParams& p) {
  if (!(dx > 0)) {
    throw CollisionError("FollowerStopper evaluated at non-positive gap " +
                         std::to_string(dx));
  }
  if (dx <= fs_boundary(1, dv, p)) return FsRegion::S1;
  if (dx <= fs_boundary(2, dv, p)) return FsRegion::S2;
  if (dx <= fs_boundary(3, dv, p)) return FsRegion::S3;
  return FsRegion::S4;
}

double fs_command(double dx, double dv, double v_lead, const FsParams& p) {
  const double r = p.r();
  const double v_hat = std::min(std::max(v_lead, 0.0), r);
  const double d1 = fs_boundary(1, dv, p);
  const double d2 = fs_boundary(2, dv, p);
  const double d3 = fs_boundary(3, dv, p);
  switch (fs_region(dx, dv, p)) {
    case FsRegion::S1:
      return 0.0;
    case FsRegion::S2:
      return v_hat * (dx - d1) / (d2 - d1);
    case FsRegion::S3:
      return v_hat + (r - v_hat) * (dx - d2) / (d3 - d2);
    case FsRegion::S4:
      break;
  }
  return r;
}

double fs_accel(double v, double v_cmd, const FsParams& p) {
  return p.k_track() * (v_cmd - v);
}

}  // namespace ringsim
