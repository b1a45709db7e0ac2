#pragma once

#include <array>
#include <stdexcept>

namespace ringsim {

// Thrown when a controller is evaluated at a non-positive gap.
class CollisionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Intelligent Driver Model coefficients. Defaults are the human-driver values
// used for every ring scenario.
struct IdmParams {
  double a = 0.73;      // max acceleration, m/s^2
  double v0 = 33.33;    // desired speed, m/s
  double delta = 4.0;   // free-road exponent
  double s0 = 2.0;      // standstill distance, m
  double T = 1.6;       // desired time gap, s
  double b = 1.67;      // comfortable deceleration, m/s^2 (positive)

  void validate() const;
};

// FollowerStopper coefficients. Construction checks that the three switching
// envelopes stay strictly ordered over the closing-speed range [-40, 0] m/s.
class FsParams {
 public:
  FsParams(double r, std::array<double, 3> omega, std::array<double, 3> alpha,
           double k_track = 1.0);

  static FsParams defaults();

  double r() const { return r_; }
  const std::array<double, 3>& omega() const { return omega_; }
  const std::array<double, 3>& alpha() const { return alpha_; }
  double k_track() const { return k_track_; }

 private:
  double r_;
  std::array<double, 3> omega_;
  std::array<double, 3> alpha_;
  double k_track_;
};

enum class FsRegion { S1 = 1, S2 = 2, S3 = 3, S4 = 4 };

// IDM. `dv` is the approach rate v_follower - v_leader (positive when closing).

double idm_desired_gap(double v, double dv, const IdmParams& p);

/// IDM acceleration a[1 - (v/v0)^delta - (s*/s)^2]. Throws CollisionError
/// when s <= 0.
double idm_accel(double s, double v, double dv, const IdmParams& p);

/// Speed at which a vehicle holding gap `s` behind an equal-speed leader has
/// zero acceleration. Returns 0 when s <= s0.
double idm_equilibrium_speed(double s, const IdmParams& p);

// FollowerStopper. Here `dv` is v_leader - v_follower, so closing is negative.

double fs_boundary(int j, double dv, const FsParams& p);
FsRegion fs_region(double dx, double dv, const FsParams& p);

/// Commanded speed in [0, r] for gap `dx`, relative speed `dv` and leader
/// speed `v_lead`.
double fs_command(double dx, double dv, double v_lead, const FsParams& p);

// First-order tracking of the commanded speed.
double fs_accel(double v, double v_cmd, const FsParams& p);

}  // namespace ringsim
