#pragma once

#include <cmath>

#include "hopsim/errors.hpp"
#include "hopsim/math2d.hpp"

// Fore-aft speed template: the MBHop touchdown-velocity return map (a
// rotation-scale-rotation in Cartesian touchdown velocity) under the Raibert
// stepping controller.
namespace hopsim::foreaft {

struct ForeAftParams {
  double T_s = 0.1;         // stance duration (s), taken constant
  double rho_l = 0.105;     // leg rest length (m)
  double k_p = 0.05;        // Raibert proportional gain (rad per m/s)
  double xdot_star = 0.3;   // commanded fore-aft speed (m/s)

  void validate() const {
    if (T_s <= 0 || rho_l <= 0 || k_p < 0) throw ConfigError("fore-aft params out of range");
  }
};

// Angle swept by the leg over stance, gamma(v1) = v1*T_s/rho_l.
inline double sweep_angle(double v1, const ForeAftParams& p) {
  return v1 * p.T_s / p.rho_l;
}

// Neutral touchdown angle beta*(xdot) = gamma(xdot)/2 (zero net fore-aft
// acceleration over a stride).
inline double neutral_angle(double xdot, const ForeAftParams& p) {
  return 0.5 * sweep_angle(xdot, p);
}

// Raibert stepping controller beta(xdot) = beta*(xdot) + k_p (xdot - xdot*).
inline double raibert_touchdown_angle(double xdot, const ForeAftParams& p) {
  return neutral_angle(xdot, p) + p.k_p * (xdot - p.xdot_star);
}

// Valid touchdown set V = {v : v2 < -2 rho_l / T_s} (enough vertical speed
// for h_w to be a local diffeomorphism; rules out grazing impacts).
inline double valid_touchdown_margin(Vec2 v, const ForeAftParams& p) {
  return -v.y - 2.0 * p.rho_l / p.T_s;
}

inline bool in_valid_touchdown_set(Vec2 v, const ForeAftParams& p) {
  return valid_touchdown_margin(v, p) > 0.0;
}

// Open form of the map: v+ = R(gamma - beta) diag(1, kappa) R(-beta) v.
inline Vec2 mbhop_apply(Vec2 v, double kappa, double beta, double gamma) {
  const Vec2 w = Mat2::rotation(-beta) * v;
  return Mat2::rotation(gamma - beta) * Vec2{w.x, kappa * w.y};
}

// Closed-loop MBHop return map: beta from the Raibert controller, gamma from
// the touchdown speed. kappa is the radial velocity gain, a parameter here.
inline Vec2 mbhop_return_map(Vec2 v, double kappa, const ForeAftParams& p) {
  return mbhop_apply(v, kappa, raibert_touchdown_angle(v.x, p), sweep_angle(v.x, p));
}

// Fore-aft acceleration xdot+ - xdot produced over one stride at a given
// touchdown angle (kappa = 1); the quantity behind the Raibert observations.
inline double foreaft_acceleration(double xdot, double beta, double v2,
                                   const ForeAftParams& p) {
  const Vec2 v_next = mbhop_apply({xdot, v2}, 1.0, beta, sweep_angle(xdot, p));
  return v_next.x - xdot;
}

// The closed-loop fixed point at the commanded speed: v* = (xdot*, v2).
inline Vec2 fixed_point(double v2_td, const ForeAftParams& p) {
  return {p.xdot_star, v2_td};
}

// Jacobian of the closed-loop map at the neutral-angle fixed point:
// I - 2 k_p J v* e1^T = [1 + 2 k_p v2*, 0; -2 k_p v1*, 1], eigenvalues
// {1, 1 + 2 k_p v2*}; the unit eigenvalue is the norm-invariance direction.
inline Mat2 mbhop_jacobian_analytic(Vec2 v_star, const ForeAftParams& p) {
  return {1.0 + 2.0 * p.k_p * v_star.y, 0.0, -2.0 * p.k_p * v_star.x, 1.0};
}

}  // namespace hopsim::foreaft
