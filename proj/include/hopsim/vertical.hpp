#pragma once

#include <cmath>
#include <functional>

#include "hopsim/errors.hpp"
#include "hopsim/hybrid.hpp"
#include "hopsim/math2d.hpp"

// Vertical hopping template: a spring-mass-damper energized through stance by
// a phase-locked pump torque. State x = (x1, x2) = (chi, chidot/omega) where
// chi is the spring deflection (zero at touchdown and liftoff, negative in
// compression).
namespace hopsim::vertical {

struct VerticalParams {
  double omega = 10.0;          // natural frequency (rad/s)
  double damping_ratio = 0.1;   // beta-bar (the paper's Table I also calls it sigma)
  double k_t = 2.0;             // pump gain
  double eps = 0.01;            // saturation constant
  double gravity = 9.81;        // flight phase only

  void validate() const {
    if (omega <= 0 || damping_ratio < 0 || k_t < 0 || eps <= 0 || gravity < 0) {
      throw ConfigError("vertical params out of range");
    }
  }
};

// Pump torque k_t*x2/(|x|+eps); the saturated rational form of k_t*cos(angle x).
inline double tail_pump_torque(Vec2 x, const VerticalParams& p) {
  return p.k_t * x.y / (x.norm() + p.eps);
}

// Closed-loop stance field: -omega*J*x + (-2*bbar*omega + k_t/(omega(|x|+eps)))*x2*e2.
inline Vec2 vertical_stance_field(Vec2 x, const VerticalParams& p) {
  const double gain = -2.0 * p.damping_ratio * p.omega +
                      p.k_t / (p.omega * (x.norm() + p.eps));
  return {p.omega * x.y, -p.omega * x.x + gain * x.y};
}

// Radius of the attracting stance limit cycle, k_t/(2*bbar*omega^2) - eps.
// The cycle is exactly this circle: the radial rate vanishes identically on it.
inline double limit_cycle_radius(const VerticalParams& p) {
  return p.k_t / (2.0 * p.damping_ratio * p.omega * p.omega) - p.eps;
}

// Touchdown speed of the stance-map fixed point, chidot* = -omega * radius.
inline double stance_fixed_point_speed(const VerticalParams& p) {
  return -p.omega * limit_cycle_radius(p);
}

// One-mode hybrid wrapper for the stance flow: guard -x1 (stance runs while
// the deflection is negative and ends when it returns to zero).
inline HybridSystem make_stance_only_system(const VerticalParams& p) {
  HybridSystem sys;
  sys.mode_count = 1;
  sys.state_dim = 2;
  sys.field = [p](int, double, const State& x, State& dx) {
    const Vec2 d = vertical_stance_field({x[0], x[1]}, p);
    dx[0] = d.x;
    dx[1] = d.y;
  };
  sys.guard = [](int, const State& x) { return -x[0]; };
  sys.reset = [](int, const State& x) { return x; };
  return sys;
}

// Stance map F1: touchdown speed chidot < 0 to liftoff speed (positive),
// by integrating the closed loop from (0, chidot/omega) until x1 returns to 0.
inline double vertical_stance_map(double chidot_td, const VerticalParams& p,
                                  const IntegratorSettings& settings) {
  if (!(chidot_td < 0.0)) {
    throw NumericalError("vertical_stance_map: touchdown speed must be negative");
  }
  const HybridSystem sys = make_stance_only_system(p);
  // Generous horizon; the stance time is near pi/omega.
  const double t_max = 20.0 * M_PI / p.omega;
  TrajectorySegment seg =
      integrate_mode(sys, 0, {0.0, chidot_td / p.omega}, 0.0, t_max, settings);
  if (!seg.terminal_event) {
    throw NonconvergentEvent("vertical_stance_map: liftoff event not found");
  }
  return p.omega * seg.terminal_event->state[1];
}

// Duration of the same stance arc (measured, not assumed pi/omega).
inline double vertical_stance_time(double chidot_td, const VerticalParams& p,
                                   const IntegratorSettings& settings) {
  if (!(chidot_td < 0.0)) {
    throw NumericalError("vertical_stance_time: touchdown speed must be negative");
  }
  const HybridSystem sys = make_stance_only_system(p);
  TrajectorySegment seg = integrate_mode(sys, 0, {0.0, chidot_td / p.omega}, 0.0,
                                         20.0 * M_PI / p.omega, settings);
  if (!seg.terminal_event) {
    throw NonconvergentEvent("vertical_stance_time: liftoff event not found");
  }
  return seg.terminal_event->time;
}

// Velocity gain kappa = h_vg(chidot) = -F1(chidot)/chidot.
inline double velocity_gain(double chidot, const VerticalParams& p,
                            const IntegratorSettings& settings) {
  if (std::abs(chidot) < 1e-12) {
    throw NumericalError("velocity_gain: touchdown speed below numeric floor");
  }
  return -vertical_stance_map(chidot, p, settings) / chidot;
}

// Inverse of h_vg by bracketed bisection on the touchdown speed, bracket grown
// geometrically from the fixed point; tolerance 1e-10 in kappa.
inline double velocity_gain_inverse(double kappa, const VerticalParams& p,
                                    const IntegratorSettings& settings,
                                    double kappa_tol = 1e-10) {
  if (!(kappa > 0.0)) throw InversionFailure("velocity_gain_inverse: kappa must be positive");
  const double m_star = std::abs(stance_fixed_point_speed(p));
  if (!(m_star > 0.0)) {
    throw InversionFailure("velocity_gain_inverse: no interior fixed point at these gains");
  }
  auto vg_at = [&](double m) { return velocity_gain(-m, p, settings); };

  // h_vg decreases with |chidot| (pump dominates at small speeds, damping at
  // large); expand a bracket [m_lo, m_hi] with vg(m_lo) >= kappa >= vg(m_hi).
  double m_lo = m_star, m_hi = m_star;
  double v_lo = vg_at(m_lo), v_hi = v_lo;
  int grow = 0;
  while (v_lo < kappa) {
    m_lo *= 0.5;
    v_lo = vg_at(m_lo);
    if (++grow > 60) throw InversionFailure("velocity_gain_inverse: bracket expansion failed (low)");
  }
  grow = 0;
  while (v_hi > kappa) {
    m_hi *= 2.0;
    v_hi = vg_at(m_hi);
    if (++grow > 60) throw InversionFailure("velocity_gain_inverse: bracket expansion failed (high)");
  }
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (m_lo + m_hi);
    const double v = vg_at(m);
    if (std::abs(v - kappa) <= kappa_tol) return -m;
    if (v > kappa) {
      m_lo = m;
    } else {
      m_hi = m;
    }
    if (m_hi - m_lo < 1e-15 * m_star) return -0.5 * (m_lo + m_hi);
  }
  throw InversionFailure("velocity_gain_inverse: bisection did not converge");
}

// Velocity-gain return map F(kappa) = h_vg(kappa * h_vg^{-1}(kappa)); fixed
// point kappa* = 1 with |DF| < 1 under the limit-cycle hypotheses.
inline double vertical_return_map(double kappa, const VerticalParams& p,
                                  const IntegratorSettings& settings) {
  const double chidot = velocity_gain_inverse(kappa, p, settings);
  return velocity_gain(kappa * chidot, p, settings);
}

// Full vertical hopper as a two-mode hybrid system. Mode 0 (stance): state
// (chi, chidot), closed-loop spring field, exits when chi returns to 0.
// Mode 1 (flight): state (z, zdot), ballistic height above the rest length,
// exits at z = 0. Resets carry the rate across.
inline HybridSystem make_hop_system(const VerticalParams& p) {
  HybridSystem sys;
  sys.mode_count = 2;
  sys.state_dim = 2;
  sys.field = [p](int mode, double, const State& x, State& dx) {
    if (mode == 0) {
      const Vec2 d = vertical_stance_field({x[0], x[1] / p.omega}, p);
      dx[0] = d.x;
      dx[1] = p.omega * d.y;
    } else {
      dx[0] = x[1];
      dx[1] = -p.gravity;
    }
  };
  sys.guard = [](int mode, const State& x) { return mode == 0 ? -x[0] : x[0]; };
  sys.reset = [](int, const State& x) { return State{0.0, x[1]}; };
  return sys;
}

}  // namespace hopsim::vertical
