#pragma once

#include <cmath>
#include <vector>

#include "hopsim/attitude.hpp"
#include "hopsim/errors.hpp"
#include "hopsim/hybrid.hpp"
#include "hopsim/math2d.hpp"

// Hybrid inertial reorientation: pitch (a1) actuated in stance, shape (a2) in
// flight, mode switching by an exogenous clock psi_a at rate omega_a (stance
// for psi in [0, pi], flight for (pi, 2pi]). The unactuated shape picks up an
// integrated disturbance delta-bar per stance.
namespace hopsim::hir {

using attitude::AttitudeParams;
using attitude::graph_error_accel;

// State layout: [a1, a2, da1, da2, psi].
struct HirState {
  double a1 = 0, a2 = 0, da1 = 0, da2 = 0, psi = 0;
};

struct DisturbanceModel {
  enum class Kind { Zero, ConstantPerStance, WorstCase, Sequence };
  Kind kind = Kind::Zero;
  double value = 0.0;              // ConstantPerStance: delta-bar each stride
  std::vector<double> sequence;    // Sequence: delta-bar per stride

  // Integrated disturbance over the stance of the given stride.
  double bar(int stride, const AttitudeParams& p) const {
    switch (kind) {
      case Kind::Zero: return 0.0;
      case Kind::ConstantPerStance: return value;
      case Kind::WorstCase: return p.delta_bar_max;
      case Kind::Sequence:
        return sequence.empty() ? 0.0
                                : sequence[static_cast<std::size_t>(stride) % sequence.size()];
    }
    return 0.0;
  }

  static DisturbanceModel zero() { return {}; }
  static DisturbanceModel worst_case() { return {Kind::WorstCase, 0.0, {}}; }
  static DisturbanceModel constant(double bar) { return {Kind::ConstantPerStance, bar, {}}; }
};

// Closed-loop field of the clocked system; delta_inst is the instantaneous
// shape disturbance (rad/s^2), active in stance only.
inline void hir_field(int mode, const State& x, const AttitudeParams& p,
                      double delta_inst, State& dx) {
  dx[0] = x[2];
  dx[1] = x[3];
  if (mode == 0) {  // stance: pitch actuated, shape disturbed
    dx[2] = graph_error_accel(x[0], x[2], p);
    dx[3] = delta_inst;
  } else {  // flight: pitch ballistic, shape actuated
    dx[2] = 0.0;
    dx[3] = graph_error_accel(x[1], x[3], p);
  }
  dx[4] = p.omega_a;
}

// zeta = e^{-k pi / omega_a} (1 - k pi / omega_a): per-stride contraction of
// the touchdown return map in the high-k_g limit.
inline double hir_zeta(const AttitudeParams& p) {
  const double kT = p.k * M_PI / p.omega_a;
  return std::exp(-kT) * (1.0 - kT);
}

// Touchdown return map F(a) = zeta * (a + delta_bar * e2); closed form,
// no integration.
inline Vec2 hir_return_map(Vec2 a, double delta_bar, const AttitudeParams& p) {
  const double z = hir_zeta(p);
  return {z * a.x, z * (a.y + delta_bar)};
}

// Sufficient gain bound of the stability proposition:
// k > (2 omega_a / pi) log(1 + delta_bar_max / eps_a).
inline double required_gain_bound(const AttitudeParams& p) {
  if (p.eps_a <= 0) throw ConfigError("required_gain_bound: eps_a must be positive");
  return (2.0 * p.omega_a / M_PI) * std::log(1.0 + p.delta_bar_max / p.eps_a);
}

// Geometric-series bound on the iterates:
// |a[n]| <= |zeta|^n |a[0]| + delta_bar_max |zeta/(1-zeta)|.
inline double hir_triangle_bound(double a0_norm, int n, const AttitudeParams& p) {
  const double z = hir_zeta(p);
  return std::pow(std::abs(z), n) * a0_norm +
         p.delta_bar_max * std::abs(z / (1.0 - z));
}

struct HirSimResult {
  std::vector<Vec2> a_at_touchdown;   // a[0..n], snapshot at each stance entry
  std::vector<double> delta_bars;     // realized per-stance integrals
  HybridExecution execution;          // full clocked trajectory
};

// Integrate the clocked hybrid system for n strides, starting at touchdown
// (psi = 0) with rates on the reference graph (da_i = -k a_i). The default
// disturbance realization spreads delta-bar uniformly over the stance:
// delta(t) = delta_bar * omega_a / pi.
inline HirSimResult hir_simulate(Vec2 a0, const AttitudeParams& p,
                                 const DisturbanceModel& dist, int n_strides,
                                 const IntegratorSettings& settings) {
  p.validate();
  HirSimResult out;
  State x{a0.x, a0.y, -p.k * a0.x, -p.k * a0.y, 0.0};
  out.a_at_touchdown.push_back(a0);
  double t = 0.0;

  HybridSystem sys;
  sys.mode_count = 2;
  sys.state_dim = 5;
  sys.guard = [](int mode, const State& s) {
    return mode == 0 ? (M_PI - s[4]) : (2.0 * M_PI - s[4]);
  };
  sys.reset = [](int mode, const State& s) {
    State r = s;
    if (mode == 1) r[4] = 0.0;  // wrap the clock at flight exit
    return r;
  };

  for (int stride = 0; stride < n_strides; ++stride) {
    const double bar = dist.bar(stride, p);
    out.delta_bars.push_back(bar);
    const double delta_inst = bar * p.omega_a / M_PI;

    sys.field = [&p, delta_inst](int mode, double, const State& s, State& dx) {
      hir_field(mode, s, p, delta_inst, dx);
    };
    for (int mode = 0; mode < 2; ++mode) {
      TrajectorySegment seg =
          integrate_mode(sys, mode, x, t, t + 4.0 * M_PI / p.omega_a, settings);
      if (!seg.terminal_event) {
        throw NonconvergentEvent("hir_simulate: clock event not found");
      }
      x = sys.reset(mode, seg.terminal_event->state);
      t = seg.terminal_event->time;
      out.execution.segments.push_back(std::move(seg));
      out.execution.transition_count += 1;
    }
    out.a_at_touchdown.push_back({x[0], x[1]});
  }
  out.execution.final_mode = 0;
  out.execution.final_state = x;
  out.execution.final_time = t;
  return out;
}

}  // namespace hopsim::hir
