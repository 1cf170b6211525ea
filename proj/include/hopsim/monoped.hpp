#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "hopsim/attitude.hpp"
#include "hopsim/errors.hpp"
#include "hopsim/foreaft.hpp"
#include "hopsim/hybrid.hpp"
#include "hopsim/math2d.hpp"
#include "hopsim/slip.hpp"
#include "hopsim/vertical.hpp"

// Planar tailed monoped under the light-tail reduced equations of motion:
// massless hip-actuated leg (th1 relative to the body, th2 prismatic against
// the shank spring), rigid body (x, z, phi1), point-mass tail (phi2, relative
// to the body) driven at the hip-coincident pivot. State layout (12):
//   [th1, th2, x, z, phi1, phi2, dth1, dth2, dx, dz, dphi1, dphi2]
namespace hopsim::monoped {

using attitude::AttitudeParams;
using foreaft::ForeAftParams;
using vertical::VerticalParams;

struct BodyParams {
  double m_b = 2.419;    // body mass (kg), with battery
  double i_b = 0.02;     // body pitch inertia (kg m^2)
  double m_t = 0.150;    // tail mass (kg); reduced dynamics drop it (m_t << m_b)
  double i_t = 0.0135;   // tail inertia (kg m^2). Treated independently of
                         // m_t*rho_t^2 even though a point-mass tail cannot
                         // realize a large i_t with a small m_t.
  double rho_l = 0.105;  // leg rest length (m)
  double rho_t = 0.3;    // tail length (m)
  double k_s = 2387.4573046235158;  // leg spring (N/m), m_b*(10*pi)^2
  double gravity = 9.81;

  // Controller-side inertia model used to form the attitude coordinates from
  // measured (phi, dphi); <= 0 means "use the plant values".
  double ctrl_i_b = -1.0;
  double ctrl_i_t = -1.0;

  VerticalParams vertical{31.41592653589793, 0.2, 318.0, 0.005, 9.81};
  ForeAftParams foreaft{0.1, 0.105, 0.003, 0.3};
  AttitudeParams attitude{2.0, 200.0, 31.41592653589793, 0.05, 0.05};

  bool small_angle_guard = false;
  bool stance_gravity = false;
  double leg_servo_omega = 40.0;
  double min_transition_time = 0.08;  // shortest feasible stance, for the
                                      // coupled-clock gain-bound report

  double stance_damping() const {
    return 2.0 * vertical.damping_ratio * vertical.omega;
  }
  double ctrl_ib() const { return ctrl_i_b > 0 ? ctrl_i_b : i_b; }
  double ctrl_it() const { return ctrl_i_t > 0 ? ctrl_i_t : i_t; }

  void validate() const {
    if (m_b <= 0 || i_b <= 0 || m_t <= 0 || i_t <= 0 || rho_l <= 0 || rho_t <= 0 ||
        k_s <= 0 || gravity < 0 || leg_servo_omega <= 0 || min_transition_time <= 0) {
      throw ConfigError("monoped params out of range");
    }
    vertical.validate();
    foreaft.validate();
    attitude.validate();
    if (foreaft.rho_l != rho_l) throw ConfigError("monoped: foreaft.rho_l must equal rho_l");
  }
};

inline constexpr int kStance = 0;
inline constexpr int kFlight = 1;

// Constant attitude inertia block M2 = [i_b+i_t, i_t; i_t, i_t].
inline Mat2 attitude_inertia(double ib, double it) {
  return {ib + it, it, it, it};
}

// Linear coordinate change h^{-1}: q -> (s, a) with s = (th1+phi1, th2, x, z)
// the SLIP-like chart and a = M2 (phi1, phi2) the decoupled attitude chart.
struct TemplateCoords {
  std::array<double, 4> s{};   // (s1, th2, x, z)
  Vec2 a;
};

inline TemplateCoords coord_change(const std::array<double, 6>& q, const BodyParams& p) {
  const Mat2 m2 = attitude_inertia(p.i_b, p.i_t);
  if (std::abs(m2.det()) < 1e-300) throw SingularM2("coord_change: M2 is singular");
  TemplateCoords y;
  y.s = {q[0] + q[4], q[1], q[2], q[3]};
  y.a = m2 * Vec2{q[4], q[5]};
  return y;
}

inline std::array<double, 6> coord_change_inverse(const TemplateCoords& y,
                                                  const BodyParams& p) {
  const Mat2 m2 = attitude_inertia(p.i_b, p.i_t);
  if (std::abs(m2.det()) < 1e-300) throw SingularM2("coord_change_inverse: M2 is singular");
  const Vec2 phi = m2.inverse() * y.a;
  return {y.s[0] - phi.x, y.s[1], y.s[2], y.s[3], phi.x, phi.y};
}

// SLIP-chart projection of a full state: [s1, th2, x, z, ds1, dth2, dx, dz].
inline State project_slip(const State& q) {
  return {q[0] + q[4], q[1], q[2], q[3], q[6] + q[10], q[7], q[8], q[9]};
}

struct Accel6 {
  double ddth1, ddth2, ddx, ddz, ddphi1, ddphi2;
};

// Reduced stance dynamics: polar rows for the absolute leg chart (s1, th2)
// with the tail reaction term along the tail-leg angle xi = th1 - phi2, and
// the decoupled attitude rows a'' = (-tau_h, tau_t).
inline Accel6 stance_dynamics(const State& q, double tau_h, double tau_t,
                              const BodyParams& p) {
  const double th1 = q[0], th2 = q[1], phi1 = q[4], phi2 = q[5];
  const double dth1 = q[6], dth2 = q[7], dphi1 = q[10];
  if (th2 <= 0.0) throw NumericalError("monoped stance: leg length must stay positive");
  const double s1 = th1 + phi1;
  const double ds1 = dth1 + dphi1;
  const double xi = th1 - phi2;
  const double tail = tau_t / (p.rho_t * p.m_b);

  double dds1 = tau_h / (p.m_b * th2 * th2) - 2.0 * dth2 * ds1 / th2 +
                tail * std::sin(xi) / th2;
  double ddth2 = p.k_s * (p.rho_l - th2) / p.m_b + th2 * ds1 * ds1 -
                 p.stance_damping() * dth2 - tail * std::cos(xi);
  if (p.stance_gravity) {
    dds1 += p.gravity * std::sin(s1) / th2;
    ddth2 -= p.gravity * std::cos(s1);
  }

  const Mat2 m2 = attitude_inertia(p.i_b, p.i_t);
  const Vec2 ddphi = m2.inverse() * Vec2{-tau_h, tau_t};

  const double sn = std::sin(s1), cs = std::cos(s1);
  Accel6 a;
  a.ddphi1 = ddphi.x;
  a.ddphi2 = ddphi.y;
  a.ddth1 = dds1 - ddphi.x;
  a.ddth2 = ddth2;
  a.ddx = -ddth2 * sn - 2.0 * ds1 * dth2 * cs + th2 * ds1 * ds1 * sn - th2 * dds1 * cs;
  a.ddz = ddth2 * cs - 2.0 * ds1 * dth2 * sn - th2 * ds1 * ds1 * cs - th2 * dds1 * sn;
  return a;
}

// Reduced flight dynamics: ballistic mass center plus the tail reaction along
// the absolute tail angle; attitude rows a'' = (0, tau_t); the massless leg
// tracks the touchdown command.
inline Accel6 flight_dynamics(const State& q, double tau_t, const BodyParams& p) {
  const double phi1 = q[4], phi2 = q[5];
  const double tail = tau_t / (p.rho_t * p.m_b);
  const Mat2 m2 = attitude_inertia(p.i_b, p.i_t);
  const Vec2 ddphi = m2.inverse() * Vec2{0.0, tau_t};

  const double beta_cmd = foreaft::raibert_touchdown_angle(q[8], p.foreaft);
  const double ws = p.leg_servo_omega;
  const double s1 = q[0] + q[4];
  const double ds1 = q[6] + q[10];
  const double dds1 = ws * ws * (beta_cmd - s1) - 2.0 * ws * ds1;

  Accel6 a;
  a.ddx = tail * std::sin(phi1 + phi2);
  a.ddz = -p.gravity - tail * std::cos(phi1 + phi2);
  a.ddphi1 = ddphi.x;
  a.ddphi2 = ddphi.y;
  a.ddth1 = dds1 - ddphi.x;
  a.ddth2 = 0.0;
  return a;
}

struct Torques {
  double tau_h = 0.0;
  double tau_t = 0.0;
};

// Parallel playback of the decoupled template laws, scaled per the actuator
// affordances: stance hip does pitch correction, stance tail pumps the shank
// spring, flight tail reorients the shape, flight hip only positions the
// massless leg (no reaction torque on the body).
inline Torques controller_playback(const State& q, int mode, const BodyParams& p) {
  const Mat2 m2_hat = attitude_inertia(p.ctrl_ib(), p.ctrl_it());
  const Vec2 a_hat = m2_hat * Vec2{q[4], q[5]};
  const Vec2 da_hat = m2_hat * Vec2{q[10], q[11]};

  Torques u;
  if (mode == kStance) {
    u.tau_h = -attitude::graph_error_accel(a_hat.x, da_hat.x, p.attitude);
    const double g1v = vertical::tail_pump_torque(
        {q[1] - p.rho_l, q[7] / p.vertical.omega}, p.vertical);
    u.tau_t = -p.rho_t * q[1] * p.m_b * g1v;
  } else {
    u.tau_h = 0.0;
    u.tau_t = attitude::graph_error_accel(a_hat.y, da_hat.y, p.attitude);
  }
  return u;
}

inline double monoped_guard(int mode, const State& q, const BodyParams& p) {
  if (mode == kStance) {
    const double s1 = q[0] + q[4];
    return p.small_angle_guard ? p.rho_l - q[1] * std::cos(s1) : p.rho_l - q[1];
  }
  const double z_td = p.small_angle_guard
                          ? p.rho_l
                          : p.rho_l * std::cos(foreaft::raibert_touchdown_angle(q[8], p.foreaft));
  return q[3] - z_td;
}

inline State monoped_liftoff_reset(const State& q, const BodyParams& p) {
  State r = q;
  r[1] = p.rho_l;
  r[7] = 0.0;
  return r;
}

inline State monoped_touchdown_reset(const State& q, const BodyParams& p) {
  const Vec2 v{q[8], q[9]};
  if (!foreaft::in_valid_touchdown_set(v, p.foreaft)) {
    throw InvalidTouchdown("monoped touchdown velocity outside V (v2 = " +
                           std::to_string(v.y) + ")");
  }
  const double beta = foreaft::raibert_touchdown_angle(v.x, p.foreaft);
  const double z = q[3];
  const Vec2 u{-z * std::tan(beta), z};
  const Vec2 pol = slip::polar_of_cart(u);
  const Vec2 dpolar = slip::dpol(u, v);
  State r = q;
  r[0] = pol.x - q[4];         // s1 = beta, leg chart is body-relative
  r[1] = pol.y;
  r[6] = dpolar.x - q[10];
  r[7] = dpolar.y;
  return r;
}

inline HybridSystem make_monoped_system(const BodyParams& p) {
  p.validate();
  HybridSystem sys;
  sys.mode_count = 2;
  sys.state_dim = 12;
  sys.field = [p](int mode, double, const State& q, State& dq) {
    const Torques u = controller_playback(q, mode, p);
    const Accel6 a = (mode == kStance) ? stance_dynamics(q, u.tau_h, u.tau_t, p)
                                       : flight_dynamics(q, u.tau_t, p);
    dq[0] = q[6];
    dq[1] = q[7];
    dq[2] = q[8];
    dq[3] = q[9];
    dq[4] = q[10];
    dq[5] = q[11];
    dq[6] = a.ddth1;
    dq[7] = a.ddth2;
    dq[8] = a.ddx;
    dq[9] = a.ddz;
    dq[10] = a.ddphi1;
    dq[11] = a.ddphi2;
  };
  sys.guard = [p](int mode, const State& q) { return monoped_guard(mode, q, p); };
  sys.reset = [p](int mode, const State& q) {
    return mode == kStance ? monoped_liftoff_reset(q, p) : monoped_touchdown_reset(q, p);
  };
  return sys;
}

// Post-touchdown stance state on the section with touchdown velocity v and
// attitude (phi, dphi); phi defaults to the invariant submanifold.
inline State monoped_touchdown_state(Vec2 v, const BodyParams& p, double x0 = 0.0,
                                     Vec2 phi = {}, Vec2 dphi = {}) {
  const double beta = foreaft::raibert_touchdown_angle(v.x, p.foreaft);
  const double z = p.small_angle_guard ? p.rho_l : p.rho_l * std::cos(beta);
  State flight{0.0, p.rho_l, x0, z, phi.x, phi.y, 0.0, 0.0, v.x, v.y, dphi.x, dphi.y};
  return monoped_touchdown_reset(flight, p);
}

inline HybridExecution monoped_execute(const State& init, const BodyParams& p,
                                       int n_strides, const IntegratorSettings& settings,
                                       int mode0 = kStance) {
  const HybridSystem sys = make_monoped_system(p);
  return execute(sys, mode0, init, StopCondition::transitions(2 * n_strides), settings);
}

// The SLIP template the monoped reduces to on the invariant submanifold:
// unit-mass spring constant k_s/m_b, same leg, same playback gains.
inline slip::SlipParams matched_slip_params(const BodyParams& p) {
  slip::SlipParams sp;
  sp.k_s = p.k_s / p.m_b;
  sp.rho_l = p.rho_l;
  sp.gravity = p.gravity;
  sp.vertical = p.vertical;
  sp.foreaft = p.foreaft;
  sp.foreaft.rho_l = p.rho_l;
  sp.small_angle_guard = p.small_angle_guard;
  sp.stance_gravity = p.stance_gravity;
  sp.leg_servo_omega = p.leg_servo_omega;
  return sp;
}

struct InvarianceReport {
  double max_attitude_deviation = 0.0;  // sup |(phi1, phi2, dphi1, dphi2)|_inf
  double slip_projection_error = 0.0;   // sup-norm gap to the standalone SLIP run
  int strides = 0;
  bool segments_aligned = true;
};

namespace detail {

// Cubic Hermite evaluation of a trajectory segment at time t (clamped to the
// segment's span); derivatives from the closed-loop field.
inline State hermite_sample(const TrajectorySegment& seg, const HybridSystem& sys,
                            double t) {
  const auto& ts = seg.times;
  const auto& xs = seg.states;
  if (t <= ts.front()) return xs.front();
  if (t >= ts.back()) return xs.back();
  std::size_t hi = 1;
  while (ts[hi] < t) ++hi;
  const std::size_t lo = hi - 1;
  const double h = ts[hi] - ts[lo];
  const double u = (t - ts[lo]) / h;
  State f0(xs[lo].size()), f1(xs[lo].size());
  sys.field(seg.mode, ts[lo], xs[lo], f0);
  sys.field(seg.mode, ts[hi], xs[hi], f1);
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  State out(xs[lo].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = h00 * xs[lo][i] + h10 * h * f0[i] + h01 * xs[hi][i] + h11 * h * f1[i];
  }
  return out;
}

}  // namespace detail

// Run the closed-loop monoped from an initial condition on the invariant
// submanifold and measure (a) how far the attitude coordinates drift and
// (b) the sup-norm gap between the SLIP-chart projection and a standalone
// SLIP execution started from the projected initial condition.
inline InvarianceReport invariance_check(const State& init, const BodyParams& p,
                                         int n_strides, const IntegratorSettings& settings) {
  InvarianceReport rep;
  rep.strides = n_strides;

  const HybridSystem msys = make_monoped_system(p);
  const HybridExecution mex =
      execute(msys, kStance, init, StopCondition::transitions(2 * n_strides), settings);

  const slip::SlipParams sp = matched_slip_params(p);
  const HybridSystem ssys = slip::make_slip_system(sp, true);
  const HybridExecution sex = execute(ssys, slip::kStance, project_slip(init),
                                      StopCondition::transitions(2 * n_strides), settings);

  rep.segments_aligned = mex.segments.size() == sex.segments.size();
  const std::size_t nseg = std::min(mex.segments.size(), sex.segments.size());
  for (std::size_t k = 0; k < nseg; ++k) {
    const auto& mseg = mex.segments[k];
    const auto& sseg = sex.segments[k];
    for (std::size_t i = 0; i < mseg.times.size(); ++i) {
      const State& q = mseg.states[i];
      for (int j : {4, 5, 10, 11}) {
        rep.max_attitude_deviation = std::max(rep.max_attitude_deviation, std::abs(q[j]));
      }
      const State proj = project_slip(q);
      const State ref = detail::hermite_sample(sseg, ssys, mseg.times[i]);
      for (std::size_t j = 0; j < 8; ++j) {
        rep.slip_projection_error =
            std::max(rep.slip_projection_error, std::abs(proj[j] - ref[j]));
      }
    }
  }
  return rep;
}

// Extreme-parameter regime used by the invariance check: the spec ratios
// m_t/m_b = 1e-6 and i_t/i_b = 1e6, with the absolute inertia scale pushed up
// so both inertias approximate the infinite-inertia idealization; controller
// inertia model pinned at the nominal values.
inline BodyParams invariance_limit_params(const BodyParams& base) {
  BodyParams p = base;
  p.ctrl_i_b = base.ctrl_ib();
  p.ctrl_i_t = base.ctrl_it();
  p.m_t = base.m_b * 1e-6;
  p.i_b = 1e10;
  p.i_t = 1e16;
  return p;
}

// Mechanical energy audited in closed-loop stance: leg spring plus
// mass-center kinetic energy.
inline double stance_energy(const State& q, const BodyParams& p) {
  const double v2 = q[8] * q[8] + q[9] * q[9];
  const double defl = p.rho_l - q[1];
  return 0.5 * p.m_b * v2 + 0.5 * p.k_s * defl * defl;
}

// Rate of change of stance_energy predicted from the applied torques (tail
// reaction power plus hip sweep power plus damper dissipation); used to audit
// the field algebra along trajectories.
inline double stance_power(const State& q, double tau_h, double tau_t,
                           const BodyParams& p) {
  const double th2 = q[1];
  const double ds1 = q[6] + q[10];
  const double dth2 = q[7];
  const double xi = q[0] - q[5];
  const double tail = tau_t / (p.rho_t * p.m_b);
  // Polar input rows: dds1 += tail sin(xi)/th2 + tau_h/(m th2^2); ddth2 += -tail cos(xi).
  const double p_tail = p.m_b * (tail * std::sin(xi) * th2 * ds1 - tail * std::cos(xi) * dth2);
  const double p_hip = tau_h * ds1;
  const double p_damp = -p.m_b * p.stance_damping() * dth2 * dth2;
  double pw = p_tail + p_hip + p_damp;
  if (p.stance_gravity) pw -= p.m_b * p.gravity * q[9];
  return pw;
}

inline std::vector<std::string> state_names() {
  return {"th1", "th2", "x",  "z",  "phi1",  "phi2",
          "dth1", "dth2", "dx", "dz", "dphi1", "dphi2"};
}

}  // namespace hopsim::monoped
