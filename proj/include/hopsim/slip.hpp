#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <utility>

#include "hopsim/analysis.hpp"
#include "hopsim/errors.hpp"
#include "hopsim/foreaft.hpp"
#include "hopsim/hybrid.hpp"
#include "hopsim/math2d.hpp"
#include "hopsim/vertical.hpp"

// The 2DOF SLIP template: a unit-mass bead on a massless springy leg, pinned
// in stance, ballistic in flight. State layout (8):
//   [th1, th2, x, z, dth1, dth2, dx, dz]
// th1 is the leg angle from vertical (positive toe-forward), th2 the leg
// length; (x, z) the absolute bead position. In stance the Cartesian rows are
// the chain-rule image of the polar rows, so the pin constraint is preserved
// to integrator accuracy.
namespace hopsim::slip {

using foreaft::ForeAftParams;
using vertical::VerticalParams;

struct SlipParams {
  double k_s = 986.9604401089358;  // spring constant per unit mass ((10*pi)^2)
  double rho_l = 0.105;            // rest length (m)
  double gravity = 9.81;
  VerticalParams vertical{31.41592653589793, 0.2, 318.0, 0.005, 9.81};
  ForeAftParams foreaft{0.1, 0.105, 0.003, 0.3};
  bool small_angle_guard = false;  // reproduce the z - rho_l guard convenience
  bool stance_gravity = false;     // quantify the gravity-free stance approximation
  double leg_servo_omega = 40.0;   // flight leg-angle tracking bandwidth (rad/s)

  // Leg-shank viscous damping (the radial template's dissipation, carried by
  // the physical leg). Zero damping_ratio gives the conservative plant.
  double stance_damping() const {
    return 2.0 * vertical.damping_ratio * vertical.omega;
  }

  void validate() const {
    if (k_s <= 0 || rho_l <= 0 || gravity < 0 || leg_servo_omega <= 0) {
      throw ConfigError("slip params out of range");
    }
    vertical.validate();
    foreaft.validate();
    if (foreaft.rho_l != rho_l) throw ConfigError("slip: foreaft.rho_l must equal rho_l");
  }
};

struct SlipInput {
  double tangential = 0.0;  // angular acceleration on th1''
  double radial = 0.0;      // radial force per unit mass on th2''
};

inline constexpr int kStance = 0;
inline constexpr int kFlight = 1;

// Polar chart of the pinned leg: Cart(th) = th2 * (-sin th1, cos th1) is the
// bead position relative to the toe.
inline Vec2 cart_of_polar(double th1, double th2) {
  return {-th2 * std::sin(th1), th2 * std::cos(th1)};
}

inline Vec2 polar_of_cart(Vec2 u) {
  return {std::atan2(-u.x, u.y), u.norm()};
}

// Velocity images of the chart and its inverse.
inline Vec2 dcart(double th1, double th2, double dth1, double dth2) {
  return {-dth2 * std::sin(th1) - th2 * std::cos(th1) * dth1,
          dth2 * std::cos(th1) - th2 * std::sin(th1) * dth1};
}

inline Vec2 dpol(Vec2 u, Vec2 du) {
  const double r2 = dot(u, u);
  return {(-du.x * u.y + u.x * du.y) / r2, dot(u, du) / std::sqrt(r2)};
}

// Stance plant: polar rows plus the constrained mass-center rows.
inline void slip_stance_field(const State& s, const SlipInput& u, const SlipParams& p,
                              State& ds) {
  const double th1 = s[0], th2 = s[1], dth1 = s[4], dth2 = s[5];
  if (th2 <= 0.0) throw NumericalError("slip stance: leg length must stay positive");
  const double sn = std::sin(th1), cs = std::cos(th1);

  double ddth1 = -2.0 * dth1 * dth2 / th2 + u.tangential;
  double ddth2 = th2 * dth1 * dth1 + p.k_s * (p.rho_l - th2) -
                 p.stance_damping() * dth2 + u.radial;
  if (p.stance_gravity) {
    ddth1 += p.gravity * sn / th2;
    ddth2 -= p.gravity * cs;
  }

  ds[0] = dth1;
  ds[1] = dth2;
  ds[2] = s[6];
  ds[3] = s[7];
  ds[4] = ddth1;
  ds[5] = ddth2;
  ds[6] = -ddth2 * sn - 2.0 * dth1 * dth2 * cs + th2 * dth1 * dth1 * sn - th2 * ddth1 * cs;
  ds[7] = ddth2 * cs - 2.0 * dth1 * dth2 * sn - th2 * dth1 * dth1 * cs - th2 * ddth1 * sn;
}

// Flight plant: ballistic mass center; the massless leg has no dynamics of its
// own, so the length is held and the angle tracks the touchdown command with a
// critically damped servo.
inline void slip_flight_field(const State& s, const SlipParams& p, State& ds) {
  const double beta_cmd = foreaft::raibert_touchdown_angle(s[6], p.foreaft);
  const double ws = p.leg_servo_omega;
  ds[0] = s[4];
  ds[1] = 0.0;
  ds[2] = s[6];
  ds[3] = s[7];
  ds[4] = ws * ws * (beta_cmd - s[0]) - 2.0 * ws * s[4];
  ds[5] = 0.0;
  ds[6] = 0.0;
  ds[7] = -p.gravity;
}

// Table II playback in stance: the pump torque enters through the leg frame
// exactly as the tail reaction does in the anchoring body (radial
// th2*cos(th1)*g1v, tangential leak -sin(th1)*g1v).
inline SlipInput playback_stance_input(const State& s, const SlipParams& p) {
  const double g1v =
      vertical::tail_pump_torque({s[1] - p.rho_l, s[5] / p.vertical.omega}, p.vertical);
  return {-g1v * std::sin(s[0]), s[1] * std::cos(s[0]) * g1v};
}

inline double slip_guard(int mode, const State& s, const SlipParams& p) {
  if (mode == kStance) {
    return p.small_angle_guard ? p.rho_l - s[1] * std::cos(s[0]) : p.rho_l - s[1];
  }
  const double z_td = p.small_angle_guard
                          ? p.rho_l
                          : p.rho_l * std::cos(foreaft::raibert_touchdown_angle(s[6], p.foreaft));
  return s[3] - z_td;
}

// Liftoff r1: position and velocity are already Cartesian-continuous; the
// freed massless leg recoils to rest length and hands the angle to the servo.
inline State liftoff_reset(const State& s, const SlipParams& p) {
  State r = s;
  r[1] = p.rho_l;
  r[5] = 0.0;
  return r;
}

// Touchdown r2: place the toe at (-z tan(beta), z) relative to the bead,
// assign the polar chart and its velocity image. Touchdown velocity must lie
// in the valid set V.
inline State touchdown_reset(const State& s, const SlipParams& p) {
  const Vec2 v{s[6], s[7]};
  if (!foreaft::in_valid_touchdown_set(v, p.foreaft)) {
    throw InvalidTouchdown("touchdown velocity outside V (v2 = " + std::to_string(v.y) +
                           ", need < " + std::to_string(-2.0 * p.rho_l / p.foreaft.T_s) + ")");
  }
  const double beta = foreaft::raibert_touchdown_angle(v.x, p.foreaft);
  const double z = s[3];
  const Vec2 u{-z * std::tan(beta), z};
  const Vec2 pol = polar_of_cart(u);
  const Vec2 dpolar = dpol(u, v);
  State r = s;
  r[0] = pol.x;
  r[1] = pol.y;
  r[4] = dpolar.x;
  r[5] = dpolar.y;
  return r;
}

inline HybridSystem make_slip_system(const SlipParams& p, bool playback = true) {
  p.validate();
  HybridSystem sys;
  sys.mode_count = 2;
  sys.state_dim = 8;
  sys.field = [p, playback](int mode, double, const State& s, State& ds) {
    if (mode == kStance) {
      const SlipInput u = playback ? playback_stance_input(s, p) : SlipInput{};
      slip_stance_field(s, u, p, ds);
    } else {
      slip_flight_field(s, p, ds);
    }
  };
  sys.guard = [p](int mode, const State& s) { return slip_guard(mode, s, p); };
  sys.reset = [p](int mode, const State& s) {
    return mode == kStance ? liftoff_reset(s, p) : touchdown_reset(s, p);
  };
  return sys;
}

// Post-touchdown stance state on the section z = rho_l cos(beta(v)) with
// touchdown velocity v and fore-aft position x0.
inline State touchdown_state(Vec2 v, const SlipParams& p, double x0 = 0.0) {
  const double beta = foreaft::raibert_touchdown_angle(v.x, p.foreaft);
  const double z = p.small_angle_guard ? p.rho_l : p.rho_l * std::cos(beta);
  State flight{0.0, p.rho_l, x0, z, 0.0, 0.0, v.x, v.y};
  return touchdown_reset(flight, p);
}

inline HybridExecution slip_full_execute(const State& init, const SlipParams& p,
                                         int n_strides, const IntegratorSettings& settings,
                                         int mode0 = kStance) {
  const HybridSystem sys = make_slip_system(p, true);
  return execute(sys, mode0, init, StopCondition::transitions(2 * n_strides), settings);
}

// --- w coordinates and the composed return map -----------------------------

// h_w(v) = R(-beta(v1)) v: tangential/radial decomposition of the touchdown
// velocity with respect to the commanded leg angle.
inline Vec2 h_w_map(Vec2 v, const ForeAftParams& fa) {
  return Mat2::rotation(-foreaft::raibert_touchdown_angle(v.x, fa)) * v;
}

// Closed-form differential Dh_w = R(-beta) [I - J v Dbeta e1^T].
inline Mat2 h_w_differential(Vec2 v, const ForeAftParams& fa) {
  const double beta = foreaft::raibert_touchdown_angle(v.x, fa);
  const double dbeta = 0.5 * fa.T_s / fa.rho_l + fa.k_p;
  const Vec2 jv = Mat2::skew() * v;
  const Mat2 inner = Mat2::identity() - Mat2::outer(jv * dbeta, {1.0, 0.0});
  return Mat2::rotation(-beta) * inner;
}

// Invert h_w by Newton on the fore-aft component (v = R(beta(v1)) w).
inline Vec2 h_w_inverse(Vec2 w, const ForeAftParams& fa) {
  double v1 = w.x;  // beta is small in the operating range; w.x is a fair seed
  for (int it = 0; it < 100; ++it) {
    const double beta = foreaft::raibert_touchdown_angle(v1, fa);
    const double f = std::cos(beta) * w.x - std::sin(beta) * w.y - v1;
    if (std::abs(f) < 1e-14 * (1.0 + w.norm())) {
      const Vec2 v = Mat2::rotation(foreaft::raibert_touchdown_angle(v1, fa)) * w;
      if ((h_w_map(v, fa) - w).norm() > 1e-10 * (1.0 + w.norm())) {
        throw InversionFailure("h_w_inverse: residual check failed");
      }
      return v;
    }
    const double dbeta = 0.5 * fa.T_s / fa.rho_l + fa.k_p;
    const double df = (-std::sin(beta) * w.x - std::cos(beta) * w.y) * dbeta - 1.0;
    if (std::abs(df) < 1e-14) throw InversionFailure("h_w_inverse: singular iteration");
    v1 -= f / df;
    if (!std::isfinite(v1)) throw InversionFailure("h_w_inverse: iteration diverged");
  }
  throw InversionFailure("h_w_inverse: no convergence");
}

// One-stride return map in w coordinates with the velocity gain supplied
// per-stride by the radial template: F(w) = h_w o F_r o h_w^{-1}(w) at
// kappa = h_vg(w2).
inline Vec2 composed_slip_return_map(Vec2 w, const SlipParams& p,
                                     const IntegratorSettings& settings) {
  const Vec2 v = h_w_inverse(w, p.foreaft);
  if (!foreaft::in_valid_touchdown_set(v, p.foreaft)) {
    throw InvalidTouchdown("composed map: h_w^{-1}(w) outside V");
  }
  const double kappa = vertical::velocity_gain(w.y, p.vertical, settings);
  const Vec2 v_next = foreaft::mbhop_return_map(v, kappa, p.foreaft);
  return h_w_map(v_next, p.foreaft);
}

// Seed for the composed fixed point, from the radial template's closed-form
// fixed point and the commanded fore-aft speed.
inline Vec2 composed_fixed_point_guess(const SlipParams& p) {
  const double chidot = vertical::stance_fixed_point_speed(p.vertical);
  const double beta = foreaft::neutral_angle(p.foreaft.xdot_star, p.foreaft);
  const double v2 = (chidot + std::sin(beta) * p.foreaft.xdot_star) / std::cos(beta);
  return h_w_map({p.foreaft.xdot_star, v2}, p.foreaft);
}

struct SlipCompositionReport {
  Vec2 w_star;
  Mat2 jacobian;
  std::complex<double> eig1, eig2;
  double det = 0, trace = 0;
  double spectral_radius = 0;
  double xi_bound = 0;        // Xi = 2 |J w*| |Dh_w^{-1}| (spectral norm)
  double eps_r = 0;           // vertical stability margin 1 - |DF1|
  double df1_at_star = 0;     // DF1 of the radial stance map at w2*
  double analytic_det = 0;    // matrix-determinant-lemma value
  double kp_margin = 0;       // eps_r - 2 k_p Xi
  bool margin_ok = false;     // 2 k_p Xi < eps_r
  bool pass = false;          // jury strict
  JuryResult jury;
};

// Certify the composed map: locate the fixed point, finite-difference the
// Jacobian, run the jury conditions, and report the rank-one decomposition
// constants. Internally tightens the integrator tolerance so the
// finite-difference noise stays well below the certificate tolerances.
inline SlipCompositionReport slip_composition_certificate(const SlipParams& p,
                                                          const IntegratorSettings& settings) {
  IntegratorSettings tight = settings;
  tight.method = StepMethod::Rk45Adaptive;
  tight.rel_tol = std::min(settings.rel_tol, 1e-12);
  tight.abs_tol = std::min(settings.abs_tol, 1e-14);

  auto map = [&](Vec2 w) { return composed_slip_return_map(w, p, tight); };

  const Vec2 guess = composed_fixed_point_guess(p);
  VecFn mapn = [&](const std::vector<double>& v) {
    const Vec2 y = map({v[0], v[1]});
    return std::vector<double>{y.x, y.y};
  };
  FixedPointResult fp = find_fixed_point(mapn, {guess.x, guess.y}, 1e-10, 60);
  if (!fp.converged) {
    throw FixedPointNotFound("slip_composition_certificate: no fixed point near the template seed");
  }

  SlipCompositionReport rep;
  rep.w_star = {fp.x_star[0], fp.x_star[1]};

  const double fd_h = 2e-5 * std::max(1.0, rep.w_star.norm());
  rep.jacobian = numeric_jacobian_2x2(map, rep.w_star, fd_h);
  auto [l1, l2] = eigenvalues_2x2(rep.jacobian);
  rep.eig1 = l1;
  rep.eig2 = l2;
  rep.det = rep.jacobian.det();
  rep.trace = rep.jacobian.trace();
  rep.spectral_radius = hopsim::spectral_radius(rep.jacobian);
  rep.jury = jury_test_2x2(rep.jacobian);
  rep.pass = rep.jury.verdict == JuryVerdict::Stable;

  // Radial margin at the fixed point.
  const double chi = rep.w_star.y;
  const double h1 = 1e-5 * std::abs(chi);
  rep.df1_at_star = (vertical::vertical_stance_map(chi + h1, p.vertical, tight) -
                     vertical::vertical_stance_map(chi - h1, p.vertical, tight)) /
                    (2.0 * h1);
  rep.eps_r = 1.0 - std::abs(rep.df1_at_star);

  // Rank-one decomposition DF = diag(1, -DF1) + p q^T with p = -2 k_p J w*,
  // q = R(-beta*) e1, checked through the matrix determinant lemma.
  const Vec2 v_star = h_w_inverse(rep.w_star, p.foreaft);
  const double beta_star = foreaft::raibert_touchdown_angle(v_star.x, p.foreaft);
  const Vec2 pvec = Mat2::skew() * rep.w_star * (-2.0 * p.foreaft.k_p);
  const Vec2 qvec = Mat2::rotation(-beta_star) * Vec2{1.0, 0.0};
  const Mat2 A = Mat2::diag(1.0, -rep.df1_at_star);
  rep.analytic_det = A.det() * (1.0 + dot(qvec, A.inverse() * pvec));

  const Mat2 dhw = h_w_differential(v_star, p.foreaft);
  rep.xi_bound = 2.0 * rep.w_star.norm() * dhw.inverse().spectral_norm();
  rep.kp_margin = rep.eps_r - 2.0 * p.foreaft.k_p * rep.xi_bound;
  rep.margin_ok = rep.kp_margin > 0.0;
  return rep;
}

// --- trajectory probes ------------------------------------------------------

// Apex heights (max z per flight segment) of an execution.
inline std::vector<double> apex_heights(const HybridExecution& ex) {
  std::vector<double> apexes;
  for (const auto& seg : ex.segments) {
    if (seg.mode != kFlight) continue;
    double zmax = -1e300;
    for (const auto& s : seg.states) zmax = std::max(zmax, s[3]);
    apexes.push_back(zmax);
  }
  return apexes;
}

// Touchdown velocities recorded at each flight->stance transition.
inline std::vector<Vec2> touchdown_velocities(const HybridExecution& ex) {
  std::vector<Vec2> tds;
  for (const auto& seg : ex.segments) {
    if (seg.mode == kFlight && seg.terminal_event) {
      const State& s = seg.terminal_event->state;
      tds.push_back({s[6], s[7]});
    }
  }
  return tds;
}

inline std::vector<std::string> state_names() {
  return {"th1", "th2", "x", "z", "dth1", "dth2", "dx", "dz"};
}

}  // namespace hopsim::slip
