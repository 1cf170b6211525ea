#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "hopsim/analysis.hpp"
#include "hopsim/config.hpp"
#include "hopsim/errors.hpp"
#include "hopsim/foreaft.hpp"
#include "hopsim/hir.hpp"
#include "hopsim/monoped.hpp"
#include "hopsim/slip.hpp"
#include "hopsim/vertical.hpp"

// Numerical verification of the stability propositions and the supporting
// oracles, shared by `hopsim verify` and the acceptance suite. Each check
// re-validates its own hypotheses before asserting the conclusion.
namespace hopsim::verify {

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  bool skipped = false;  // hypotheses not met; not counted as failure
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

class Timer {
 public:
  Timer() : t0_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace detail

// Criterion 1 / vertical limit cycle: the hybrid execution converges to the
// closed-form orbit radius k_t/(2 bbar w^2) - eps within 1e-3 in <= 20 cycles.
inline CheckResult check_limit_cycle(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{1, "prop1 vertical limit cycle"};
  const auto& p = cfg.vertical;
  const double radius_ref = vertical::limit_cycle_radius(p);
  if (radius_ref <= 0) {
    r.skipped = true;
    r.detail = "hypothesis not met: no interior limit cycle (k_t too small against damping)";
    return r;
  }
  const HybridSystem sys = vertical::make_hop_system(p);
  const HybridExecution ex =
      execute(sys, 0, {0.0, -0.5}, StopCondition::transitions(40), cfg.integrator);

  std::vector<double> radii{0.5 / p.omega};
  for (const auto& seg : ex.segments) {
    if (seg.mode == 1 && seg.terminal_event) {
      radii.push_back(std::abs(seg.terminal_event->state[1]) / p.omega);
    }
  }
  int first_converged = -1;
  for (int n = 0; n < static_cast<int>(radii.size()); ++n) {
    bool stays = true;
    for (int m = n; m < static_cast<int>(radii.size()); ++m) {
      if (std::abs(radii[m] - radius_ref) > 1e-3) {
        stays = false;
        break;
      }
    }
    if (stays) {
      first_converged = n;
      break;
    }
  }
  r.seconds = timer.seconds();
  const double final_err = std::abs(radii.back() - radius_ref);
  r.pass = first_converged >= 0 && first_converged <= 20 && r.seconds < 1.0;
  r.detail = "|x|* = " + detail::fmt(radius_ref) + ", reached " + detail::fmt(radii.back()) +
             " (err " + detail::fmt(final_err, "%.2e") + "), converged at cycle " +
             std::to_string(first_converged) + " (need <= 20), " +
             detail::fmt(r.seconds, "%.2f") + " s (need < 1)";
  return r;
}

// Criterion 2 / velocity-gain map: iterates from 0.8 and 1.2 reach kappa = 1
// within 1e-6 in <= 50 steps; the map slope at 1 equals -DF1(chidot*).
inline CheckResult check_kappa_map(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{2, "prop2 velocity-gain return map"};
  const auto& p = cfg.vertical;
  if (vertical::limit_cycle_radius(p) <= 0) {
    r.skipped = true;
    r.detail = "hypothesis not met: no interior limit cycle";
    return r;
  }
  auto iterate = [&](double kappa0) {
    double kappa = kappa0;
    for (int n = 1; n <= 50; ++n) {
      kappa = vertical::vertical_return_map(kappa, p, cfg.integrator);
      if (std::abs(kappa - 1.0) <= 1e-6) return n;
    }
    return -1;
  };
  const int n_low = iterate(0.8);
  const int n_high = iterate(1.2);

  const double h_k = 1e-4;
  const double slope = (vertical::vertical_return_map(1.0 + h_k, p, cfg.integrator) -
                        vertical::vertical_return_map(1.0 - h_k, p, cfg.integrator)) /
                       (2.0 * h_k);
  const double chidot_star = vertical::stance_fixed_point_speed(p);
  const double h_c = 1e-5 * std::abs(chidot_star);
  const double df1 = (vertical::vertical_stance_map(chidot_star + h_c, p, cfg.integrator) -
                      vertical::vertical_stance_map(chidot_star - h_c, p, cfg.integrator)) /
                     (2.0 * h_c);
  const double slope_err = std::abs(slope - (-df1));

  r.seconds = timer.seconds();
  r.pass = n_low > 0 && n_high > 0 && slope_err <= 1e-4;
  r.detail = "iterations to |kappa-1|<=1e-6: " + std::to_string(n_low) + " (from 0.8), " +
             std::to_string(n_high) + " (from 1.2), need <= 50; |DF(1) + DF1(chidot*)| = " +
             detail::fmt(slope_err, "%.2e") + " (tol 1e-4)";
  return r;
}

// Criterion 3 / fore-aft Jacobian: the numeric Jacobian of the closed-loop
// MBHop map at v* matches the lower-triangular closed form, its eigenvalues,
// and the degenerate left eigenvector v*^T.
inline CheckResult check_foreaft_jacobian(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{3, "prop3 fore-aft return map Jacobian"};
  const auto& p = cfg.mbhop;
  const Vec2 v_star = foreaft::fixed_point(cfg.mbhop_v2_td, p);
  if (!foreaft::in_valid_touchdown_set(v_star, p)) {
    r.skipped = true;
    r.detail = "hypothesis not met: v* outside the valid touchdown set";
    return r;
  }
  auto map = [&](Vec2 v) { return foreaft::mbhop_return_map(v, 1.0, p); };
  const Mat2 J = numeric_jacobian_2x2(map, v_star, 1e-6);
  const Mat2 Ja = foreaft::mbhop_jacobian_analytic(v_star, p);
  const double entry_err = (J - Ja).max_abs();

  auto [l1, l2] = eigenvalues_2x2(J);
  const double lam_contract = 1.0 + 2.0 * p.k_p * v_star.y;
  const double eig_err =
      std::min(std::abs(l1 - std::complex<double>(1.0, 0.0)) +
                   std::abs(l2 - std::complex<double>(lam_contract, 0.0)),
               std::abs(l2 - std::complex<double>(1.0, 0.0)) +
                   std::abs(l1 - std::complex<double>(lam_contract, 0.0)));

  // Left eigenvector for the unit eigenvalue: null vector of (J^T - I).
  const Mat2 Mt = J.transpose() - Mat2::identity();
  Vec2 u{-Mt(0, 1), Mt(0, 0)};
  if (u.norm() < 1e-12) u = Vec2{-Mt(1, 1), Mt(1, 0)};
  const double sin_angle =
      std::abs(cross(u, v_star)) / std::max(1e-300, u.norm() * v_star.norm());

  r.seconds = timer.seconds();
  r.pass = entry_err <= 1e-6 && eig_err <= 1e-6 && sin_angle <= 1e-6;
  r.detail = "max entry err " + detail::fmt(entry_err, "%.2e") +
             ", eig err " + detail::fmt(eig_err, "%.2e") +
             ", left-eigenvector angle " + detail::fmt(sin_angle, "%.2e") + " (tol 1e-6)";
  return r;
}

// Criterion 4 / Raibert observations on MBHop, over a 50x50 grid around the
// fixed point: zero acceleration at the neutral angle, acceleration strictly
// decreasing in beta, neutral angle strictly increasing in speed.
inline CheckResult check_raibert_observations(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{4, "assumption2 Raibert observations on MBHop"};
  const auto& p = cfg.mbhop;
  const double v2 = cfg.mbhop_v2_td;
  constexpr int N = 50;
  const double x_lo = 0.5 * p.xdot_star, x_hi = 1.5 * p.xdot_star;
  const double b_lo = foreaft::neutral_angle(x_lo, p) - 0.1;
  const double b_hi = foreaft::neutral_angle(x_hi, p) + 0.1;

  double worst_neutral = 0.0;
  bool decreasing = true;
  bool monotone_neutral = true;
  double prev_bstar = -1e300;
  for (int i = 0; i < N; ++i) {
    const double xd = x_lo + (x_hi - x_lo) * i / (N - 1);
    if (!foreaft::in_valid_touchdown_set({xd, v2}, p)) continue;
    worst_neutral = std::max(
        worst_neutral,
        std::abs(foreaft::foreaft_acceleration(xd, foreaft::neutral_angle(xd, p), v2, p)));
    double prev = 1e300;
    for (int j = 0; j < N; ++j) {
      const double beta = b_lo + (b_hi - b_lo) * j / (N - 1);
      const double acc = foreaft::foreaft_acceleration(xd, beta, v2, p);
      if (j > 0 && acc >= prev) decreasing = false;
      prev = acc;
    }
    // Neutral angle by bisection of the acceleration in beta.
    double lo = b_lo, hi = b_hi;
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (foreaft::foreaft_acceleration(xd, mid, v2, p) > 0 ? lo : hi) = mid;
    }
    const double bstar = 0.5 * (lo + hi);
    if (bstar <= prev_bstar) monotone_neutral = false;
    prev_bstar = bstar;
  }
  r.seconds = timer.seconds();
  r.pass = worst_neutral < 1e-10 && decreasing && monotone_neutral;
  r.detail = std::string("|accel at beta*| max ") + detail::fmt(worst_neutral, "%.2e") +
             " (tol 1e-10), accel decreasing in beta: " + (decreasing ? "yes" : "NO") +
             ", beta* increasing in speed: " + (monotone_neutral ? "yes" : "NO");
  return r;
}

// Criterion 5 / SLIP parallel composition: radial margin, gain condition,
// strict jury pass of the composed Jacobian, and convergence of iterates from
// a 5% perturbation within 30 strides.
inline CheckResult check_slip_composition(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{5, "prop4 SLIP composition certificate"};
  const auto& p = cfg.slip;
  slip::SlipCompositionReport rep = slip::slip_composition_certificate(p, cfg.integrator);
  if (rep.eps_r < 0.2) {
    r.skipped = true;
    r.detail = "hypothesis not met: vertical margin eps_r = " + detail::fmt(rep.eps_r) +
               " < 0.2";
    r.seconds = timer.seconds();
    return r;
  }
  const Vec2 w_star = rep.w_star;
  const double pert = 0.05 * w_star.norm();
  Vec2 w = w_star + Vec2{pert / std::sqrt(2.0), pert / std::sqrt(2.0)};
  const double err0 = (w - w_star).norm();
  double err15 = 0.0, err30 = 0.0;
  for (int n = 1; n <= 30; ++n) {
    w = slip::composed_slip_return_map(w, p, cfg.integrator);
    if (n == 15) err15 = (w - w_star).norm();
  }
  err30 = (w - w_star).norm();
  const bool converged = err30 <= 0.5 * err0 && err30 < err15;

  r.seconds = timer.seconds();
  r.pass = rep.pass && rep.margin_ok && converged && r.seconds < 10.0;
  r.detail = "eps_r = " + detail::fmt(rep.eps_r) + " (need >= 0.2), 2 k_p Xi = " +
             detail::fmt(2.0 * p.foreaft.k_p * rep.xi_bound) + " < eps_r: " +
             (rep.margin_ok ? "yes" : "NO") + ", jury " +
             (rep.pass ? "stable" : "NOT stable") + " (sr " +
             detail::fmt(rep.spectral_radius) + "), pert decay " +
             detail::fmt(err30 / err0, "%.3f") + " over 30 strides, " +
             detail::fmt(r.seconds, "%.2f") + " s (need < 10)";
  return r;
}

// Criterion 6 / HIR bound: with k at 1.5x the sufficient bound and worst-case
// disturbance, iterates enter and stay in the eps_a ball on schedule and the
// triangle bound holds stride by stride.
inline CheckResult check_hir_bound(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{6, "prop5 HIR gain bound"};
  attitude::AttitudeParams p = cfg.attitude;
  const double bound = hir::required_gain_bound(p);
  if (cfg.was_set("attitude.k")) {
    if (p.k <= bound) {
      r.skipped = true;
      r.detail = "hypothesis not met: configured k = " + detail::fmt(p.k) +
                 " <= required bound " + detail::fmt(bound) + " (sufficient condition only)";
      return r;
    }
  } else {
    p.k = 1.5 * bound;
    p.k_g = 200.0 * p.k;
  }
  const double zeta = hir::hir_zeta(p);
  if (std::abs(zeta) >= 1.0) {
    r.skipped = true;
    r.detail = "hypothesis not met: |zeta| >= 1 at this gain";
    return r;
  }

  const Vec2 a0{0.3, 0.4};
  const int n_strides = 30;
  hir::HirSimResult sim = hir::hir_simulate(a0, p, hir::DisturbanceModel::worst_case(),
                                            n_strides, cfg.integrator);
  int violations = 0;
  double worst_margin = 1e300;
  for (int n = 0; n < static_cast<int>(sim.a_at_touchdown.size()); ++n) {
    const double bnd = hir::hir_triangle_bound(a0.norm(), n, p);
    const double val = sim.a_at_touchdown[n].norm();
    worst_margin = std::min(worst_margin, bnd - val);
    if (val > bnd) ++violations;
  }
  int entered = -1;
  for (int n = 0; n < static_cast<int>(sim.a_at_touchdown.size()); ++n) {
    bool stays = true;
    for (int m = n; m < static_cast<int>(sim.a_at_touchdown.size()); ++m) {
      if (sim.a_at_touchdown[m].norm() > p.eps_a) {
        stays = false;
        break;
      }
    }
    if (stays) {
      entered = n;
      break;
    }
  }
  const int deadline =
      static_cast<int>(std::ceil(std::log(p.eps_a / a0.norm()) / std::log(std::abs(zeta)))) + 2;

  r.seconds = timer.seconds();
  r.pass = violations == 0 && entered >= 0 && entered <= deadline;
  r.detail = "k = " + detail::fmt(p.k) + " (bound " + detail::fmt(bound) + "), zeta = " +
             detail::fmt(zeta) + ", entered eps_a ball at stride " + std::to_string(entered) +
             " (deadline " + std::to_string(deadline) + "), triangle-bound violations " +
             std::to_string(violations) + " (worst margin " +
             detail::fmt(worst_margin, "%.2e") + ")";
  return r;
}

// Criterion 7 / invariant submanifold: in the extreme-inertia light-tail
// regime the monoped stays on U and its SLIP projection matches the
// standalone SLIP execution.
inline CheckResult check_invariance(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{7, "prop6-7 invariant submanifold and factored return map"};
  const monoped::BodyParams p = monoped::invariance_limit_params(cfg.monoped);
  const Vec2 v_td{p.foreaft.xdot_star, -2.5};
  const State init = monoped::monoped_touchdown_state(v_td, p);
  const monoped::InvarianceReport rep = monoped::invariance_check(init, p, 5, cfg.integrator);

  r.seconds = timer.seconds();
  r.pass = rep.segments_aligned && rep.max_attitude_deviation <= 1e-6 &&
           rep.slip_projection_error <= 1e-6 && r.seconds < 10.0;
  r.detail = "attitude deviation " + detail::fmt(rep.max_attitude_deviation, "%.2e") +
             ", slip projection gap " + detail::fmt(rep.slip_projection_error, "%.2e") +
             " (tol 1e-6 over 5 strides), " + detail::fmt(r.seconds, "%.2f") +
             " s (need < 10)";
  return r;
}

// Criterion 8 / conservation oracles: the passive gravity-free stance
// conserves energy and angular momentum about the toe; every event lands
// within the guard tolerance.
inline CheckResult check_conservation(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{8, "conservation oracles and event residuals"};
  slip::SlipParams passive = cfg.slip;
  passive.vertical.damping_ratio = 0.0;
  passive.vertical.k_t = 0.0;
  passive.stance_gravity = false;

  const State s0 = slip::touchdown_state({0.3, -2.5}, passive);
  const HybridSystem sys = slip::make_slip_system(passive, false);
  const TrajectorySegment seg = integrate_mode(sys, slip::kStance, s0, 0.0, 5.0, cfg.integrator);

  auto energy = [&](const State& s) {
    const double v2 = s[5] * s[5] + s[1] * s[1] * s[4] * s[4];
    const double defl = passive.rho_l - s[1];
    return 0.5 * v2 + 0.5 * passive.k_s * defl * defl;
  };
  auto ang_mom = [](const State& s) { return s[1] * s[1] * s[4]; };

  const double e0 = energy(s0);
  const double l0 = ang_mom(s0);
  double e_drift = 0.0, l_drift = 0.0;
  for (const auto& s : seg.states) {
    e_drift = std::max(e_drift, std::abs(energy(s) - e0) / std::abs(e0));
    l_drift = std::max(l_drift, std::abs(ang_mom(s) - l0) / std::abs(l0));
  }

  // Guard residuals across a full playback run at the shipped gains.
  const HybridExecution ex = slip::slip_full_execute(slip::touchdown_state({0.3, -2.5}, cfg.slip),
                                                     cfg.slip, 8, cfg.integrator);
  double worst_residual = 0.0;
  int events = 0;
  for (const auto& sg : ex.segments) {
    if (sg.terminal_event) {
      worst_residual = std::max(worst_residual, std::abs(sg.terminal_event->guard_residual));
      ++events;
    }
  }

  r.seconds = timer.seconds();
  r.pass = seg.terminal_event.has_value() && e_drift < 1e-8 && l_drift < 1e-8 &&
           worst_residual <= 1e-10 && events >= 16;
  r.detail = "energy drift " + detail::fmt(e_drift, "%.2e") + ", momentum drift " +
             detail::fmt(l_drift, "%.2e") + " (tol 1e-8), worst |guard| at " +
             std::to_string(events) + " events " + detail::fmt(worst_residual, "%.2e") +
             " (tol 1e-10)";
  return r;
}

// Criterion 9 / defaults provenance: the shipped configuration carries the
// reference platform constants exactly.
inline CheckResult check_defaults(const RunConfig& cfg) {
  detail::Timer timer;
  CheckResult r{9, "defaults provenance"};
  const auto& m = cfg.monoped;
  const bool ok = m.m_b == 2.419 && m.rho_l == 0.105 && m.rho_t == 0.3 && m.m_t == 0.150;
  r.pass = ok;
  r.seconds = timer.seconds();
  r.detail = "m_b = " + detail::fmt(m.m_b) + " (2.419), rho_l = " + detail::fmt(m.rho_l) +
             " (0.105), rho_t = " + detail::fmt(m.rho_t) + " (0.3), m_t = " +
             detail::fmt(m.m_t) + " (0.150)";
  return r;
}

inline CheckResult run_check(int id, const RunConfig& cfg) {
  switch (id) {
    case 1: return check_limit_cycle(cfg);
    case 2: return check_kappa_map(cfg);
    case 3: return check_foreaft_jacobian(cfg);
    case 4: return check_raibert_observations(cfg);
    case 5: return check_slip_composition(cfg);
    case 6: return check_hir_bound(cfg);
    case 7: return check_invariance(cfg);
    case 8: return check_conservation(cfg);
    case 9: return check_defaults(cfg);
    default: throw ConfigError("unknown check id " + std::to_string(id));
  }
}

inline std::vector<CheckResult> run_all(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  for (int id = 1; id <= 9; ++id) out.push_back(run_check(id, cfg));
  return out;
}

// Proposition number -> criterion ids (prop 3 carries the Raibert-observation
// grid with it; props 6 and 7 are certified by the same invariance check).
inline std::vector<int> checks_for_prop(int prop) {
  switch (prop) {
    case 1: return {1};
    case 2: return {2};
    case 3: return {3, 4};
    case 4: return {5};
    case 5: return {6};
    case 6: return {7};
    case 7: return {7};
    default: throw ConfigError("prop must be in 1..7");
  }
}

}  // namespace hopsim::verify
