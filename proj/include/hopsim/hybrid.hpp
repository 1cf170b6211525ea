#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hopsim/errors.hpp"
#include "hopsim/integrators.hpp"

namespace hopsim {

// A hybrid dynamical system as a (domain, field, reset) tuple with one guard
// per mode. Transitions fire when the guard crosses zero from the positive
// side; reset(i, .) maps the event state into mode (i+1) mod mode_count.
// field/guard/reset must be pure functions of their arguments.
struct HybridSystem {
  int mode_count = 2;
  int state_dim = 0;
  std::function<void(int mode, double t, const State& x, State& dxdt)> field;
  std::function<double(int mode, const State& x)> guard;
  std::function<State(int mode, const State& x)> reset;

  int next_mode(int mode) const { return (mode + 1) % mode_count; }
};

struct Event {
  double time = 0.0;
  State state;
  double guard_residual = 0.0;
};

struct TrajectorySegment {
  int mode = 0;
  std::vector<double> times;
  std::vector<State> states;
  std::optional<Event> terminal_event;
  // Segment entered exactly on its guard (inward-pointing field) rather than
  // in the interior; legal but recorded.
  bool boundary_start = false;
};

struct HybridExecution {
  std::vector<TrajectorySegment> segments;
  int transition_count = 0;
  int final_mode = 0;
  State final_state;  // post-reset after the last transition, else last sample
  double final_time = 0.0;
};

// Stop after n transitions or at t_max, whichever first.
struct StopCondition {
  int n_transitions = -1;  // <0: no transition limit
  double t_max = std::numeric_limits<double>::infinity();

  static StopCondition transitions(int n) { return {n, std::numeric_limits<double>::infinity()}; }
  static StopCondition until(double t) { return {-1, t}; }
};

namespace detail {

// One trial step of length h from (t, x); adaptive error info via err_out.
class ModeStepper {
 public:
  ModeStepper(const HybridSystem& sys, int mode, const IntegratorSettings& st)
      : rk4_(static_cast<std::size_t>(sys.state_dim)),
        rk45_(static_cast<std::size_t>(sys.state_dim)),
        settings_(st) {
    rhs_ = [&sys, mode](double t, const State& x, State& dxdt) {
      sys.field(mode, t, x, dxdt);
    };
  }

  // Returns scaled error norm (always 0 for RK4).
  double trial(double t, const State& x, double h, State& out) {
    if (settings_.method == StepMethod::Rk4Fixed) {
      rk4_.step(rhs_, t, x, h, out);
      return 0.0;
    }
    return rk45_.step(rhs_, t, x, h, out, settings_.rel_tol, settings_.abs_tol);
  }

 private:
  OdeRhs rhs_;
  Rk4Stepper rk4_;
  Rk45Stepper rk45_;
  IntegratorSettings settings_;
};

}  // namespace detail

// Integrate one mode from (t0, state0) until the guard crosses zero (event
// located by bisection over the bracketing step to |guard| <= event_tolerance)
// or until t_max. Requires guard(mode, state0) > -event_tolerance: starting
// exactly on the guard with an inward field is legal and flagged.
inline TrajectorySegment integrate_mode(const HybridSystem& sys, int mode,
                                        const State& state0, double t0, double t_max,
                                        const IntegratorSettings& settings) {
  settings.validate();
  if (t_max <= t0) throw NumericalError("integrate_mode: t_max must exceed t0");

  TrajectorySegment seg;
  seg.mode = mode;

  const double etol = settings.event_tolerance;
  double g0 = sys.guard(mode, state0);
  if (g0 < -10.0 * etol) {
    throw DegenerateExecution("integrate_mode: initial state outside the mode domain (guard = " +
                              std::to_string(g0) + ")");
  }
  seg.boundary_start = (g0 <= etol);

  detail::ModeStepper stepper(sys, mode, settings);

  double t = t0;
  State x = state0;
  State x_trial(x.size());
  seg.times.push_back(t);
  seg.states.push_back(x);

  bool armed = g0 > etol;
  double h = (settings.method == StepMethod::Rk4Fixed) ? settings.fixed_step
                                                       : settings.initial_step;
  if (settings.max_step > 0) h = std::min(h, settings.max_step);

  int rejections = 0;
  while (t < t_max) {
    double h_try = std::min(h, t_max - t);
    double err = stepper.trial(t, x, h_try, x_trial);

    if (settings.method == StepMethod::Rk45Adaptive) {
      if (err > 1.0) {
        if (++rejections > settings.max_step_halvings) {
          throw StepUnderflow("integrate_mode: too many consecutive step rejections");
        }
        h = h_try * std::max(0.2, 0.9 * std::pow(err, -0.2));
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
          throw StepUnderflow("integrate_mode: step size underflow at t = " + std::to_string(t));
        }
        continue;
      }
      rejections = 0;
      const double grow = (err <= 1e-30) ? 5.0 : std::min(5.0, 0.9 * std::pow(err, -0.2));
      h = h_try * std::max(0.2, grow);
      if (settings.max_step > 0) h = std::min(h, settings.max_step);
    }

    const double g1 = sys.guard(mode, x_trial);

    if (armed && g1 <= 0.0) {
      // Bracketed: guard positive at (t, x), non-positive at (t + h_try).
      // Bisect in time, re-taking a single partial step from (t, x).
      double lo = 0.0, hi = h_try;
      State x_lo = x;
      State x_hi = x_trial;
      double g_hi = g1;
      double tau = hi;
      State x_ev = x_hi;
      double g_ev = g_hi;
      bool located = std::abs(g_ev) <= etol;
      int it = 0;
      while (!located) {
        if (++it > 200) {
          throw NonconvergentEvent("integrate_mode: event bisection failed to reach tolerance");
        }
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) {
          // Interval exhausted in floating point; accept the non-positive end.
          tau = hi;
          x_ev = x_hi;
          g_ev = g_hi;
          if (std::abs(g_ev) <= 10.0 * etol) break;
          throw NonconvergentEvent("integrate_mode: guard bracket collapsed at |g| = " +
                                   std::to_string(std::abs(g_ev)));
        }
        State x_mid(x.size());
        if (mid > 0) {
          stepper.trial(t, x, mid, x_mid);
        } else {
          x_mid = x;
        }
        const double g_mid = sys.guard(mode, x_mid);
        if (std::abs(g_mid) <= etol) {
          tau = mid;
          x_ev = x_mid;
          g_ev = g_mid;
          located = true;
        } else if (g_mid > 0.0) {
          lo = mid;
          x_lo = x_mid;
        } else {
          hi = mid;
          x_hi = x_mid;
          g_hi = g_mid;
        }
      }
      const double t_event = t + tau;
      seg.times.push_back(t_event);
      seg.states.push_back(x_ev);
      seg.terminal_event = Event{t_event, x_ev, g_ev};
      return seg;
    }

    if (!armed) {
      if (g1 > etol) {
        armed = true;
      } else if (g1 < -10.0 * etol) {
        throw DegenerateExecution(
            "integrate_mode: trajectory left the domain without entering its interior "
            "(grazing or outward start)");
      }
    }

    t += h_try;
    x = x_trial;
    seg.times.push_back(t);
    seg.states.push_back(x);
  }
  return seg;  // t_max reached, no terminal event
}

// Alternate integrate_mode and reset until the stop condition. Every
// transition is recorded; resets are applied exactly (no integration smear).
inline HybridExecution execute(const HybridSystem& sys, int mode0, const State& state0,
                               StopCondition stop, const IntegratorSettings& settings) {
  HybridExecution ex;
  int mode = mode0;
  State x = state0;
  double t = 0.0;

  while (true) {
    if (stop.n_transitions >= 0 && ex.transition_count >= stop.n_transitions) break;
    TrajectorySegment seg = integrate_mode(sys, mode, x, t, stop.t_max, settings);
    const bool had_event = seg.terminal_event.has_value();
    ex.segments.push_back(std::move(seg));
    const TrajectorySegment& s = ex.segments.back();
    if (!had_event) {
      ex.final_mode = mode;
      ex.final_state = s.states.back();
      ex.final_time = s.times.back();
      return ex;
    }
    const Event& ev = *s.terminal_event;
    State x_next = sys.reset(mode, ev.state);
    const int m_next = sys.next_mode(mode);
    const double g_next = sys.guard(m_next, x_next);
    if (g_next < -10.0 * settings.event_tolerance) {
      throw DegenerateExecution("execute: reset landed past the next guard (guard = " +
                                std::to_string(g_next) + ")");
    }
    ex.transition_count += 1;
    mode = m_next;
    x = std::move(x_next);
    t = ev.time;
    ex.final_mode = mode;
    ex.final_state = x;
    ex.final_time = t;
  }
  return ex;
}

// Section-to-section map: from a post-reset state on entry to section_mode,
// return the state at the next entry to the same section (one full cycle
// through all modes).
inline State return_map_eval(const HybridSystem& sys, int section_mode,
                             const State& state_on_section,
                             const IntegratorSettings& settings) {
  HybridExecution ex = execute(sys, section_mode, state_on_section,
                               StopCondition::transitions(sys.mode_count), settings);
  if (ex.transition_count != sys.mode_count) {
    throw NumericalError("return_map_eval: execution stopped before completing a cycle");
  }
  return ex.final_state;
}

// Trajectory CSV: header t,mode,<names...>; events appear as a duplicate-time
// row pair (pre-event sample in the old mode, post-reset sample in the new).
inline void write_trajectory_csv(std::ostream& os, const HybridExecution& ex,
                                 const std::vector<std::string>& state_names) {
  os << "t,mode";
  for (const auto& n : state_names) os << ',' << n;
  os << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
  };
  for (const auto& seg : ex.segments) {
    for (std::size_t i = 0; i < seg.times.size(); ++i) {
      put(seg.times[i]);
      os << ',' << seg.mode;
      for (double v : seg.states[i]) {
        os << ',';
        put(v);
      }
      os << '\n';
    }
  }
  // Final post-reset state closes the last duplicate-time pair.
  if (!ex.segments.empty() && ex.segments.back().terminal_event.has_value()) {
    put(ex.final_time);
    os << ',' << ex.final_mode;
    for (double v : ex.final_state) {
      os << ',';
      put(v);
    }
    os << '\n';
  }
}

}  // namespace hopsim
