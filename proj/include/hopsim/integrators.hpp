#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "hopsim/errors.hpp"

namespace hopsim {

using State = std::vector<double>;
// dxdt is preallocated to x.size() by the caller.
using OdeRhs = std::function<void(double t, const State& x, State& dxdt)>;

enum class StepMethod {
  Rk4Fixed,      // classical 4th order, fixed step
  Rk45Adaptive,  // Dormand-Prince embedded 4(5)
};

struct IntegratorSettings {
  StepMethod method = StepMethod::Rk45Adaptive;
  double fixed_step = 1e-4;    // Rk4Fixed step size
  double rel_tol = 1e-9;       // adaptive relative tolerance
  double abs_tol = 1e-12;      // adaptive absolute floor
  double initial_step = 1e-5;  // adaptive first trial step
  double max_step = 0.0;       // 0 = unlimited
  double event_tolerance = 1e-10;
  int max_step_halvings = 60;  // consecutive rejections before StepUnderflow

  void validate() const {
    if (fixed_step <= 0 || rel_tol <= 0 || abs_tol <= 0 || initial_step <= 0 ||
        event_tolerance <= 0 || max_step < 0 || max_step_halvings < 1) {
      throw ConfigError("integrator settings must be strictly positive");
    }
  }
};

// Single classical RK4 step from (t, x) with step h into out.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  void step(const OdeRhs& f, double t, const State& x, double h, State& out) {
    const std::size_t n = x.size();
    f(t, x, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
    f(t + 0.5 * h, tmp_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
    f(t + 0.5 * h, tmp_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
    f(t + h, tmp_, k4_);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = x[i] + (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  State k1_, k2_, k3_, k4_, tmp_;
};

// Dormand-Prince 5(4) embedded pair. step() returns the scaled error norm
// of the trial step (accept when <= 1).
class Rk45Stepper {
 public:
  explicit Rk45Stepper(std::size_t dim) : tmp_(dim) {
    for (auto& k : k_) k.resize(dim);
  }

  double step(const OdeRhs& f, double t, const State& x, double h, State& out,
              double rel_tol, double abs_tol) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // b(5th) - b(4th)
    static constexpr double d1 = 71.0 / 57600, d3 = -71.0 / 16695, d4 = 71.0 / 1920,
                            d5 = -17253.0 / 339200, d6 = 22.0 / 525, d7 = -1.0 / 40;

    const std::size_t n = x.size();
    f(t, x, k_[0]);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * a21 * k_[0][i];
    f(t + h / 5.0, tmp_, k_[1]);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x[i] + h * (a31 * k_[0][i] + a32 * k_[1][i]);
    f(t + 3.0 * h / 10.0, tmp_, k_[2]);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x[i] + h * (a41 * k_[0][i] + a42 * k_[1][i] + a43 * k_[2][i]);
    f(t + 4.0 * h / 5.0, tmp_, k_[3]);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x[i] + h * (a51 * k_[0][i] + a52 * k_[1][i] + a53 * k_[2][i] +
                            a54 * k_[3][i]);
    f(t + 8.0 * h / 9.0, tmp_, k_[4]);
    for (std::size_t i = 0; i < n; ++i)
      tmp_[i] = x[i] + h * (a61 * k_[0][i] + a62 * k_[1][i] + a63 * k_[2][i] +
                            a64 * k_[3][i] + a65 * k_[4][i]);
    f(t + h, tmp_, k_[5]);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = x[i] + h * (b1 * k_[0][i] + b3 * k_[2][i] + b4 * k_[3][i] +
                           b5 * k_[4][i] + b6 * k_[5][i]);
    f(t + h, out, k_[6]);

    double err2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = h * (d1 * k_[0][i] + d3 * k_[2][i] + d4 * k_[3][i] +
                            d5 * k_[4][i] + d6 * k_[5][i] + d7 * k_[6][i]);
      const double sc = abs_tol + rel_tol * std::max(std::abs(x[i]), std::abs(out[i]));
      err2 += (e / sc) * (e / sc);
    }
    return std::sqrt(err2 / static_cast<double>(n));
  }

 private:
  std::array<State, 7> k_;
  State tmp_;
};

}  // namespace hopsim
