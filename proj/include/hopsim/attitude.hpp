#pragma once

#include <cmath>

#include "hopsim/errors.hpp"

// Shared attitude machinery: the graph-error controller that both the pitch
// and shape templates apply (each in its actuated hybrid mode).
namespace hopsim::attitude {

struct AttitudeParams {
  // Defaults put k at 1.5x the sufficient gain bound (2 omega_a/pi) log(1 +
  // delta_bar_max/eps_a) evaluated at the default disturbance ratio 0.15,
  // and k_g high enough that graph-error transients are negligible.
  double k = 3.0 * std::log(1.15);     // reference decay rate (1/s)
  double k_g = 600.0 * std::log(1.15); // graph-error gain (1/s), 200*k
  double omega_a = M_PI;               // clock rate (rad/s); stance is psi in [0, pi]
  double eps_a = 0.05;                 // target error-ball radius (rad)
  double delta_bar_max = 0.0075;       // worst per-stance integrated disturbance (rad/s)

  void validate() const {
    if (k <= 0 || k_g <= 0 || omega_a <= 0 || eps_a <= 0 || delta_bar_max < 0) {
      throw ConfigError("attitude params out of range");
    }
  }
};

// Graph-error law toward the reference dynamics adot = -k a:
// addot = -k_g (adot + k a).
inline double graph_error_accel(double a, double adot, const AttitudeParams& p) {
  return -p.k_g * (adot + p.k * a);
}

}  // namespace hopsim::attitude
