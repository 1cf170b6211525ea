#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "hopsim/attitude.hpp"
#include "hopsim/errors.hpp"
#include "hopsim/foreaft.hpp"
#include "hopsim/hir.hpp"
#include "hopsim/integrators.hpp"
#include "hopsim/monoped.hpp"
#include "hopsim/slip.hpp"
#include "hopsim/vertical.hpp"

namespace hopsim {

enum class SystemKind { Vertical, Slip, Hir, Monoped, Mbhop };

inline SystemKind system_from_name(const std::string& s) {
  if (s == "vertical") return SystemKind::Vertical;
  if (s == "slip") return SystemKind::Slip;
  if (s == "hir") return SystemKind::Hir;
  if (s == "monoped") return SystemKind::Monoped;
  if (s == "mbhop") return SystemKind::Mbhop;
  throw ConfigError("unknown system '" + s + "' (expected vertical|slip|hir|monoped|mbhop)");
}

// Flat plain-text configuration: `section.key = value` lines, '#' comments.
// Unknown keys are rejected; values must satisfy each block's invariants.
struct RunConfig {
  vertical::VerticalParams vertical;
  foreaft::ForeAftParams mbhop;
  double mbhop_v2_td = -2.5;  // vertical touchdown speed of the fore-aft fixed point
  attitude::AttitudeParams attitude;
  slip::SlipParams slip;
  monoped::BodyParams monoped;
  IntegratorSettings integrator;
  unsigned long seed = 1;

  std::set<std::string> keys_set;  // keys explicitly present in the file
  bool was_set(const std::string& key) const { return keys_set.count(key) > 0; }

  void validate() const {
    vertical.validate();
    mbhop.validate();
    attitude.validate();
    slip.validate();
    monoped.validate();
    integrator.validate();
    if (mbhop_v2_td >= 0) throw ConfigError("mbhop.v2_td must be negative (descending touchdown)");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing junk");
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': cannot parse number from '" + v + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config key '" + key + "': cannot parse boolean from '" + v + "'");
}

}  // namespace detail

inline void apply_config_entry(RunConfig& c, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  auto d = [&] { return parse_double(key, value); };
  auto b = [&] { return parse_bool(key, value); };

  if (key == "vertical.omega") c.vertical.omega = d();
  else if (key == "vertical.damping_ratio") c.vertical.damping_ratio = d();
  else if (key == "vertical.k_t") c.vertical.k_t = d();
  else if (key == "vertical.eps") c.vertical.eps = d();
  else if (key == "vertical.gravity") c.vertical.gravity = d();
  else if (key == "mbhop.T_s") c.mbhop.T_s = d();
  else if (key == "mbhop.rho_l") c.mbhop.rho_l = d();
  else if (key == "mbhop.k_p") c.mbhop.k_p = d();
  else if (key == "mbhop.xdot_star") c.mbhop.xdot_star = d();
  else if (key == "mbhop.v2_td") c.mbhop_v2_td = d();
  else if (key == "attitude.k") c.attitude.k = d();
  else if (key == "attitude.k_g") c.attitude.k_g = d();
  else if (key == "attitude.omega_a") c.attitude.omega_a = d();
  else if (key == "attitude.eps_a") c.attitude.eps_a = d();
  else if (key == "attitude.delta_bar_max") c.attitude.delta_bar_max = d();
  else if (key == "slip.k_s") c.slip.k_s = d();
  else if (key == "slip.rho_l") { c.slip.rho_l = d(); c.slip.foreaft.rho_l = c.slip.rho_l; }
  else if (key == "slip.gravity") c.slip.gravity = d();
  else if (key == "slip.small_angle_guard") c.slip.small_angle_guard = b();
  else if (key == "slip.stance_gravity") c.slip.stance_gravity = b();
  else if (key == "slip.leg_servo_omega") c.slip.leg_servo_omega = d();
  else if (key == "slip.vertical.omega") c.slip.vertical.omega = d();
  else if (key == "slip.vertical.damping_ratio") c.slip.vertical.damping_ratio = d();
  else if (key == "slip.vertical.k_t") c.slip.vertical.k_t = d();
  else if (key == "slip.vertical.eps") c.slip.vertical.eps = d();
  else if (key == "slip.foreaft.T_s") c.slip.foreaft.T_s = d();
  else if (key == "slip.foreaft.k_p") c.slip.foreaft.k_p = d();
  else if (key == "slip.foreaft.xdot_star") c.slip.foreaft.xdot_star = d();
  else if (key == "monoped.m_b") c.monoped.m_b = d();
  else if (key == "monoped.i_b") c.monoped.i_b = d();
  else if (key == "monoped.m_t") c.monoped.m_t = d();
  else if (key == "monoped.i_t") c.monoped.i_t = d();
  else if (key == "monoped.rho_l") { c.monoped.rho_l = d(); c.monoped.foreaft.rho_l = c.monoped.rho_l; }
  else if (key == "monoped.rho_t") c.monoped.rho_t = d();
  else if (key == "monoped.k_s") c.monoped.k_s = d();
  else if (key == "monoped.gravity") c.monoped.gravity = d();
  else if (key == "monoped.ctrl_i_b") c.monoped.ctrl_i_b = d();
  else if (key == "monoped.ctrl_i_t") c.monoped.ctrl_i_t = d();
  else if (key == "monoped.small_angle_guard") c.monoped.small_angle_guard = b();
  else if (key == "monoped.stance_gravity") c.monoped.stance_gravity = b();
  else if (key == "monoped.leg_servo_omega") c.monoped.leg_servo_omega = d();
  else if (key == "monoped.min_transition_time") c.monoped.min_transition_time = d();
  else if (key == "monoped.vertical.omega") c.monoped.vertical.omega = d();
  else if (key == "monoped.vertical.damping_ratio") c.monoped.vertical.damping_ratio = d();
  else if (key == "monoped.vertical.k_t") c.monoped.vertical.k_t = d();
  else if (key == "monoped.vertical.eps") c.monoped.vertical.eps = d();
  else if (key == "monoped.foreaft.T_s") c.monoped.foreaft.T_s = d();
  else if (key == "monoped.foreaft.k_p") c.monoped.foreaft.k_p = d();
  else if (key == "monoped.foreaft.xdot_star") c.monoped.foreaft.xdot_star = d();
  else if (key == "monoped.attitude.k") c.monoped.attitude.k = d();
  else if (key == "monoped.attitude.k_g") c.monoped.attitude.k_g = d();
  else if (key == "monoped.attitude.omega_a") c.monoped.attitude.omega_a = d();
  else if (key == "monoped.attitude.eps_a") c.monoped.attitude.eps_a = d();
  else if (key == "monoped.attitude.delta_bar_max") c.monoped.attitude.delta_bar_max = d();
  else if (key == "integrator.method") {
    if (value == "rk45") c.integrator.method = StepMethod::Rk45Adaptive;
    else if (value == "rk4") c.integrator.method = StepMethod::Rk4Fixed;
    else throw ConfigError("integrator.method must be rk45 or rk4");
  }
  else if (key == "integrator.rel_tol") c.integrator.rel_tol = d();
  else if (key == "integrator.abs_tol") c.integrator.abs_tol = d();
  else if (key == "integrator.fixed_step") c.integrator.fixed_step = d();
  else if (key == "integrator.initial_step") c.integrator.initial_step = d();
  else if (key == "integrator.event_tol") c.integrator.event_tolerance = d();
  else if (key == "integrator.max_step_halvings") {
    c.integrator.max_step_halvings = static_cast<int>(parse_double(key, value));
  }
  else if (key == "seed") c.seed = static_cast<unsigned long>(parse_double(key, value));
  else throw ConfigError("unknown config key '" + key + "'");

  c.keys_set.insert(key);
}

inline RunConfig parse_config(std::istream& in) {
  RunConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(lineno) + ": empty key or value");
    }
    apply_config_entry(c, key, value);
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(f);
}

inline RunConfig default_config() { return RunConfig{}; }

}  // namespace hopsim
