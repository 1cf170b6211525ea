// hopsim: simulation and stability-analysis toolkit for hybrid hopping
// templates (vertical spring energization, fore-aft stepping, SLIP and
// attitude compositions, planar tailed monoped).
//
// Subcommands: simulate | fixpoint | verify | sweep. Exit codes: 0 success,
// 1 verification failure, 2 configuration error, 3 numerical failure.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hopsim/config.hpp"
#include "hopsim/hybrid.hpp"
#include "hopsim/io.hpp"
#include "hopsim/verify.hpp"

namespace {

using namespace hopsim;

RunConfig load_or_default(const std::string& path) {
  if (path.empty()) return default_config();
  return load_config(path);
}

int worker_count() {
  if (const char* env = std::getenv("HOPSIM_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file '" + path + "'");
  f << contents;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct SimOutputs {
  std::string csv;
  std::string summary;
  HybridExecution exec;
  int svg_col_x = 0, svg_col_y = 1;
  std::string svg_label_x = "x", svg_label_y = "y";
};

SimOutputs simulate_vertical(const RunConfig& cfg, int strides) {
  SimOutputs out;
  const auto sys = vertical::make_hop_system(cfg.vertical);
  out.exec = execute(sys, 0, {0.0, -0.5}, StopCondition::transitions(2 * strides),
                     cfg.integrator);
  std::ostringstream csv;
  write_trajectory_csv(csv, out.exec, {"q", "dq"});
  out.csv = csv.str();

  std::ostringstream sum;
  sum << "system=vertical strides=" << out.exec.transition_count / 2 << " apexes=";
  bool first = true;
  for (const auto& seg : out.exec.segments) {
    if (seg.mode != 1) continue;
    double zmax = 0.0;
    for (const auto& s : seg.states) zmax = std::max(zmax, s[0]);
    sum << (first ? "" : ",") << format_double(zmax);
    first = false;
  }
  sum << " final_td_speed=" << format_double(out.exec.final_state[1]);
  out.summary = sum.str();
  out.svg_label_x = "spring deflection";
  out.svg_label_y = "deflection rate";
  return out;
}

SimOutputs simulate_slip(const RunConfig& cfg, int strides) {
  SimOutputs out;
  const State init = slip::touchdown_state({cfg.slip.foreaft.xdot_star, -2.5}, cfg.slip);
  out.exec = slip::slip_full_execute(init, cfg.slip, strides, cfg.integrator);
  std::ostringstream csv;
  write_trajectory_csv(csv, out.exec, slip::state_names());
  out.csv = csv.str();

  const auto apexes = slip::apex_heights(out.exec);
  std::ostringstream sum;
  sum << "system=slip strides=" << out.exec.transition_count / 2 << " apexes=";
  for (std::size_t i = 0; i < apexes.size(); ++i) sum << (i ? "," : "") << format_double(apexes[i]);
  const auto tds = slip::touchdown_velocities(out.exec);
  if (!tds.empty()) {
    sum << " final_td_v=" << format_double(tds.back().x) << "," << format_double(tds.back().y);
  }
  out.summary = sum.str();
  out.svg_col_x = 1;
  out.svg_col_y = 5;
  out.svg_label_x = "leg length";
  out.svg_label_y = "leg rate";
  return out;
}

SimOutputs simulate_monoped(const RunConfig& cfg, int strides, bool limit_regime) {
  SimOutputs out;
  monoped::BodyParams p = cfg.monoped;
  Vec2 phi{0.02, -0.05}, dphi{0.0, 0.0};
  if (limit_regime) {
    p = monoped::invariance_limit_params(p);
    phi = {0.0, 0.0};
  }
  const State init =
      monoped::monoped_touchdown_state({p.foreaft.xdot_star, -2.5}, p, 0.0, phi, dphi);
  out.exec = monoped::monoped_execute(init, p, strides, cfg.integrator);

  // Monoped trajectory CSV carries the applied torques per sample.
  std::ostringstream csv;
  csv << "t,mode";
  for (const auto& n : monoped::state_names()) csv << ',' << n;
  csv << ",tau_h,tau_t\n";
  auto emit = [&](double t, int mode, const State& s) {
    const auto u = monoped::controller_playback(s, mode, p);
    csv << format_double(t) << ',' << mode;
    for (double v : s) csv << ',' << format_double(v);
    csv << ',' << format_double(u.tau_h) << ',' << format_double(u.tau_t) << '\n';
  };
  for (const auto& seg : out.exec.segments) {
    for (std::size_t i = 0; i < seg.times.size(); ++i) emit(seg.times[i], seg.mode, seg.states[i]);
  }
  if (!out.exec.segments.empty() && out.exec.segments.back().terminal_event) {
    emit(out.exec.final_time, out.exec.final_mode, out.exec.final_state);
  }
  out.csv = csv.str();

  double max_phi = 0.0;
  for (const auto& seg : out.exec.segments) {
    for (const auto& s : seg.states) {
      max_phi = std::max({max_phi, std::abs(s[4]), std::abs(s[5])});
    }
  }
  std::ostringstream sum;
  sum << "system=monoped strides=" << out.exec.transition_count / 2
      << " max_attitude=" << format_double(max_phi);
  double zmax = 0.0;
  for (const auto& seg : out.exec.segments) {
    if (seg.mode != monoped::kFlight) continue;
    for (const auto& s : seg.states) zmax = std::max(zmax, s[3]);
  }
  sum << " max_apex=" << format_double(zmax);
  out.summary = sum.str();
  out.svg_col_x = 1;
  out.svg_col_y = 7;
  out.svg_label_x = "leg length";
  out.svg_label_y = "leg rate";
  return out;
}

SimOutputs simulate_hir(const RunConfig& cfg, int strides) {
  SimOutputs out;
  const auto sim = hir::hir_simulate({0.3, 0.4}, cfg.attitude,
                                     hir::DisturbanceModel::worst_case(), strides,
                                     cfg.integrator);
  out.exec = sim.execution;
  std::ostringstream csv;
  write_trajectory_csv(csv, out.exec, {"a1", "a2", "da1", "da2", "psi"});
  out.csv = csv.str();
  std::ostringstream sum;
  sum << "system=hir strides=" << strides << " a_norm=";
  for (std::size_t i = 0; i < sim.a_at_touchdown.size(); ++i) {
    sum << (i ? "," : "") << format_double(sim.a_at_touchdown[i].norm());
  }
  out.summary = sum.str();
  out.svg_col_x = 0;
  out.svg_col_y = 2;
  out.svg_label_x = "pitch";
  out.svg_label_y = "pitch rate";
  return out;
}

SimOutputs simulate_mbhop(const RunConfig& cfg, int strides) {
  SimOutputs out;
  Vec2 v{1.2 * cfg.mbhop.xdot_star, cfg.mbhop_v2_td};
  std::ostringstream csv;
  csv << "stride,v1,v2\n";
  std::ostringstream sum;
  sum << "system=mbhop strides=" << strides;
  for (int n = 0; n <= strides; ++n) {
    csv << n << ',' << format_double(v.x) << ',' << format_double(v.y) << '\n';
    if (n < strides) v = foreaft::mbhop_return_map(v, 1.0, cfg.mbhop);
  }
  sum << " final_v=" << format_double(v.x) << "," << format_double(v.y);
  out.csv = csv.str();
  out.summary = sum.str();
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& system, int strides,
                 const std::string& out_path, const std::string& svg_path, bool limit_regime) {
  const RunConfig cfg = load_or_default(config_path);
  const SystemKind kind = system_from_name(system);
  SimOutputs out;
  switch (kind) {
    case SystemKind::Vertical: out = simulate_vertical(cfg, strides); break;
    case SystemKind::Slip: out = simulate_slip(cfg, strides); break;
    case SystemKind::Monoped: out = simulate_monoped(cfg, strides, limit_regime); break;
    case SystemKind::Hir: out = simulate_hir(cfg, strides); break;
    case SystemKind::Mbhop: out = simulate_mbhop(cfg, strides); break;
  }
  if (!out_path.empty()) {
    write_file(out_path, out.csv);
  } else {
    std::cout << out.csv;
  }
  if (!svg_path.empty() && !out.exec.segments.empty()) {
    std::ostringstream svg;
    write_phase_svg(svg, out.exec, out.svg_col_x, out.svg_col_y, out.svg_label_x,
                    out.svg_label_y);
    write_file(svg_path, svg.str());
  }
  std::cout << out.summary << '\n';
  return 0;
}

int cmd_fixpoint(const std::string& config_path, const std::string& system,
                 const std::string& guess_str) {
  const RunConfig cfg = load_or_default(config_path);
  const SystemKind kind = system_from_name(system);

  std::vector<double> guess;
  if (!guess_str.empty()) {
    std::stringstream ss(guess_str);
    std::string tok;
    while (std::getline(ss, tok, ',')) guess.push_back(std::stod(tok));
  }

  FixedPointResult res;
  std::string label;
  if (kind == SystemKind::Mbhop) {
    if (guess.empty()) guess = {1.1 * cfg.mbhop.xdot_star, 1.1 * cfg.mbhop_v2_td};
    if (guess.size() != 2) throw ConfigError("mbhop guess needs two components");
    VecFn map = [&](const std::vector<double>& v) {
      const Vec2 y = foreaft::mbhop_return_map({v[0], v[1]}, 1.0, cfg.mbhop);
      return std::vector<double>{y.x, y.y};
    };
    res = find_fixed_point(map, guess, 1e-12, 60);
    label = "mbhop_td_velocity";
    if (res.converged) {
      const double beta = foreaft::raibert_touchdown_angle(res.x_star[0], cfg.mbhop);
      const double neutral = foreaft::neutral_angle(res.x_star[0], cfg.mbhop);
      std::cout << "touchdown angle beta = " << format_double(beta)
                << ", neutral gamma/2 = " << format_double(neutral) << '\n';
    }
  } else if (kind == SystemKind::Vertical) {
    if (guess.empty()) guess = {0.9};
    VecFn map = [&](const std::vector<double>& k) {
      return std::vector<double>{vertical::vertical_return_map(k[0], cfg.vertical, cfg.integrator)};
    };
    res = find_fixed_point(map, guess, 1e-9, 60);
    label = "velocity_gain";
  } else if (kind == SystemKind::Slip) {
    const Vec2 g0 = slip::composed_fixed_point_guess(cfg.slip);
    if (guess.empty()) guess = {g0.x, g0.y};
    VecFn map = [&](const std::vector<double>& w) {
      const Vec2 y = slip::composed_slip_return_map({w[0], w[1]}, cfg.slip, cfg.integrator);
      return std::vector<double>{y.x, y.y};
    };
    res = find_fixed_point(map, guess, 1e-10, 60);
    label = "slip_w_coordinates";
  } else {
    throw ConfigError("fixpoint supports systems mbhop|vertical|slip");
  }

  std::cout << "fixed point (" << label << "): ";
  for (std::size_t i = 0; i < res.x_star.size(); ++i) {
    std::cout << (i ? "," : "") << format_double(res.x_star[i]);
  }
  std::cout << "\nresidual = " << format_double(res.residual)
            << ", iterations = " << res.iterations
            << ", converged = " << (res.converged ? "yes" : "no") << '\n';
  std::cout << "FIXPOINT system=" << system << " converged=" << (res.converged ? 1 : 0)
            << " iterations=" << res.iterations << " residual=" << format_double(res.residual)
            << " x=";
  for (std::size_t i = 0; i < res.x_star.size(); ++i) {
    std::cout << (i ? "," : "") << format_double(res.x_star[i]);
  }
  std::cout << '\n';
  if (!res.converged) {
    std::cerr << "error: fixed-point iteration hit the iteration limit\n";
    return 3;
  }
  return 0;
}

int cmd_verify(const std::string& config_path, int prop) {
  const RunConfig cfg = load_or_default(config_path);
  std::vector<int> ids;
  if (prop > 0) {
    ids = verify::checks_for_prop(prop);
  } else {
    for (int i = 1; i <= 9; ++i) ids.push_back(i);
  }
  bool all_ok = true;
  std::printf("%-4s %-48s %-6s %s\n", "id", "check", "result", "detail");
  for (int id : ids) {
    const verify::CheckResult r = verify::run_check(id, cfg);
    const char* verdict = r.skipped ? "SKIP" : (r.pass ? "PASS" : "FAIL");
    if (!r.skipped && !r.pass) all_ok = false;
    std::printf("%-4d %-48s %-6s %s\n", r.id, r.name.c_str(), verdict, r.detail.c_str());
  }
  return all_ok ? 0 : 1;
}

struct SweepPoint {
  double value = 0.0;
  double metric = 0.0;
  bool ok = false;
  std::string error;
};

double sweep_metric(const RunConfig& cfg, SystemKind kind, const std::string& metric) {
  if (metric == "cycle_radius") {
    // Measured limit-cycle radius: touchdown speed after 20 strides.
    const auto sys = vertical::make_hop_system(cfg.vertical);
    const auto ex = execute(sys, 0, {0.0, -0.5}, StopCondition::transitions(40), cfg.integrator);
    return std::abs(ex.final_state[1]) / cfg.vertical.omega;
  }
  if (metric == "spectral_radius") {
    return slip::slip_composition_certificate(cfg.slip, cfg.integrator).spectral_radius;
  }
  if (metric == "zeta") return std::abs(hir::hir_zeta(cfg.attitude));
  if (metric == "foreaft_eig") {
    return std::abs(1.0 + 2.0 * cfg.mbhop.k_p * cfg.mbhop_v2_td);
  }
  (void)kind;
  throw ConfigError("unknown metric '" + metric +
                    "' (cycle_radius|spectral_radius|zeta|foreaft_eig)");
}

int cmd_sweep(const std::string& config_path, const std::string& system,
              const std::string& param, const std::string& range, std::string metric,
              const std::string& out_path) {
  const RunConfig base = load_or_default(config_path);
  const SystemKind kind = system_from_name(system);
  if (metric.empty()) {
    switch (kind) {
      case SystemKind::Vertical: metric = "cycle_radius"; break;
      case SystemKind::Slip: metric = "spectral_radius"; break;
      case SystemKind::Hir: metric = "zeta"; break;
      case SystemKind::Mbhop: metric = "foreaft_eig"; break;
      case SystemKind::Monoped: throw ConfigError("sweep: pass --metric for the monoped");
    }
  }

  double a = 0, b = 0;
  int n = 0;
  if (std::sscanf(range.c_str(), "%lf:%lf:%d", &a, &b, &n) != 3 || n < 1) {
    throw ConfigError("range must be a:b:n with n >= 1");
  }

  std::vector<SweepPoint> points(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto work = [&]() {
    while (true) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      SweepPoint& pt = points[static_cast<std::size_t>(i)];
      pt.value = (n == 1) ? a : a + (b - a) * i / (n - 1);
      try {
        RunConfig cfg = base;
        apply_config_entry(cfg, param, std::to_string(pt.value));
        cfg.validate();
        pt.metric = sweep_metric(cfg, kind, metric);
        pt.ok = true;
      } catch (const std::exception& e) {
        pt.error = e.what();
      }
    }
  };
  const int workers = std::min(worker_count(), n);
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  std::ostringstream csv;
  csv << param << ',' << metric << '\n';
  for (const auto& pt : points) {
    csv << format_double(pt.value) << ',';
    if (pt.ok) {
      csv << format_double(pt.metric);
    } else {
      csv << "nan";
    }
    csv << '\n';
  }
  if (!out_path.empty()) {
    write_file(out_path, csv.str());
  } else {
    std::cout << csv.str();
  }
  int failures = 0;
  for (const auto& pt : points) {
    if (!pt.ok) ++failures;
  }
  std::cout << "sweep " << param << " over [" << format_double(a) << ", " << format_double(b)
            << "] n=" << n << " metric=" << metric << " failures=" << failures << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hopsim: hybrid hopping-template simulation and stability toolkit"};
  app.require_subcommand(1);

  std::string config_path, system = "vertical", out_path, svg_path, guess, param, range, metric;
  int strides = 20;
  int prop = -1;
  bool limit_regime = false;

  auto* sim = app.add_subcommand("simulate", "integrate a closed-loop system, emit trajectory CSV");
  sim->add_option("--config", config_path, "config file (flat key = value)");
  sim->add_option("--system", system, "vertical|slip|hir|monoped|mbhop")->required();
  sim->add_option("--strides", strides, "number of stance+flight strides");
  sim->add_option("--out", out_path, "trajectory CSV path (default stdout)");
  sim->add_option("--svg", svg_path, "optional phase-portrait SVG path");
  sim->add_flag("--limit-regime", limit_regime, "monoped: extreme-inertia invariance regime");

  auto* fix = app.add_subcommand("fixpoint", "locate a return-map fixed point");
  fix->add_option("--config", config_path, "config file");
  fix->add_option("--system", system, "mbhop|vertical|slip")->required();
  fix->add_option("--guess", guess, "comma-separated initial guess");

  auto* ver = app.add_subcommand("verify", "run the proposition checks");
  ver->add_option("--config", config_path, "config file");
  ver->add_option("--prop", prop, "proposition 1..7 (default: the full table)");

  auto* swp = app.add_subcommand("sweep", "sweep one config key, emit (value, metric) CSV");
  swp->add_option("--config", config_path, "config file");
  swp->add_option("--system", system, "vertical|slip|hir|monoped|mbhop")->required();
  swp->add_option("--param", param, "config key to sweep")->required();
  swp->add_option("--range", range, "a:b:n grid")->required();
  swp->add_option("--metric", metric, "cycle_radius|spectral_radius|zeta|foreaft_eig");
  swp->add_option("--out", out_path, "output CSV path (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, system, strides, out_path, svg_path, limit_regime);
    if (fix->parsed()) return cmd_fixpoint(config_path, system, guess);
    if (ver->parsed()) return cmd_verify(config_path, prop);
    if (swp->parsed()) return cmd_sweep(config_path, system, param, range, metric, out_path);
  } catch (const hopsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const hopsim::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
