#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <vector>

#include "hopsim/errors.hpp"
#include "hopsim/math2d.hpp"

namespace hopsim {

using VecFn = std::function<std::vector<double>(const std::vector<double>&)>;

// Central-difference Jacobian, entry error O(h^2). h defaults to
// eps^(1/3) scaled by coordinate magnitude.
inline std::vector<std::vector<double>> numeric_jacobian(const VecFn& map,
                                                         const std::vector<double>& x,
                                                         double h = 0.0) {
  const std::size_t n = x.size();
  const double h_base =
      (h > 0.0) ? h : std::cbrt(std::numeric_limits<double>::epsilon());
  std::vector<std::vector<double>> jac;
  std::vector<double> xp = x, xm = x;
  for (std::size_t j = 0; j < n; ++j) {
    const double hj = (h > 0.0) ? h : h_base * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + hj;
    xm[j] = x[j] - hj;
    const std::vector<double> fp = map(xp);
    const std::vector<double> fm = map(xm);
    if (jac.empty()) jac.assign(fp.size(), std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < fp.size(); ++i) {
      jac[i][j] = (fp[i] - fm[i]) / (2.0 * hj);
    }
    xp[j] = x[j];
    xm[j] = x[j];
  }
  if (jac.empty()) jac.assign(map(x).size(), std::vector<double>(n, 0.0));
  return jac;
}

inline Mat2 numeric_jacobian_2x2(const std::function<Vec2(Vec2)>& map, Vec2 x,
                                 double h = 0.0) {
  VecFn f = [&map](const std::vector<double>& v) {
    Vec2 y = map({v[0], v[1]});
    return std::vector<double>{y.x, y.y};
  };
  auto j = numeric_jacobian(f, {x.x, x.y}, h);
  return {j[0][0], j[0][1], j[1][0], j[1][1]};
}

struct FixedPointResult {
  std::vector<double> x_star;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

namespace detail {

// Solve J d = r for small dense systems by Gaussian elimination with
// partial pivoting. Returns false on (near-)singular J.
inline bool solve_dense(std::vector<std::vector<double>> J, std::vector<double> r,
                        std::vector<double>& d) {
  const std::size_t n = r.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t k = c + 1; k < n; ++k) {
      if (std::abs(J[k][c]) > std::abs(J[piv][c])) piv = k;
    }
    if (std::abs(J[piv][c]) < 1e-300) return false;
    std::swap(J[piv], J[c]);
    std::swap(r[piv], r[c]);
    for (std::size_t k = c + 1; k < n; ++k) {
      const double f = J[k][c] / J[c][c];
      for (std::size_t cc = c; cc < n; ++cc) J[k][cc] -= f * J[c][cc];
      r[k] -= f * r[c];
    }
  }
  d.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = r[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= J[i][c] * d[c];
    d[i] = s / J[i][i];
  }
  return true;
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

}  // namespace detail

// Newton iteration on map(x) - x with central-difference Jacobians;
// backtracks the Newton step and falls back to damped direct iteration
// if the step diverges.
inline FixedPointResult find_fixed_point(const VecFn& map, std::vector<double> guess,
                                         double tol = 1e-12, int max_iter = 60) {
  const std::size_t n = guess.size();
  FixedPointResult res;
  std::vector<double> x = std::move(guess);

  auto residual_vec = [&](const std::vector<double>& p) {
    std::vector<double> r = map(p);
    for (std::size_t i = 0; i < n; ++i) r[i] -= p[i];
    return r;
  };

  std::vector<double> r = residual_vec(x);
  double rn = detail::inf_norm(r);

  for (int it = 0; it < max_iter; ++it) {
    if (rn <= tol) {
      res.x_star = x;
      res.residual = rn;
      res.iterations = it;
      res.converged = true;
      return res;
    }
    auto J = numeric_jacobian(map, x);
    for (std::size_t i = 0; i < n; ++i) J[i][i] -= 1.0;  // D(map - id)
    std::vector<double> d;
    bool have_newton = detail::solve_dense(J, r, d);

    bool stepped = false;
    if (have_newton) {
      double alpha = 1.0;
      for (int bt = 0; bt < 6; ++bt) {
        std::vector<double> x_new = x;
        for (std::size_t i = 0; i < n; ++i) x_new[i] -= alpha * d[i];
        std::vector<double> r_new = residual_vec(x_new);
        const double rn_new = detail::inf_norm(r_new);
        if (rn_new < rn) {
          x = std::move(x_new);
          r = std::move(r_new);
          rn = rn_new;
          stepped = true;
          break;
        }
        alpha *= 0.5;
      }
    }
    if (!stepped) {
      // Damped direct iteration x <- x + 0.5 (map(x) - x).
      for (std::size_t i = 0; i < n; ++i) x[i] += 0.5 * r[i];
      r = residual_vec(x);
      rn = detail::inf_norm(r);
    }
  }
  res.x_star = x;
  res.residual = rn;
  res.iterations = max_iter;
  res.converged = (rn <= tol);
  return res;
}

inline std::pair<std::complex<double>, std::complex<double>> eigenvalues_2x2(const Mat2& M) {
  const double tr = M.trace();
  const double det = M.det();
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));
  return {0.5 * (tr + disc), 0.5 * (tr - disc)};
}

inline double spectral_radius(const Mat2& M) {
  auto [l1, l2] = eigenvalues_2x2(M);
  return std::max(std::abs(l1), std::abs(l2));
}

enum class JuryVerdict { Stable, Marginal, Unstable };

// Discrete-time 2x2 stability: both eigenvalue moduli below one iff
// (i) det < 1, (ii) det > tr - 1, (iii) det > -tr - 1, all strict.
struct JuryResult {
  JuryVerdict verdict = JuryVerdict::Unstable;
  bool det_lt_one = false;
  bool det_gt_tr_minus_one = false;
  bool det_gt_neg_tr_minus_one = false;
  double det = 0.0;
  double trace = 0.0;
};

inline JuryResult jury_test_2x2(const Mat2& M, double marginal_tol = 1e-8) {
  JuryResult r;
  r.det = M.det();
  r.trace = M.trace();
  const double m1 = 1.0 - r.det;
  const double m2 = r.det - (r.trace - 1.0);
  const double m3 = r.det - (-r.trace - 1.0);
  r.det_lt_one = m1 > 0.0;
  r.det_gt_tr_minus_one = m2 > 0.0;
  r.det_gt_neg_tr_minus_one = m3 > 0.0;
  const double worst = std::min(m1, std::min(m2, m3));
  if (worst > marginal_tol) {
    r.verdict = JuryVerdict::Stable;
  } else if (worst < -marginal_tol) {
    r.verdict = JuryVerdict::Unstable;
  } else {
    r.verdict = JuryVerdict::Marginal;
  }
  return r;
}

}  // namespace hopsim
