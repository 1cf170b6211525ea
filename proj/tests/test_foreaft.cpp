#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hopsim/analysis.hpp"
#include "hopsim/foreaft.hpp"

using namespace hopsim;
using namespace hopsim::foreaft;
using Catch::Approx;

namespace {
ForeAftParams defaults() { return {}; }  // T_s 0.1, rho_l 0.105, k_p 0.05, xdot* 0.3
}

TEST_CASE("sweep angle arithmetic and homogeneity", "[foreaft]") {
  const auto p = defaults();
  REQUIRE(sweep_angle(0.0, p) == 0.0);
  REQUIRE(sweep_angle(0.5, p) == Approx(0.47619).epsilon(1e-5));
  REQUIRE(sweep_angle(2.0 * 0.37, p) == Approx(2.0 * sweep_angle(0.37, p)).epsilon(1e-14));
}

TEST_CASE("raibert touchdown angle", "[foreaft]") {
  const auto p = defaults();
  REQUIRE(raibert_touchdown_angle(p.xdot_star, p) == Approx(neutral_angle(p.xdot_star, p)));
  ForeAftParams p0 = p;
  p0.k_p = 0.0;
  REQUIRE(raibert_touchdown_angle(0.9, p0) == Approx(neutral_angle(0.9, p0)));
  // beta* = xdot T_s / (2 rho_l): 0.5*0.1/0.21 = 0.238095..., plus 0.05*0.2.
  REQUIRE(raibert_touchdown_angle(0.5, p) == Approx(0.2381 + 0.01).margin(5e-5));
}

TEST_CASE("mbhop neutral step reproduces the touchdown velocity", "[foreaft]") {
  const auto p = defaults();
  const Vec2 v{0.4, -2.6};
  const double gamma = sweep_angle(v.x, p);
  const Vec2 v_next = mbhop_apply(v, 1.0, 0.5 * gamma, gamma);
  REQUIRE(v_next.x == Approx(v.x).margin(1e-14));
  REQUIRE(v_next.y == Approx(v.y).margin(1e-14));
}

TEST_CASE("mbhop preserves speed at kappa = 1", "[foreaft]") {
  const auto p = defaults();
  for (const Vec2 v : {Vec2{0.3, -2.5}, Vec2{0.7, -3.0}, Vec2{-0.2, -2.4}}) {
    const Vec2 v_next = mbhop_return_map(v, 1.0, p);
    REQUIRE(v_next.norm() == Approx(v.norm()).epsilon(1e-14));
  }
}

TEST_CASE("mbhop open-form oracle value", "[foreaft]") {
  // R(0.2) diag(1, 0.9) (1, -2), checked by independent matrix arithmetic.
  const Vec2 v_next = mbhop_apply({1.0, -2.0}, 0.9, 0.0, 0.2);
  REQUIRE(v_next.x == Approx(1.3377).margin(1e-4));
  REQUIRE(v_next.y == Approx(-1.5655).margin(1e-4));
}

TEST_CASE("analytic jacobian of the closed loop", "[foreaft]") {
  auto p = defaults();
  p.k_p = 0.0;
  const Mat2 J0 = mbhop_jacobian_analytic({0.3, -2.5}, p);
  REQUIRE((J0 - Mat2::identity()).max_abs() == 0.0);

  p.k_p = 0.05;
  const Mat2 J = mbhop_jacobian_analytic({1.0, -2.0}, p);
  REQUIRE(J(0, 0) == Approx(0.8));
  REQUIRE(J(0, 1) == 0.0);
  REQUIRE(J(1, 0) == Approx(-0.1));
  REQUIRE(J(1, 1) == 1.0);
  auto [l1, l2] = eigenvalues_2x2(J);
  REQUIRE(((l1.real() == Approx(1.0) && l2.real() == Approx(0.8)) ||
           (l1.real() == Approx(0.8) && l2.real() == Approx(1.0))));
}

TEST_CASE("analytic jacobian matches central differences at the fixed point", "[foreaft]") {
  const auto p = defaults();
  const Vec2 v_star = fixed_point(-2.5, p);
  auto map = [&](Vec2 v) { return mbhop_return_map(v, 1.0, p); };
  const Mat2 J = numeric_jacobian_2x2(map, v_star, 1e-6);
  const Mat2 Ja = mbhop_jacobian_analytic(v_star, p);
  REQUIRE((J - Ja).max_abs() < 1e-6);
}

TEST_CASE("speed is the degenerate left eigenvector direction", "[foreaft]") {
  const auto p = defaults();
  const Vec2 v_star = fixed_point(-2.5, p);
  const Mat2 J = mbhop_jacobian_analytic(v_star, p);
  // v*^T J = v*^T exactly.
  const Vec2 u = J.transpose() * v_star;
  REQUIRE(u.x == Approx(v_star.x).epsilon(1e-12));
  REQUIRE(u.y == Approx(v_star.y).epsilon(1e-12));
}

TEST_CASE("raibert observations hold on a grid", "[foreaft]") {
  const auto p = defaults();
  const double v2 = -2.5;
  double prev_bstar = -1e300;
  for (int i = 0; i < 15; ++i) {
    const double xd = 0.15 + 0.3 * i / 14.0;
    // (i) zero acceleration at the neutral angle
    REQUIRE(std::abs(foreaft_acceleration(xd, neutral_angle(xd, p), v2, p)) < 1e-10);
    // (ii) strictly decreasing in beta
    double prev = 1e300;
    for (int j = 0; j < 15; ++j) {
      const double beta = -0.03 + 0.35 * j / 14.0;
      const double acc = foreaft_acceleration(xd, beta, v2, p);
      REQUIRE(acc < prev);
      prev = acc;
    }
    // (iii) neutral angle strictly increasing in speed
    REQUIRE(neutral_angle(xd, p) > prev_bstar);
    prev_bstar = neutral_angle(xd, p);
  }
}

TEST_CASE("valid touchdown set boundary", "[foreaft]") {
  const auto p = defaults();
  REQUIRE(in_valid_touchdown_set({0.3, -2.5}, p));
  REQUIRE_FALSE(in_valid_touchdown_set({0.3, -2.0}, p));  // threshold -2.1
  REQUIRE_FALSE(in_valid_touchdown_set({0.3, 1.0}, p));
}
