#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>

namespace hopsim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2 operator-() const { return {-x, -y}; }

  double norm() const { return std::hypot(x, y); }
  double norm_inf() const { return std::max(std::abs(x), std::abs(y)); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
// z-component of the planar cross product a x b
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Column-major-free 2x2 matrix: m[r][c].
struct Mat2 {
  std::array<std::array<double, 2>, 2> m{{{0.0, 0.0}, {0.0, 0.0}}};

  Mat2() = default;
  Mat2(double a, double b, double c, double d) : m{{{a, b}, {c, d}}} {}

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  static Mat2 diag(double a, double d) { return {a, 0.0, 0.0, d}; }
  // Planar skew-symmetric generator J = [0 -1; 1 0].
  static Mat2 skew() { return {0.0, -1.0, 1.0, 0.0}; }
  // Rotation by angle (radians), R(a)*e1 = (cos a, sin a).
  static Mat2 rotation(double a) {
    const double c = std::cos(a), s = std::sin(a);
    return {c, -s, s, c};
  }
  // Rank-one outer product p q^T.
  static Mat2 outer(Vec2 p, Vec2 q) {
    return {p.x * q.x, p.x * q.y, p.y * q.x, p.y * q.y};
  }

  double operator()(int r, int c) const { return m[r][c]; }
  double& operator()(int r, int c) { return m[r][c]; }

  Vec2 operator*(Vec2 v) const {
    return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
  }
  Mat2 operator*(const Mat2& o) const {
    return {m[0][0] * o.m[0][0] + m[0][1] * o.m[1][0],
            m[0][0] * o.m[0][1] + m[0][1] * o.m[1][1],
            m[1][0] * o.m[0][0] + m[1][1] * o.m[1][0],
            m[1][0] * o.m[0][1] + m[1][1] * o.m[1][1]};
  }
  Mat2 operator+(const Mat2& o) const {
    return {m[0][0] + o.m[0][0], m[0][1] + o.m[0][1], m[1][0] + o.m[1][0],
            m[1][1] + o.m[1][1]};
  }
  Mat2 operator-(const Mat2& o) const {
    return {m[0][0] - o.m[0][0], m[0][1] - o.m[0][1], m[1][0] - o.m[1][0],
            m[1][1] - o.m[1][1]};
  }

  double trace() const { return m[0][0] + m[1][1]; }
  double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }
  Mat2 transpose() const { return {m[0][0], m[1][0], m[0][1], m[1][1]}; }
  Mat2 inverse() const {
    const double d = det();
    return {m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d};
  }
  // Largest singular value.
  double spectral_norm() const {
    const double f = m[0][0] * m[0][0] + m[0][1] * m[0][1] +
                     m[1][0] * m[1][0] + m[1][1] * m[1][1];
    const double d = det();
    const double disc = std::sqrt(std::max(0.0, f * f - 4.0 * d * d));
    return std::sqrt(0.5 * (f + disc));
  }
  double max_abs() const {
    return std::max(std::max(std::abs(m[0][0]), std::abs(m[0][1])),
                    std::max(std::abs(m[1][0]), std::abs(m[1][1])));
  }
};

}  // namespace hopsim
