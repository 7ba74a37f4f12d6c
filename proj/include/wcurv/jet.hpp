#pragma once

// Second-order forward-mode jet in two variables: value, gradient and
// Hessian. Used to differentiate analytic target surfaces exactly.

#include <array>
#include <cmath>

namespace wcurv {

struct Jet2 {
  double v = 0.0;
  std::array<double, 2> d{};
  std::array<double, 3> dd{};  // (00, 01, 11)

  Jet2() = default;
  Jet2(double value) : v(value) {}  // NOLINT: constants promote implicitly

  static Jet2 variable(int which, double value) {
    Jet2 j(value);
    j.d[static_cast<std::size_t>(which)] = 1.0;
    return j;
  }

  bool is_constant() const { return d[0] == 0.0 && d[1] == 0.0 && dd[0] == 0.0 && dd[1] == 0.0 && dd[2] == 0.0; }
};

// Chain rule for a scalar function with f(v), f'(v), f''(v).
inline Jet2 chain(const Jet2& a, double f0, double f1, double f2) {
  Jet2 r(f0);
  r.d = {f1 * a.d[0], f1 * a.d[1]};
  r.dd = {f1 * a.dd[0] + f2 * a.d[0] * a.d[0], f1 * a.dd[1] + f2 * a.d[0] * a.d[1],
          f1 * a.dd[2] + f2 * a.d[1] * a.d[1]};
  return r;
}

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  Jet2 r(a.v + b.v);
  for (int i = 0; i < 2; ++i) r.d[i] = a.d[i] + b.d[i];
  for (int i = 0; i < 3; ++i) r.dd[i] = a.dd[i] + b.dd[i];
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r(-a.v);
  for (int i = 0; i < 2; ++i) r.d[i] = -a.d[i];
  for (int i = 0; i < 3; ++i) r.dd[i] = -a.dd[i];
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) { return a + (-b); }

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  Jet2 r(a.v * b.v);
  r.d = {a.d[0] * b.v + a.v * b.d[0], a.d[1] * b.v + a.v * b.d[1]};
  r.dd = {a.dd[0] * b.v + 2.0 * a.d[0] * b.d[0] + a.v * b.dd[0],
          a.dd[1] * b.v + a.d[0] * b.d[1] + a.d[1] * b.d[0] + a.v * b.dd[1],
          a.dd[2] * b.v + 2.0 * a.d[1] * b.d[1] + a.v * b.dd[2]};
  return r;
}

inline Jet2 reciprocal(const Jet2& a) {
  const double inv = 1.0 / a.v;
  return chain(a, inv, -inv * inv, 2.0 * inv * inv * inv);
}

inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2 sin(const Jet2& a) { return chain(a, std::sin(a.v), std::cos(a.v), -std::sin(a.v)); }
inline Jet2 cos(const Jet2& a) { return chain(a, std::cos(a.v), -std::sin(a.v), -std::cos(a.v)); }
inline Jet2 exp(const Jet2& a) {
  const double e = std::exp(a.v);
  return chain(a, e, e, e);
}
inline Jet2 log(const Jet2& a) { return chain(a, std::log(a.v), 1.0 / a.v, -1.0 / (a.v * a.v)); }
inline Jet2 sqrt(const Jet2& a) {
  const double s = std::sqrt(a.v);
  return chain(a, s, 0.5 / s, -0.25 / (s * a.v));
}
inline Jet2 abs(const Jet2& a) {
  const double sg = a.v < 0.0 ? -1.0 : 1.0;
  return chain(a, std::abs(a.v), sg, 0.0);
}

inline Jet2 pow(const Jet2& a, const Jet2& b) {
  if (b.is_constant()) {
    const double p = b.v;
    return chain(a, std::pow(a.v, p), p * std::pow(a.v, p - 1.0), p * (p - 1.0) * std::pow(a.v, p - 2.0));
  }
  return exp(b * log(a));
}

}  // namespace wcurv
