#pragma once

// Warping function lambda of the ambient metric dr^2 + lambda(r)^2 g' and
// the scalars derived from it.

#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "wcurv/errors.hpp"

namespace wcurv {

enum class WarpKind { euclidean, spherical, hyperbolic, custom };

inline const char* to_string(WarpKind kind) {
  switch (kind) {
    case WarpKind::euclidean: return "euclidean";
    case WarpKind::spherical: return "spherical";
    case WarpKind::hyperbolic: return "hyperbolic";
    case WarpKind::custom: return "custom";
  }
  return "unknown";
}

struct LambdaValues {
  double value;   // lambda
  double d1;      // lambda'
  double d2;      // lambda''
};

struct Interval {
  double lo;
  double hi;

  bool contains(double r) const { return r > lo && r < hi; }
};

class WarpProfile {
 public:
  static WarpProfile euclidean(Interval domain = {0.0, 10.0}) {
    return WarpProfile(WarpKind::euclidean, {}, domain);
  }
  static WarpProfile spherical(Interval domain = {0.0, M_PI / 2}) {
    return WarpProfile(WarpKind::spherical, {}, domain);
  }
  static WarpProfile hyperbolic(Interval domain = {0.0, 10.0}) {
    return WarpProfile(WarpKind::hyperbolic, {}, domain);
  }
  // lambda(r) = coeffs[0] + coeffs[1] r + coeffs[2] r^2 + ...
  static WarpProfile custom(std::vector<double> coeffs, Interval domain) {
    if (coeffs.empty()) throw ProfileError("custom warp profile needs at least one coefficient");
    return WarpProfile(WarpKind::custom, std::move(coeffs), domain);
  }

  WarpKind kind() const { return kind_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  const Interval& domain() const { return domain_; }

  // +1, 0, -1 for the space forms; empty for custom profiles.
  std::optional<double> space_form_curvature() const {
    switch (kind_) {
      case WarpKind::euclidean: return 0.0;
      case WarpKind::spherical: return 1.0;
      case WarpKind::hyperbolic: return -1.0;
      case WarpKind::custom: return std::nullopt;
    }
    return std::nullopt;
  }

  // lambda, lambda', lambda'' without any domain or sign checks.
  LambdaValues raw(double r) const {
    switch (kind_) {
      case WarpKind::euclidean: return {r, 1.0, 0.0};
      case WarpKind::spherical: return {std::sin(r), std::cos(r), -std::sin(r)};
      case WarpKind::hyperbolic: return {std::sinh(r), std::cosh(r), std::sinh(r)};
      case WarpKind::custom: break;
    }
    // Horner on the polynomial and its first two derivatives.
    double p = 0.0, dp = 0.0, ddp = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
      ddp = ddp * r + 2.0 * dp;
      dp = dp * r + p;
      p = p * r + *it;
    }
    return {p, dp, ddp};
  }

  LambdaValues eval_lambda(double r) const {
    check_domain(r);
    const LambdaValues v = raw(r);
    if (!(v.value > 0.0) || !(v.d1 > 0.0)) {
      std::ostringstream os;
      os << to_string(kind_) << " warp profile violates lambda > 0, lambda' > 0 at r = " << r
         << " (lambda = " << v.value << ", lambda' = " << v.d1 << ")";
      throw ProfileError(os.str());
    }
    return v;
  }

  // zeta = lambda'/lambda
  double eval_zeta(double r) const {
    const LambdaValues v = eval_lambda(r);
    return v.d1 / v.value;
  }

  // Lambda(r) = integral of lambda from 0 to r.
  double eval_capital_lambda(double r) const {
    check_domain(r);
    if (r < 0.0) throw DomainError("Lambda(r) needs r >= 0, got r = " + std::to_string(r));
    switch (kind_) {
      case WarpKind::euclidean: return 0.5 * r * r;
      case WarpKind::spherical: return 1.0 - std::cos(r);
      case WarpKind::hyperbolic: return std::cosh(r) - 1.0;
      case WarpKind::custom: break;
    }
    if (r == 0.0) return 0.0;
    auto integrand = [this](double s) { return raw(s).value; };
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, 0.0, r, 15,
                                                                          1e-12);
  }

 private:
  WarpProfile(WarpKind kind, std::vector<double> coeffs, Interval domain)
      : kind_(kind), coeffs_(std::move(coeffs)), domain_(domain) {
    if (!(domain_.lo < domain_.hi)) throw ProfileError("warp domain must satisfy r_lo < r_hi");
  }

  void check_domain(double r) const {
    if (!domain_.contains(r)) {
      std::ostringstream os;
      os << "radius " << r << " outside warp domain (" << domain_.lo << ", " << domain_.hi << ")";
      throw DomainError(os.str());
    }
  }

  WarpKind kind_;
  std::vector<double> coeffs_;
  Interval domain_;
};

struct ProfileValidation {
  bool passed = true;
  std::optional<double> first_violation;  // smallest sampled r that fails
  std::string message;
};

// Samples lambda and lambda' on a dense interior grid of the domain.
inline ProfileValidation validate_profile(const WarpProfile& profile, int samples = 4096) {
  ProfileValidation report;
  const Interval d = profile.domain();
  for (int i = 0; i < samples; ++i) {
    const double r = d.lo + (i + 0.5) * (d.hi - d.lo) / samples;
    const LambdaValues v = profile.raw(r);
    if (!(v.value > 0.0) || !(v.d1 > 0.0)) {
      report.passed = false;
      report.first_violation = r;
      std::ostringstream os;
      os << (v.value > 0.0 ? "lambda' <= 0" : "lambda <= 0") << " at r = " << r;
      report.message = os.str();
      return report;
    }
  }
  report.message = "ok";
  return report;
}

}  // namespace wcurv
