#pragma once

// Independent checks of the graph geometry: an extrinsic shape-operator
// oracle for the flat ambient space, the support-function identities for
// tau and Lambda, and the Codazzi equation in the flat case.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "wcurv/errors.hpp"
#include "wcurv/hypersurface_geometry.hpp"
#include "wcurv/sphere_mesh.hpp"
#include "wcurv/warp_profile.hpp"

namespace wcurv {

struct ExtrinsicCurvature {
  std::array<double, 2> kappa{};  // descending
  Mat2 shape{};                   // shape operator in the frame (d_theta, d_phi / sin theta)
};

namespace detail {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// 8th-order centred weights for offsets -4..4.
inline constexpr int kOracleHalf = 4;
inline constexpr std::array<double, 9> kOracleFirst = {3.0 / 840,    -32.0 / 840, 168.0 / 840,
                                                       -672.0 / 840, 0.0,         672.0 / 840,
                                                       -168.0 / 840, 32.0 / 840,  -3.0 / 840};
inline constexpr std::array<double, 9> kOracleSecond = {
    -9.0 / 5040,   128.0 / 5040,  -1008.0 / 5040, 8064.0 / 5040, -14350.0 / 5040,
    8064.0 / 5040, -1008.0 / 5040, 128.0 / 5040,  -9.0 / 5040};

}  // namespace detail

/// Shape operator of X(theta, phi) = r(theta, phi) (sin t cos p, sin t sin p, cos t)
/// in flat R^3 from finite-difference partials of the embedding. Sign
/// convention: II = -<X_ij, N> with the outward normal N.
inline std::vector<ExtrinsicCurvature> extrinsic_oracle_euclidean(const ScalarField& r) {
  using namespace detail;
  const SphereMesh& mesh = r.mesh();
  const double ht = mesh.d_theta();
  std::vector<ExtrinsicCurvature> out(r.size());

  auto point = [&](int j, int m, int a, int b) {
    const auto nb = mesh.resolve(j + a, m + b);
    const double t = mesh.theta_at(j) + a * ht;
    const double p = mesh.phi_at(m) + (mesh.reduced() ? 0.0 : b * mesh.d_phi());
    const double rv = r[nb.node];
    return Vec3{rv * std::sin(t) * std::cos(p), rv * std::sin(t) * std::sin(p), rv * std::cos(t)};
  };

  for (std::size_t i = 0; i < r.size(); ++i) {
    const int j = mesh.row(i), m = mesh.col(i);
    const double t = mesh.theta(i), p = mesh.phi(i);
    Vec3 X = point(j, m, 0, 0);
    Vec3 Xt{}, Xtt{}, Xp{}, Xpp{}, Xtp{};
    double r_t = 0.0;
    for (int a = -kOracleHalf; a <= kOracleHalf; ++a) {
      const Vec3 P = point(j, m, a, 0);
      Xt = Xt + kOracleFirst[a + kOracleHalf] * P;
      Xtt = Xtt + kOracleSecond[a + kOracleHalf] * P;
      r_t += kOracleFirst[a + kOracleHalf] * r[mesh.resolve(j + a, m).node];
    }
    Xt = (1.0 / ht) * Xt;
    Xtt = (1.0 / (ht * ht)) * Xtt;
    r_t /= ht;
    if (mesh.reduced()) {
      // Axisymmetric: the phi-partials are exact.
      const double rv = r[i];
      const double s = std::sin(t), c = std::cos(t);
      Xp = Vec3{-rv * s * std::sin(p), rv * s * std::cos(p), 0.0};
      Xpp = Vec3{-rv * s * std::cos(p), -rv * s * std::sin(p), 0.0};
      const double w = r_t * s + rv * c;
      Xtp = Vec3{-w * std::sin(p), w * std::cos(p), 0.0};
    } else {
      const double hp = mesh.d_phi();
      for (int b = -kOracleHalf; b <= kOracleHalf; ++b) {
        const Vec3 P = point(j, m, 0, b);
        Xp = Xp + kOracleFirst[b + kOracleHalf] * P;
        Xpp = Xpp + kOracleSecond[b + kOracleHalf] * P;
      }
      Xp = (1.0 / hp) * Xp;
      Xpp = (1.0 / (hp * hp)) * Xpp;
      for (int a = -kOracleHalf; a <= kOracleHalf; ++a) {
        for (int b = -kOracleHalf; b <= kOracleHalf; ++b) {
          if (a == 0 || b == 0) continue;
          Xtp = Xtp + (kOracleFirst[a + kOracleHalf] * kOracleFirst[b + kOracleHalf]) *
                          point(j, m, a, b);
        }
      }
      Xtp = (1.0 / (ht * hp)) * Xtp;
    }

    Vec3 N = cross(Xt, Xp);
    const double len = std::sqrt(dot(N, N));
    if (!(len > 1e-14 * std::max(1.0, dot(X, X)))) {
      throw Error("degenerate embedding normal at " + node_label(mesh, i));
    }
    N = (1.0 / len) * N;
    if (dot(N, X) < 0.0) N = (-1.0) * N;

    const double E = dot(Xt, Xt), F = dot(Xt, Xp), G = dot(Xp, Xp);
    const double L = -dot(Xtt, N), M = -dot(Xtp, N), Nn = -dot(Xpp, N);
    const double det = E * G - F * F;
    // Coordinate shape operator S = I^{-1} II.
    const double S11 = (G * L - F * M) / det, S12 = (G * M - F * Nn) / det;
    const double S21 = (E * M - F * L) / det, S22 = (E * Nn - F * M) / det;
    // Frame components: D S D^{-1} with D = diag(1, sin theta).
    const double s = std::sin(t);
    ExtrinsicCurvature ec;
    ec.shape = {{{S11, S12 / s}, {s * S21, S22}}};
    const double tr = S11 + S22, half_gap = 0.5 * (S11 - S22);
    const double disc = std::max(0.0, half_gap * half_gap + S12 * S21);
    ec.kappa = {0.5 * tr + std::sqrt(disc), 0.5 * tr - std::sqrt(disc)};
    out[i] = ec;
  }
  return out;
}

// max over nodes and frame entries of |h^i_j - S^i_j| (and of the principal
// curvatures), relative to the largest |kappa| on the graph.
inline double oracle_relative_error(const GraphGeometry& geo, const std::vector<ExtrinsicCurvature>& oracle) {
  if (oracle.size() != geo.size()) throw Error("oracle size does not match the geometry");
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const NodeGeometry& ng = geo.nodes[i];
    scale = std::max({scale, std::abs(ng.kappa[0]), std::abs(ng.kappa[1])});
    for (int a = 0; a < 2; ++a) {
      err = std::max(err, std::abs(ng.kappa[a] - oracle[i].kappa[a]));
      for (int b = 0; b < 2; ++b) err = std::max(err, std::abs(ng.h[a][b] - oracle[i].shape[a][b]));
    }
  }
  return err / scale;
}

struct IdentityResiduals {
  double grad_lambda = 0.0;  // grad_{E_i} Lambda = lambda <e_0, E_i>
  double grad_tau = 0.0;     // grad_{E_i} tau = sum_j grad_{E_j} Lambda h_ij
  double hess_lambda = 0.0;  // Hess Lambda = lambda' g - tau h
  double max() const { return std::max({grad_lambda, grad_tau, hess_lambda}); }
};

namespace detail {

// 4th-order surface derivatives. The geometry itself is 6th order, so these
// dominate the residuals and keep them above roundoff under refinement.
inline constexpr std::array<double, 5> kSurfaceFirst = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
inline constexpr std::array<double, 5> kSurfaceSecond = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12,
                                                         -1.0 / 12};

inline ScalarField surface_d1(const ScalarField& f) { return apply_theta_stencil(f, kSurfaceFirst, 1); }
inline ScalarField surface_d2(const ScalarField& f) { return apply_theta_stencil(f, kSurfaceSecond, 2); }

inline void require_reduced(const GraphGeometry& geo, const char* what) {
  if (!geo.mesh->reduced()) throw Error(std::string(what) + " runs on the reduced (axisymmetric) mesh");
}

}  // namespace detail

/// Support-function identities on an axisymmetric graph. The surface has
/// metric A^2 dtheta^2 + B^2 dphi^2 with A = v and B = lambda sin(theta);
/// E_1 is the unit meridian direction and E_2 the unit parallel direction,
/// which are principal.
inline IdentityResiduals check_supp_identities(const GraphGeometry& geo, const WarpProfile& profile) {
  detail::require_reduced(geo, "check_supp_identities");
  if (!profile.space_form_curvature()) {
    throw Error("check_supp_identities needs a space-form warp profile");
  }
  const MeshPtr& mesh = geo.mesh;
  const ScalarField cap_lambda(mesh, geo.capital_lambda);
  const ScalarField A = geo.field([](const NodeGeometry& n) { return n.v; });
  const ScalarField tau = geo.field([](const NodeGeometry& n) { return n.tau; });
  const ScalarField dL = detail::surface_d1(cap_lambda);
  const ScalarField ddL = detail::surface_d2(cap_lambda);
  const ScalarField dA = detail::surface_d1(A);
  const ScalarField dtau = detail::surface_d1(tau);

  IdentityResiduals res;
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const NodeGeometry& n = geo.nodes[i];
    const double t = mesh->theta(i);
    const double a = n.v;
    const double b = n.lambda * std::sin(t);
    const double b_t = n.lambda_d1 * n.dr[0] * std::sin(t) + n.lambda * std::cos(t);
    const double kappa_m = n.h[0][0], kappa_p = n.h[1][1];

    const double grad_L = dL[i] / a;
    const double grad_L_formula = n.lambda * n.dr[0] / a;
    res.grad_lambda = std::max(res.grad_lambda, std::abs(grad_L - grad_L_formula));

    const double grad_tau = dtau[i] / a;
    res.grad_tau = std::max(res.grad_tau, std::abs(grad_tau - grad_L * kappa_m));

    const double hess_11 = (ddL[i] - dA[i] * dL[i] / a) / (a * a);
    const double hess_22 = b_t * dL[i] / (b * a * a);
    res.hess_lambda = std::max({res.hess_lambda,
                                std::abs(hess_11 - (n.lambda_d1 - n.tau * kappa_m)),
                                std::abs(hess_22 - (n.lambda_d1 - n.tau * kappa_p))});
  }
  return res;
}

/// Codazzi equation h_ijk = h_ikj for an axisymmetric graph in a space form.
/// The only non-trivial component is E_1(kappa_p) = (B_theta / (A B)) (kappa_m - kappa_p).
inline double check_codazzi_flat(const GraphGeometry& geo, const WarpProfile& profile) {
  detail::require_reduced(geo, "check_codazzi_flat");
  if (!profile.space_form_curvature()) throw Error("check_codazzi_flat needs a space-form warp profile");
  const MeshPtr& mesh = geo.mesh;
  const ScalarField kappa_p = geo.field([](const NodeGeometry& n) { return n.h[1][1]; });
  const ScalarField dkp = detail::surface_d1(kappa_p);
  double worst = 0.0;
  for (std::size_t i = 0; i < geo.size(); ++i) {
    const NodeGeometry& n = geo.nodes[i];
    const double t = mesh->theta(i);
    const double a = n.v;
    const double b = n.lambda * std::sin(t);
    const double b_t = n.lambda_d1 * n.dr[0] * std::sin(t) + n.lambda * std::cos(t);
    const double lhs = dkp[i] / a;
    const double rhs = b_t / (a * b) * (n.h[0][0] - n.h[1][1]);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

struct RefinementStudy {
  int n_coarse = 0;
  IdentityResiduals coarse;
  IdentityResiduals fine;
  double codazzi_coarse = 0.0;
  double codazzi_fine = 0.0;
  double ratio = 0.0;          // coarse / fine of the largest identity residual
  double codazzi_ratio = 0.0;
  bool too_coarse = false;     // residual did not decrease under refinement
};

/// Runs both checks on reduced meshes with n and 2n colatitudes for the
/// axisymmetric radius r(theta).
inline RefinementStudy identity_refinement(const WarpProfile& profile,
                                           const std::function<double(double)>& radius, int n) {
  auto run = [&](int nt, IdentityResiduals& id, double& cod) {
    const MeshPtr mesh = SphereMesh::build(nt, 1, true, 6);
    const ScalarField r = ScalarField::from_function(mesh, [&](double t, double) { return radius(t); });
    const GraphGeometry geo = compute_geometry(r, profile);
    id = check_supp_identities(geo, profile);
    cod = check_codazzi_flat(geo, profile);
  };
  RefinementStudy st;
  st.n_coarse = n;
  run(n, st.coarse, st.codazzi_coarse);
  run(2 * n, st.fine, st.codazzi_fine);
  constexpr double floor = 1e-12;
  auto ratio = [](double c, double f) { return f > 0.0 ? c / f : std::numeric_limits<double>::infinity(); };
  st.ratio = ratio(st.coarse.max(), st.fine.max());
  st.codazzi_ratio = ratio(st.codazzi_coarse, st.codazzi_fine);
  st.too_coarse = (st.fine.max() > floor && st.ratio < 2.0) ||
                  (st.codazzi_fine > floor && st.codazzi_ratio < 2.0);
  return st;
}

}  // namespace wcurv
