#pragma once

// Geometry of the radial graph {(r(u), u)} over the round sphere inside
// I x_lambda S^2. All tensors are written in the g'-orthonormal frame
// (e_theta, e_phi / sin theta) lifted to the graph, so n = 2 here.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "wcurv/errors.hpp"
#include "wcurv/sphere_mesh.hpp"
#include "wcurv/symmetric_functions.hpp"
#include "wcurv/warp_profile.hpp"

namespace wcurv {

inline constexpr int kSurfaceDim = 2;

using Mat2 = std::array<std::array<double, 2>, 2>;

struct NodeGeometry {
  double r = 0.0;
  std::array<double, 2> dr{};    // r_i
  Mat2 hess{};                   // r_ij
  double lambda = 0.0;
  double lambda_d1 = 0.0;
  double v = 0.0;                // sqrt(lambda^2 + |grad' r|^2)
  Mat2 g{};                      // g_ij
  Mat2 g_inv{};                  // g^ij
  Mat2 h_low{};                  // h_ij
  Mat2 h{};                      // h^i_j
  double H = 0.0;                // trace of h^i_j
  std::array<double, 2> kappa{}; // principal curvatures, descending
  std::array<double, 2> mu{};    // H - kappa_i, ascending
  double tau = 0.0;              // lambda^2 / v
  double nu_r = 0.0;             // <nu, d_r> = lambda / v
  double grad_norm = 0.0;        // |grad' r|

  // |(g h)_12 - (g h)_21|: lowering h^i_j must give a symmetric tensor.
  double symmetry_residual() const {
    const double a = g[0][0] * h[0][1] + g[0][1] * h[1][1];
    const double b = g[1][0] * h[0][0] + g[1][1] * h[1][0];
    return std::abs(a - b);
  }
};

// Eigenvalues of a symmetric 2x2 matrix, descending.
inline std::array<double, 2> symmetric_eigenvalues(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mean + rad, mean - rad};
}

// Lemma-2.1 quantities at one node from frame derivatives of r and lambda.
inline NodeGeometry node_geometry(const FrameDerivs& d, const LambdaValues& lam) {
  NodeGeometry ng;
  ng.r = d.r;
  ng.dr = {d.r1, d.r2};
  ng.hess = {{{d.r11, d.r12}, {d.r12, d.r22}}};
  ng.lambda = lam.value;
  ng.lambda_d1 = lam.d1;
  const double l = lam.value, lp = lam.d1, l2 = l * l;
  const double grad2 = d.r1 * d.r1 + d.r2 * d.r2;
  ng.grad_norm = std::sqrt(grad2);
  ng.v = std::sqrt(l2 + grad2);
  const double v = ng.v, v2 = v * v;

  Mat2 bracket{};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double delta = i == j ? 1.0 : 0.0;
      ng.g[i][j] = l2 * delta + ng.dr[i] * ng.dr[j];
      ng.g_inv[i][j] = (delta - ng.dr[i] * ng.dr[j] / v2) / l2;
      bracket[i][j] = -l * ng.hess[i][j] + 2.0 * lp * ng.dr[i] * ng.dr[j] + l2 * lp * delta;
      ng.h_low[i][j] = bracket[i][j] / v;
    }
  }
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      double s = 0.0;
      for (int k = 0; k < 2; ++k) {
        const double delta = i == k ? 1.0 : 0.0;
        s += (delta - ng.dr[i] * ng.dr[k] / v2) * bracket[k][j];
      }
      ng.h[i][j] = s / (l2 * v);
    }
  }
  ng.H = ng.h[0][0] + ng.h[1][1];

  // Principal curvatures from L^{-1} h_low L^{-T} with g = L L^T.
  const double l11 = std::sqrt(ng.g[0][0]);
  const double l21 = ng.g[1][0] / l11;
  const double l22 = std::sqrt(ng.g[1][1] - l21 * l21);
  const double i11 = 1.0 / l11, i21 = -l21 / (l11 * l22), i22 = 1.0 / l22;
  // S = M h M^T with M = L^{-1} = [[i11, 0], [i21, i22]].
  const double s11 = i11 * i11 * ng.h_low[0][0];
  const double s12 = i11 * (i21 * ng.h_low[0][0] + i22 * ng.h_low[0][1]);
  const double s22 = i21 * i21 * ng.h_low[0][0] + 2.0 * i21 * i22 * ng.h_low[0][1] +
                     i22 * i22 * ng.h_low[1][1];
  ng.kappa = symmetric_eigenvalues(s11, s12, s22);
  ng.mu = {ng.H - ng.kappa[0], ng.H - ng.kappa[1]};
  ng.tau = l2 / v;
  ng.nu_r = l / v;
  return ng;
}

struct GraphGeometry {
  MeshPtr mesh;
  std::vector<NodeGeometry> nodes;
  std::vector<double> capital_lambda;  // Lambda(r) per node

  std::size_t size() const { return nodes.size(); }

  template <typename Selector>
  ScalarField field(Selector select) const {
    std::vector<double> v(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = select(nodes[i]);
    return ScalarField(mesh, std::move(v));
  }
};

inline std::string node_label(const SphereMesh& mesh, std::size_t node) {
  std::ostringstream os;
  os << "node " << node << " (theta=" << mesh.theta(node) << ", phi=" << mesh.phi(node) << ")";
  return os.str();
}

// Evaluates lambda at node `i`, rethrowing domain and profile errors with the node attached.
inline LambdaValues lambda_at_node(const WarpProfile& profile, const SphereMesh& mesh,
                                   std::size_t i, double r) {
  try {
    return profile.eval_lambda(r);
  } catch (const DomainError& e) {
    throw DomainError(std::string(e.what()) + " at " + node_label(mesh, i));
  } catch (const ProfileError& e) {
    throw ProfileError(std::string(e.what()) + " at " + node_label(mesh, i));
  }
}

inline NodeGeometry geometry_at(const SphereMesh& mesh, const std::vector<double>& r,
                                const WarpProfile& profile, std::size_t i) {
  const FrameDerivs d = mesh.frame_at(r, i);
  if (!std::isfinite(d.r1) || !std::isfinite(d.r2) || !std::isfinite(d.r11) ||
      !std::isfinite(d.r12) || !std::isfinite(d.r22)) {
    throw Error("non-finite derivative of r at " + node_label(mesh, i));
  }
  return node_geometry(d, lambda_at_node(profile, mesh, i, r[i]));
}

inline GraphGeometry compute_geometry(const ScalarField& r, const WarpProfile& profile) {
  const SphereMesh& mesh = r.mesh();
  GraphGeometry geo;
  geo.mesh = r.mesh_ptr();
  geo.nodes.resize(r.size());
  geo.capital_lambda.resize(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    geo.nodes[i] = geometry_at(mesh, r.values(), profile, i);
    geo.capital_lambda[i] = r[i] >= 0.0 ? profile.eval_capital_lambda(r[i]) : 0.0;
  }
  return geo;
}

// sigma_k / sigma_l of mu(eta) at one node; throws ConeError outside Gamma_k.
inline double curvature_quotient(const NodeGeometry& ng, QuotientOrder q) {
  return sigma_quotient(std::span<const double>(ng.mu), q);
}

inline bool admissible(const NodeGeometry& ng, int k) {
  return in_gamma_k(std::span<const double>(ng.mu), k);
}

// Value of sigma_k/sigma_l on a graph of constant radius c:
// (C_n^k / C_n^l) ((n-1) zeta(c))^(k-l).
inline double round_threshold(const WarpProfile& profile, QuotientOrder q, double r,
                              int n = kSurfaceDim) {
  return binomial(n, q.k) / binomial(n, q.l) * std::pow((n - 1) * profile.eval_zeta(r), q.k - q.l);
}

}  // namespace wcurv
