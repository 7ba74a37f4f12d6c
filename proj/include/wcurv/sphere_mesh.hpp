#pragma once

// Staggered latitude-longitude discretization of the round unit sphere.
//
// Colatitudes sit at cell centres theta_j = (j + 1/2) pi / n_theta, so no
// node is on a pole. theta stencils continue through a pole onto the
// antipodal meridian: extended row -1-j is row j shifted by half a turn in
// phi. A scalar keeps its value there; a frame component (r_1, r_2) flips
// sign, because both e_theta and e_phi reverse when the meridian is
// continued through the pole.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "wcurv/errors.hpp"

namespace wcurv {

// Coordinate derivatives of a field at one node.
struct CoordDerivs {
  double f = 0.0;
  double f_t = 0.0;   // d/dtheta
  double f_p = 0.0;   // d/dphi
  double f_tt = 0.0;
  double f_tp = 0.0;
  double f_pp = 0.0;
};

// Components in the g'-orthonormal frame e_1 = d_theta, e_2 = d_phi / sin(theta).
struct FrameDerivs {
  double r = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double r11 = 0.0;
  double r12 = 0.0;
  double r22 = 0.0;
};

inline FrameDerivs to_frame(const CoordDerivs& d, double theta) {
  const double s = std::sin(theta), c = std::cos(theta);
  FrameDerivs out;
  out.r = d.f;
  out.r1 = d.f_t;
  out.r2 = d.f_p / s;
  out.r11 = d.f_tt;
  out.r12 = d.f_tp / s - c * d.f_p / (s * s);
  out.r22 = d.f_pp / (s * s) + c * d.f_t / s;
  return out;
}

class SphereMesh {
 public:
  // Centred weights for offsets -3..3; the 4th-order sets are zero-padded.
  static constexpr int kHalf = 3;
  using Weights = std::array<double, 7>;
  static constexpr Weights kFirst6 = {-1.0 / 60, 9.0 / 60,  -45.0 / 60, 0.0,
                                      45.0 / 60, -9.0 / 60, 1.0 / 60};
  static constexpr Weights kSecond6 = {2.0 / 180,   -27.0 / 180, 270.0 / 180, -490.0 / 180,
                                       270.0 / 180, -27.0 / 180, 2.0 / 180};
  static constexpr Weights kFirst4 = {0.0, 1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12, 0.0};
  static constexpr Weights kSecond4 = {0.0, -1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12, 0.0};

  // order 0 picks the default: 6 on full meshes, 4 on reduced ones.
  static std::shared_ptr<const SphereMesh> build(int n_theta, int n_phi, bool reduced, int order = 0) {
    if (order == 0) order = reduced ? 4 : 6;
    return std::shared_ptr<const SphereMesh>(new SphereMesh(n_theta, n_phi, reduced, order));
  }

  int order() const { return order_; }
  int half() const { return order_ / 2; }
  const Weights& first_weights() const { return order_ == 6 ? kFirst6 : kFirst4; }
  const Weights& second_weights() const { return order_ == 6 ? kSecond6 : kSecond4; }

  int n_theta() const { return n_theta_; }
  // 1 in reduced mode.
  int n_phi() const { return n_phi_; }
  bool reduced() const { return reduced_; }
  std::size_t size() const { return static_cast<std::size_t>(n_theta_) * n_phi_; }

  double d_theta() const { return std::numbers::pi / n_theta_; }
  double d_phi() const { return 2.0 * std::numbers::pi / (reduced_ ? 1 : n_phi_); }

  std::size_t index(int j, int m) const { return static_cast<std::size_t>(j) * n_phi_ + m; }
  int row(std::size_t node) const { return static_cast<int>(node / n_phi_); }
  int col(std::size_t node) const { return static_cast<int>(node % n_phi_); }

  double theta_at(int j) const { return (j + 0.5) * d_theta(); }
  double phi_at(int m) const { return reduced_ ? 0.0 : m * d_phi(); }
  double theta(std::size_t node) const { return theta_at(row(node)); }
  double phi(std::size_t node) const { return phi_at(col(node)); }
  double weight(std::size_t node) const { return weights_[static_cast<std::size_t>(row(node))]; }

  struct Neighbor {
    std::size_t node;
    bool through_pole;
  };

  // Node holding the value of extended grid point (j, m); j may leave
  // [0, n_theta) by up to n_theta rows, m wraps periodically.
  Neighbor resolve(int j, int m) const {
    bool flipped = false;
    if (j < 0) {
      j = -1 - j;
      flipped = true;
    } else if (j >= n_theta_) {
      j = 2 * n_theta_ - 1 - j;
      flipped = true;
    }
    if (reduced_) return {index(j, 0), flipped};
    if (flipped) m += n_phi_ / 2;
    m = ((m % n_phi_) + n_phi_) % n_phi_;
    return {index(j, m), flipped};
  }

  // Nodes read when differentiating at `node`: the (order+1)^2 box
  // (order+1 nodes in reduced mode).
  std::vector<std::size_t> stencil(std::size_t node) const {
    const int j = row(node), m = col(node);
    std::vector<std::size_t> out;
    const int h = half();
    const int span_phi = reduced_ ? 0 : h;
    for (int a = -h; a <= h; ++a) {
      for (int b = -span_phi; b <= span_phi; ++b) out.push_back(resolve(j + a, m + b).node);
    }
    return out;
  }

  // Value-at-offset reader; parity -1 marks a frame component.
  template <typename Values>
  double at(const Values& values, int j, int m, int parity = 1) const {
    const Neighbor nb = resolve(j, m);
    const double v = values[nb.node];
    return (nb.through_pole && parity < 0) ? -v : v;
  }

  template <typename Values>
  CoordDerivs derivs_at(const Values& values, std::size_t node) const {
    const int j = row(node), m = col(node);
    const double ht = d_theta();
    const Weights& w1 = first_weights();
    const Weights& w2 = second_weights();
    const int h = half();
    CoordDerivs d;
    d.f = values[node];
    // offsets from the centre value keep constants exact
    const double c = d.f;
    for (int a = -h; a <= h; ++a) {
      const double v = at(values, j + a, m) - c;
      d.f_t += w1[a + kHalf] * v;
      d.f_tt += w2[a + kHalf] * v;
    }
    d.f_t /= ht;
    d.f_tt /= ht * ht;
    if (reduced_) return d;
    const double hp = d_phi();
    for (int b = -h; b <= h; ++b) {
      const double v = at(values, j, m + b) - c;
      d.f_p += w1[b + kHalf] * v;
      d.f_pp += w2[b + kHalf] * v;
    }
    d.f_p /= hp;
    d.f_pp /= hp * hp;
    for (int a = -h; a <= h; ++a) {
      if (a == 0) continue;
      for (int b = -h; b <= h; ++b) {
        if (b == 0) continue;
        d.f_tp += w1[a + kHalf] * w1[b + kHalf] * (at(values, j + a, m + b) - c);
      }
    }
    d.f_tp /= ht * hp;
    return d;
  }

  template <typename Values>
  FrameDerivs frame_at(const Values& values, std::size_t node) const {
    return to_frame(derivs_at(values, node), theta(node));
  }

 private:
  SphereMesh(int n_theta, int n_phi, bool reduced, int order)
      : n_theta_(n_theta), n_phi_(reduced ? 1 : n_phi), reduced_(reduced), order_(order) {
    if (order != 4 && order != 6) throw Error("stencil order must be 4 or 6, got " + std::to_string(order));
    if (n_theta < 16) throw Error("mesh needs n_theta >= 16, got " + std::to_string(n_theta));
    if (!reduced && (n_phi < 4 || n_phi % 2 != 0)) {
      throw Error("mesh needs an even n_phi >= 4, got " + std::to_string(n_phi));
    }
    // Fejer's first rule: its nodes are exactly the staggered colatitudes
    // and it integrates polynomials in cos(theta) of degree < n_theta exactly.
    weights_.resize(static_cast<std::size_t>(n_theta_));
    const double span_phi = reduced_ ? 2.0 * std::numbers::pi : d_phi();
    for (int j = 0; j < n_theta_; ++j) {
      const double t = theta_at(j);
      double s = 0.0;
      for (int k = 1; k <= n_theta_ / 2; ++k) s += std::cos(2.0 * k * t) / (4.0 * k * k - 1.0);
      weights_[static_cast<std::size_t>(j)] = 2.0 / n_theta_ * (1.0 - 2.0 * s) * span_phi;
    }
  }

  int n_theta_;
  int n_phi_;
  bool reduced_;
  int order_;
  std::vector<double> weights_;
};

using MeshPtr = std::shared_ptr<const SphereMesh>;

// Mesh parameters as they appear in configs and refinement tables.
struct MeshSpec {
  int n_theta = 32;
  int n_phi = 64;
  bool reduced = false;
  int order = 0;

  MeshPtr build() const { return SphereMesh::build(n_theta, n_phi, reduced, order); }
  std::string label() const {
    return reduced ? std::to_string(n_theta) + " reduced"
                   : std::to_string(n_phi) + "x" + std::to_string(n_theta);
  }
};

class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(MeshPtr mesh, std::vector<double> values) : mesh_(std::move(mesh)), values_(std::move(values)) {
    if (!mesh_ || values_.size() != mesh_->size()) throw Error("field size does not match mesh");
  }
  ScalarField(MeshPtr mesh, double constant)
      : ScalarField(mesh, std::vector<double>(mesh->size(), constant)) {}

  static ScalarField from_function(MeshPtr mesh, const std::function<double(double, double)>& f) {
    std::vector<double> v(mesh->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(mesh->theta(i), mesh->phi(i));
    return ScalarField(std::move(mesh), std::move(v));
  }

  const SphereMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

// Applies centred theta weights (offsets -half..half) to a whole field and
// divides by d_theta^power. parity -1 for frame components.
template <std::size_t W>
ScalarField apply_theta_stencil(const ScalarField& field, const std::array<double, W>& weights,
                                int power, int parity = 1) {
  static_assert(W % 2 == 1);
  constexpr int half = static_cast<int>(W / 2);
  const SphereMesh& mesh = field.mesh();
  const double scale = std::pow(mesh.d_theta(), power);
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int j = mesh.row(i), m = mesh.col(i);
    const double c = field[i];
    double s = 0.0;
    for (int a = -half; a <= half; ++a) s += weights[a + half] * (mesh.at(field.values(), j + a, m, parity) - c);
    out[i] = s / scale;
  }
  return ScalarField(field.mesh_ptr(), std::move(out));
}

inline ScalarField d_theta(const ScalarField& field, int parity = 1) {
  return apply_theta_stencil(field, field.mesh().first_weights(), 1, parity);
}

inline ScalarField d_theta2(const ScalarField& field, int parity = 1) {
  return apply_theta_stencil(field, field.mesh().second_weights(), 2, parity);
}

inline ScalarField d_phi(const ScalarField& field) {
  const SphereMesh& mesh = field.mesh();
  std::vector<double> out(field.size(), 0.0);
  if (mesh.reduced()) return ScalarField(field.mesh_ptr(), std::move(out));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int j = mesh.row(i), m = mesh.col(i);
    double s = 0.0;
    const SphereMesh::Weights& w = mesh.first_weights();
    for (int b = -mesh.half(); b <= mesh.half(); ++b) {
      s += w[b + SphereMesh::kHalf] * (mesh.at(field.values(), j, m + b) - field[i]);
    }
    out[i] = s / mesh.d_phi();
  }
  return ScalarField(field.mesh_ptr(), std::move(out));
}

struct FrameGradient {
  ScalarField r1;
  ScalarField r2;
};

struct FrameHessian {
  ScalarField r11;
  ScalarField r12;
  ScalarField r22;
};

inline FrameGradient grad_frame(const ScalarField& field) {
  const SphereMesh& mesh = field.mesh();
  std::vector<double> a(field.size()), b(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const FrameDerivs d = mesh.frame_at(field.values(), i);
    a[i] = d.r1;
    b[i] = d.r2;
  }
  return {ScalarField(field.mesh_ptr(), std::move(a)), ScalarField(field.mesh_ptr(), std::move(b))};
}

inline FrameHessian hess_frame(const ScalarField& field) {
  const SphereMesh& mesh = field.mesh();
  std::vector<double> a(field.size()), b(field.size()), c(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    const FrameDerivs d = mesh.frame_at(field.values(), i);
    a[i] = d.r11;
    b[i] = d.r12;
    c[i] = d.r22;
  }
  return {ScalarField(field.mesh_ptr(), std::move(a)), ScalarField(field.mesh_ptr(), std::move(b)),
          ScalarField(field.mesh_ptr(), std::move(c))};
}

inline double integrate(const ScalarField& field) {
  const SphereMesh& mesh = field.mesh();
  double s = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) s += mesh.weight(i) * field[i];
  return s;
}

}  // namespace wcurv
