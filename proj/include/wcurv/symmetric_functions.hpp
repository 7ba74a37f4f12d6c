#pragma once

// Elementary symmetric functions on the Garding cone and the Hessian
// quotient operator G = (sigma_k / sigma_l)^(1/(k-l)).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "wcurv/errors.hpp"

namespace wcurv {

// Binomial coefficient C_n^k as a double.
inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

/// Eigenvalues mu of g^{-1} eta, kept sorted ascending. `permutation()[i]`
/// is the index in the caller's original ordering of sorted entry i.
class EigenTuple {
 public:
  explicit EigenTuple(std::vector<double> values) : perm_(values.size()) {
    if (values.size() < 2) throw IndexError("an eigenvalue tuple needs n >= 2 entries");
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    std::stable_sort(perm_.begin(), perm_.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    mu_.reserve(values.size());
    for (std::size_t i : perm_) mu_.push_back(values[i]);
  }
  EigenTuple(std::initializer_list<double> values) : EigenTuple(std::vector<double>(values)) {}

  std::size_t size() const { return mu_.size(); }
  int n() const { return static_cast<int>(mu_.size()); }
  std::span<const double> values() const { return mu_; }
  const std::vector<std::size_t>& permutation() const { return perm_; }
  double operator[](std::size_t i) const { return mu_[i]; }

 private:
  std::vector<double> mu_;
  std::vector<std::size_t> perm_;
};

struct QuotientOrder {
  int k;
  int l;

  // 2 <= k <= n, 0 <= l <= k - 2.
  void validate(int n) const {
    if (k < 2 || k > n || l < 0 || l > k - 2) {
      throw IndexError("quotient order (k=" + std::to_string(k) + ", l=" + std::to_string(l) +
                       ") not admissible for n=" + std::to_string(n));
    }
  }
};

/// All of sigma_0..sigma_n(mu), computed by adding one variable at a time.
template <typename T>
std::vector<T> sigma_all(std::span<const T> mu) {
  std::vector<T> e(mu.size() + 1, T(0));
  e[0] = T(1);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = i + 1; j >= 1; --j) e[j] = e[j] + mu[i] * e[j - 1];
  }
  return e;
}

template <typename T>
T sigma(std::span<const T> mu, int k) {
  const int n = static_cast<int>(mu.size());
  if (k < 0 || k > n) throw IndexError("sigma_k needs 0 <= k <= n, got k=" + std::to_string(k));
  return sigma_all(mu)[static_cast<std::size_t>(k)];
}

inline double sigma(const EigenTuple& mu, int k) { return sigma(mu.values(), k); }

/// sigma_k of mu with entry i removed (i is 0-based); sigma_{-1} = 0.
template <typename T>
T sigma_minor(std::span<const T> mu, int k, std::size_t i) {
  const int n = static_cast<int>(mu.size());
  if (i >= mu.size()) throw IndexError("sigma_minor index out of range");
  if (k == -1) return T(0);
  if (k < 0 || k > n - 1) {
    throw IndexError("sigma_minor needs 0 <= k <= n-1, got k=" + std::to_string(k));
  }
  std::vector<T> rest;
  rest.reserve(mu.size() - 1);
  for (std::size_t j = 0; j < mu.size(); ++j) {
    if (j != i) rest.push_back(mu[j]);
  }
  return sigma(std::span<const T>(rest), k);
}

inline double sigma_minor(const EigenTuple& mu, int k, std::size_t i) {
  return sigma_minor(mu.values(), k, i);
}

/// sigma_j(mu) > 0 for all 1 <= j <= k.
template <typename T>
bool in_gamma_k(std::span<const T> mu, int k) {
  const auto e = sigma_all(mu);
  const int kk = std::min<int>(k, static_cast<int>(mu.size()));
  for (int j = 1; j <= kk; ++j) {
    if (!(e[static_cast<std::size_t>(j)] > T(0))) return false;
  }
  return true;
}

inline bool in_gamma_k(const EigenTuple& mu, int k) { return in_gamma_k(mu.values(), k); }

/// sigma_k / sigma_l without the 1/(k-l) root; this is the left-hand side
/// of the prescribed curvature equation.
template <typename T>
T sigma_quotient(std::span<const T> mu, QuotientOrder q) {
  if (!in_gamma_k(mu, q.k)) throw ConeError("eigenvalues outside the Garding cone");
  const auto e = sigma_all(mu);
  return e[static_cast<std::size_t>(q.k)] / e[static_cast<std::size_t>(q.l)];
}

template <typename T>
T G_value(std::span<const T> mu, QuotientOrder q) {
  using std::pow;
  return pow(sigma_quotient(mu, q), T(1.0 / (q.k - q.l)));
}

inline double G_value(const EigenTuple& mu, QuotientOrder q) { return G_value(mu.values(), q); }

/// G^{ii}: derivative of G with respect to the diagonal entry i, at the
/// diagonal matrix diag(mu). Ordered like `mu`.
inline std::vector<double> G_gradient_diag(std::span<const double> mu, QuotientOrder q) {
  if (!in_gamma_k(mu, q.k)) throw ConeError("eigenvalues outside the Garding cone");
  const auto e = sigma_all(mu);
  const double sk = e[static_cast<std::size_t>(q.k)];
  const double sl = e[static_cast<std::size_t>(q.l)];
  const double p = 1.0 / (q.k - q.l);
  const double front = p * std::pow(sk / sl, p - 1.0) / (sl * sl);
  std::vector<double> grad(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double dk = sigma_minor(mu, q.k - 1, i);
    const double dl = sigma_minor(mu, q.l - 1, i);
    grad[i] = front * (dk * sl - sk * dl);
  }
  return grad;
}

inline std::vector<double> G_gradient_diag(const EigenTuple& mu, QuotientOrder q) {
  return G_gradient_diag(mu.values(), q);
}

/// F^{ii} = sum over j != i of G^{jj}.
inline std::vector<double> F_coeffs(std::span<const double> g_grad) {
  const double total = std::accumulate(g_grad.begin(), g_grad.end(), 0.0);
  std::vector<double> f(g_grad.size());
  for (std::size_t i = 0; i < g_grad.size(); ++i) f[i] = total - g_grad[i];
  return f;
}

/// Lower bound (C_n^k / C_n^l)^{1/(k-l)} of sum_i G^{ii} on the cone.
inline double gradient_trace_bound(int n, QuotientOrder q) {
  return std::pow(binomial(n, q.k) / binomial(n, q.l), 1.0 / (q.k - q.l));
}

struct Prop22Result {
  enum class Status { ok, degenerate, skipped };
  Status status = Status::skipped;
  double residual = 0.0;
  double fd_value = 0.0;        // finite-difference estimate of -G^{1i,i1}
  double quotient_value = 0.0;  // (G^{11} - G^{ii}) / (eta_ii - eta_11)
};

/// Checks -G^{1i,i1} = (G^{11} - G^{ii}) / (eta_ii - eta_11) at the diagonal
/// matrix `eta` (i is 1-based as in the identity, i >= 2). The off-diagonal
/// second derivative comes from a symmetric perturbation s of the (1,i) and
/// (i,1) entries: the 2x2 block is re-diagonalized in closed form and
/// d^2/ds^2 G = 2 G^{1i,i1}.
inline Prop22Result check_prop22(const EigenTuple& eta, QuotientOrder q, std::size_t i) {
  Prop22Result res;
  const int n = eta.n();
  q.validate(n);
  if (i < 2 || i > eta.size()) throw IndexError("check_prop22 needs 2 <= i <= n");
  if (q.k < 3) return res;  // identity stated for k >= 3 only
  const std::size_t a = 0, b = i - 1;
  const double e1 = eta[a], ei = eta[b];
  if (std::abs(ei - e1) < 1e-8) {
    res.status = Prop22Result::Status::degenerate;
    return res;
  }
  if (!in_gamma_k(eta.values(), q.k)) throw ConeError("eta outside the Garding cone");

  std::vector<double> work(eta.values().begin(), eta.values().end());
  auto G_at = [&](double s) {
    const double mean = 0.5 * (e1 + ei);
    const double rad = std::hypot(0.5 * (ei - e1), s);
    work[a] = mean - rad;
    work[b] = mean + rad;
    return G_value(std::span<const double>(work), q);
  };
  const double scale = 1.0 + std::max(std::abs(e1), std::abs(ei));
  const double h = 1e-4 * scale;
  const double second = (G_at(h) - 2.0 * G_at(0.0) + G_at(-h)) / (h * h);
  res.fd_value = -0.5 * second;

  const auto grad = G_gradient_diag(eta, q);
  res.quotient_value = (grad[a] - grad[b]) / (ei - e1);
  res.residual = std::abs(res.fd_value - res.quotient_value);
  res.status = Prop22Result::Status::ok;
  return res;
}

/// Central-difference estimate of d^2/dt^2 G(mu + t d) at t = 0. The step
/// starts at 1e-4 (1 + max|mu|) and halves until the stencil fits in the cone.
inline double second_directional_derivative(std::span<const double> mu, QuotientOrder q,
                                            std::span<const double> d) {
  const std::size_t n = mu.size();
  double scale = 1.0;
  for (double m : mu) scale = std::max(scale, 1.0 + std::abs(m));
  std::vector<double> plus(n), minus(n);
  double h = 1e-4 * scale;
  for (int halving = 0; halving < 30; ++halving) {
    for (std::size_t j = 0; j < n; ++j) {
      plus[j] = mu[j] + h * d[j];
      minus[j] = mu[j] - h * d[j];
    }
    if (in_gamma_k(std::span<const double>(plus), q.k) &&
        in_gamma_k(std::span<const double>(minus), q.k)) {
      const double g0 = G_value(mu, q);
      return (G_value(std::span<const double>(plus), q) - 2.0 * g0 +
              G_value(std::span<const double>(minus), q)) /
             (h * h);
    }
    h *= 0.5;
  }
  throw ConeError("finite-difference stencil cannot stay inside the cone");
}

/// Maximum over `trials` random unit diagonal directions of
/// second_directional_derivative. Concavity means the result is <= 0 up to
/// truncation error.
template <typename Rng>
double check_concavity(const EigenTuple& mu, QuotientOrder q, int trials, Rng& rng) {
  q.validate(mu.n());
  if (!in_gamma_k(mu, q.k)) throw ConeError("mu outside the Garding cone");
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> d(mu.size());
  double worst = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < trials; ++trial) {
    double norm = 0.0;
    for (double& x : d) {
      x = normal(rng);
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : d) x /= norm;
    worst = std::max(worst, second_directional_derivative(mu.values(), q, d));
  }
  return worst;
}

}  // namespace wcurv
