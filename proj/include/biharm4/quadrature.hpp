#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "biharm4/common.hpp"

namespace bh4 {

struct Quad1D {
  std::vector<double> x, w;
  int size() const { return static_cast<int>(x.size()); }
};

namespace detail {

// Golub-Welsch: nodes = eigenvalues of the Jacobi matrix, weights from the
// first eigenvector components scaled by the zeroth moment mu0.
inline Quad1D golub_welsch(const std::vector<double>& diag,
                           const std::vector<double>& offdiag, double mu0) {
  const int n = static_cast<int>(diag.size());
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) J(i, i) = diag[i];
  for (int i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = offdiag[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  Quad1D q;
  q.x.resize(n);
  q.w.resize(n);
  for (int i = 0; i < n; ++i) {
    q.x[i] = es.eigenvalues()(i);
    q.w[i] = mu0 * sq(es.eigenvectors()(0, i));
  }
  return q;
}

}  // namespace detail

// Gauss-Legendre on [-1,1], cached per order.
inline const Quad1D& gauss_legendre(int n) {
  static std::map<int, Quad1D> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> d(n, 0.0), e(n - 1);
  for (int k = 1; k < n; ++k) e[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  return cache.emplace(n, detail::golub_welsch(d, e, 2.0)).first->second;
}

inline Quad1D gauss_legendre_ab(int n, double a, double b) {
  const Quad1D& q = gauss_legendre(n);
  Quad1D out;
  out.x.resize(n);
  out.w.resize(n);
  const double c = 0.5 * (b - a), m = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    out.x[i] = m + c * q.x[i];
    out.w[i] = c * q.w[i];
  }
  return out;
}

// Generalized Gauss-Laguerre: weight t^alpha e^{-t} on [0,inf).
inline const Quad1D& gauss_laguerre(int n, double alpha) {
  static std::map<std::pair<int, int>, Quad1D> cache;  // alpha keyed in milli
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  const auto key = std::make_pair(n, static_cast<int>(std::lround(alpha * 1000)));
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::vector<double> d(n), e(n - 1);
  for (int k = 0; k < n; ++k) d[k] = 2.0 * k + alpha + 1.0;
  for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(k * (k + alpha));
  return cache.emplace(key, detail::golub_welsch(d, e, std::tgamma(alpha + 1.0)))
      .first->second;
}

// Gauss quadrature for weight sqrt(1-t^2) on [-1,1] (Chebyshev, 2nd kind);
// closed-form nodes and weights.
inline Quad1D chebyshev2(int n) {
  Quad1D q;
  q.x.resize(n);
  q.w.resize(n);
  for (int k = 1; k <= n; ++k) {
    const double th = k * kPi / (n + 1);
    q.x[k - 1] = std::cos(th);
    q.w[k - 1] = kPi / (n + 1) * sq(std::sin(th));
  }
  return q;
}

// Clenshaw-Curtis on [-1,1]; used as an independent backend in oracles.
inline Quad1D clenshaw_curtis(int n) {
  Quad1D q;
  q.x.resize(n + 1);
  q.w.resize(n + 1);
  for (int k = 0; k <= n; ++k) q.x[k] = std::cos(k * kPi / n);
  for (int k = 0; k <= n; ++k) {
    double s = 1.0;
    for (int j = 1; j <= n / 2; ++j) {
      const double bj = (2 * j == n) ? 1.0 : 2.0;
      s -= bj * std::cos(2.0 * j * k * kPi / n) / (4.0 * j * j - 1.0);
    }
    const double ck = (k == 0 || k == n) ? 1.0 : 2.0;
    q.w[k] = ck * s / n;
  }
  return q;
}

// First n positive zeros of J_1, McMahon start + Newton refinement.
inline std::vector<double> besselj1_zeros(int n) {
  std::vector<double> z(n);
  for (int k = 1; k <= n; ++k) {
    const double b = (k + 0.25) * kPi;
    double x = b - 3.0 / (8.0 * b);
    for (int it = 0; it < 30; ++it) {
      const double f = std::cyl_bessel_j(1, x);
      const double fp = 0.5 * (std::cyl_bessel_j(0, x) - std::cyl_bessel_j(2, x));
      const double dx = f / fp;
      x -= dx;
      if (std::abs(dx) < 1e-14 * x) break;
    }
    z[k - 1] = x;
  }
  return z;
}

// Composite Gauss panels over given breakpoints.
template <class F>
auto integrate_panels(F&& f, const std::vector<double>& breaks, int gl_order)
    -> decltype(f(0.0) * 1.0) {
  using R = decltype(f(0.0) * 1.0);
  R total{};
  const Quad1D& q = gauss_legendre(gl_order);
  for (size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p], b = breaks[p + 1];
    const double c = 0.5 * (b - a), m = 0.5 * (a + b);
    for (int i = 0; i < q.size(); ++i) total += (c * q.w[i]) * f(m + c * q.x[i]);
  }
  return total;
}

// Panel layout for int_0^B f(s) J_1(s*scale) ds style oscillatory integrands:
// breakpoints at the zeros of J_1(s*scale) inside (0,B].
inline std::vector<double> bessel_panel_breaks(double B, double scale) {
  std::vector<double> br{0.0};
  if (scale > 1e-12) {
    const double max_arg = B * scale;
    const int nz = static_cast<int>(max_arg / kPi) + 1;
    if (nz > 0 && max_arg > 4.0) {
      auto zs = besselj1_zeros(nz);
      for (double z : zs)
        if (z / scale < B) br.push_back(z / scale);
    }
  }
  br.push_back(B);
  return br;
}

}  // namespace bh4
