#pragma once

// 4-D quadrature grid: Gauss-Legendre radial shells times a spherical design
// on S^3.  The node set discretizes L²(R⁴) for all the integral operators;
// weights carry the r³ volume factor.

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "biharm4/common.hpp"
#include "biharm4/quadrature.hpp"

namespace bh4 {

using Mat4 = Eigen::Matrix<double, Eigen::Dynamic, 4>;

// 48-point spherical design on S^3 (D4 root system plus its dual), exact for
// polynomials through degree 7.
inline Mat4 sphere_design48() {
  Mat4 pts(48, 4);
  int row = 0;
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      for (int si = -1; si <= 1; si += 2)
        for (int sj = -1; sj <= 1; sj += 2) {
          pts.row(row).setZero();
          pts(row, i) = si * s;
          pts(row, j) = sj * s;
          ++row;
        }
  for (int i = 0; i < 4; ++i)
    for (int si = -1; si <= 1; si += 2) {
      pts.row(row).setZero();
      pts(row, i) = si;
      ++row;
    }
  for (int m = 0; m < 16; ++m) {
    for (int i = 0; i < 4; ++i) pts(row, i) = (m >> i & 1) ? 0.5 : -0.5;
    ++row;
  }
  return pts;
}

struct Grid4 {
  Mat4 nodes;              // n x 4 node coordinates
  Eigen::VectorXd w;       // combined quadrature weights
  Eigen::VectorXd r;       // |x_i|
  std::vector<double> radial_nodes, radial_weights;
  Mat4 sph;                // unit vectors of the spherical rule
  double sph_weight = 0.0; // equal weight per direction
  double r_max = 0.0;
  int n_radial = 0;

  int size() const { return static_cast<int>(w.size()); }
  // linear size of the quadrature cell at node i
  double local_spacing(int i) const { return std::pow(w[i], 0.25); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += w[i] * f(nodes.row(i));
    return s;
  }
  template <class F>
  double integrate_radial(F&& f) const {
    double s = 0.0;
    for (size_t k = 0; k < radial_nodes.size(); ++k)
      s += radial_weights[k] * f(radial_nodes[k]);
    return s;
  }
  // L2 inner product and norm of sampled functions
  double dot(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return (w.array() * a.array() * b.array()).sum();
  }
  double norm2(const Eigen::VectorXd& a) const {
    return std::sqrt((w.array() * a.array().square()).sum());
  }
  double norm_p(const Eigen::VectorXd& a, double p) const {
    return std::pow((w.array() * a.array().abs().pow(p)).sum(), 1.0 / p);
  }
};

inline Grid4 build_grid(int n_radial, double r_max, int spherical_order = 6) {
  if (n_radial < 8) throw std::invalid_argument("build_grid: n_radial >= 8");
  if (r_max <= 0.0) throw std::invalid_argument("build_grid: r_max > 0");
  if (spherical_order > 7)
    throw std::invalid_argument(
        "build_grid: spherical rule is exact through degree 7 only");
  Grid4 g;
  g.r_max = r_max;
  g.n_radial = n_radial;
  g.sph = sphere_design48();
  const int m = static_cast<int>(g.sph.rows());
  g.sph_weight = kSurfS3 / m;

  auto q = gauss_legendre_ab(n_radial, 0.0, r_max);
  g.radial_nodes = q.x;
  g.radial_weights.resize(n_radial);
  for (int k = 0; k < n_radial; ++k)
    g.radial_weights[k] = q.w[k] * std::pow(q.x[k], 3) * kSurfS3;

  const int n = n_radial * m;
  g.nodes.resize(n, 4);
  g.w.resize(n);
  g.r.resize(n);
  for (int k = 0; k < n_radial; ++k) {
    const double rk = q.x[k];
    const double wk = q.w[k] * std::pow(rk, 3) * g.sph_weight;
    for (int j = 0; j < m; ++j) {
      const int i = k * m + j;
      g.nodes.row(i) = rk * g.sph.row(j);
      g.w[i] = wk;
      g.r[i] = rk;
    }
  }
  return g;
}

}  // namespace bh4
