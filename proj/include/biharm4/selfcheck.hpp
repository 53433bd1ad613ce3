#pragma once

// Kernel self-verification used by the `kernels selftest` subcommand and the
// acceptance suite: dual-route agreement sweeps and recovery of the descent
// coefficients from a small-λ Taylor fit of the integral-route values.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "biharm4/special_kernels.hpp"

namespace bh4 {

struct DualRouteSample {
  cdouble z;
  double r = 0.0;
  cdouble series{0.0, 0.0};
  cdouble integral{0.0, 0.0};
  double relerr = 0.0;
};

struct DualRouteReport {
  std::vector<DualRouteSample> samples;
  double max_relerr = 0.0;
};

// Random (z, r) with 0.5 <= |z| r <= 2, z in the closed upper-right quadrant.
inline DualRouteReport green_dual_route_sweep(int n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uarg(0.0, kPi / 2.0);
  std::uniform_real_distribution<double> umu(0.5, 2.0);
  std::uniform_real_distribution<double> ur(0.1, 5.0);
  DualRouteReport rep;
  rep.samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    DualRouteSample s;
    s.r = ur(rng);
    const double mu = umu(rng), th = uarg(rng);
    const double zabs = mu / s.r;
    s.z = zabs * cdouble(std::cos(th), std::sin(th));
    s.series = green_series(s.z, s.r);
    s.integral = green_integral(s.z, s.r);
    s.relerr = std::abs(s.series - s.integral) / std::abs(s.integral);
    rep.max_relerr = std::max(rep.max_relerr, s.relerr);
    rep.samples.push_back(s);
  }
  return rep;
}

// Same sweep for calR (series vs Hankel difference), driven by μ alone.
inline double calR_dual_route_max_relerr(int n, unsigned long long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> umu(0.5, 2.0);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double mu = umu(rng);
    const cdouble a = calR_series(mu), b = calR_hankel(mu);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  return worst;
}

struct DescentFit {
  cdouble n0, g2, g4, g4l;  // fitted values of N0(r), G2(r), G4(r), G4l(r)
};

// Least-squares fit of  calR(λ r) - g̃₀(λ)  against
//   { 1, λ², λ⁴ g̃₂(λ), λ⁴, λ⁶, λ⁸ g̃₀(λ), λ⁸ }
// (the last three columns are sacrificial and absorb the next two descent
// orders exactly) using long-double integral-route values, so the recovered
// coefficients are independent of the frozen descent constants.
inline DescentFit descent_taylor_fit(double r, const std::vector<double>& lambdas) {
  const int m = static_cast<int>(lambdas.size());
  const int nc = 7;
  Eigen::MatrixXcd A(m, nc);
  Eigen::VectorXcd y(m);
  for (int i = 0; i < m; ++i) {
    const double l = lambdas[i];
    const clongd v = detail::calR_hankel_ld(static_cast<long double>(l) * r);
    y(i) = cdouble(static_cast<double>(v.real()), static_cast<double>(v.imag())) -
           gtilde(0, l);
    A(i, 0) = 1.0;
    A(i, 1) = l * l;
    A(i, 2) = std::pow(l, 4) * gtilde(2, l);
    A(i, 3) = std::pow(l, 4);
    A(i, 4) = std::pow(l, 6);
    A(i, 5) = std::pow(l, 8) * gtilde(0, l);
    A(i, 6) = std::pow(l, 8);
  }
  // column scaling keeps the normal system well conditioned
  Eigen::VectorXd scale(nc);
  for (int j = 0; j < nc; ++j) scale(j) = A.col(j).norm();
  for (int j = 0; j < nc; ++j) A.col(j) /= scale(j);
  Eigen::VectorXcd c = A.colPivHouseholderQr().solve(y);
  for (int j = 0; j < nc; ++j) c(j) /= scale(j);
  return DescentFit{c(0), c(1), c(2), c(3)};
}

// λ samples chosen so the product μ = λ r sweeps a fixed band; this keeps the
// λ⁴ columns above the quadrature noise floor for every r.
inline std::vector<double> descent_fit_lambdas(double r) {
  std::vector<double> ls;
  const double lo = 0.03 / r, hi = 0.45 / r;
  const int m = 14;
  for (int i = 0; i < m; ++i)
    ls.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (m - 1)));
  return ls;
}

}  // namespace bh4
