#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "biharm4/quadrature.hpp"

using namespace bh4;

TEST_CASE("Gauss-Legendre integrates polynomials exactly") {
  const Quad1D& q = gauss_legendre(8);
  for (int k = 0; k <= 15; ++k) {
    double s = 0.0;
    for (int i = 0; i < q.size(); ++i) s += q.w[i] * std::pow(q.x[i], k);
    const double exact = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
    REQUIRE(std::abs(s - exact) < 1e-13);
  }
}

TEST_CASE("Gauss-Legendre on [a,b]") {
  auto q = gauss_legendre_ab(16, 0.0, 2.0);
  double s = 0.0;
  for (int i = 0; i < q.size(); ++i) s += q.w[i] * std::exp(q.x[i]);
  REQUIRE(std::abs(s - (std::exp(2.0) - 1.0)) < 1e-12);
}

TEST_CASE("generalized Gauss-Laguerre alpha=1/2 moments") {
  // ∫_0^∞ t^{1/2} e^{-t} t^k dt = Γ(k + 3/2)
  const Quad1D& q = gauss_laguerre(64, 0.5);
  for (int k = 0; k <= 6; ++k) {
    double s = 0.0;
    for (int i = 0; i < q.size(); ++i) s += q.w[i] * std::pow(q.x[i], k);
    const double exact = std::tgamma(k + 1.5);
    REQUIRE(std::abs(s - exact) < 1e-11 * exact);
  }
}

TEST_CASE("Chebyshev-2 rule: weight sqrt(1-t^2)") {
  auto q = chebyshev2(40);
  double s0 = 0.0, s2 = 0.0, sc = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    s0 += q.w[i];
    s2 += q.w[i] * q.x[i] * q.x[i];
    sc += q.w[i] * std::cos(5.0 * q.x[i]);
  }
  REQUIRE(std::abs(s0 - kPi / 2.0) < 1e-13);
  REQUIRE(std::abs(s2 - kPi / 8.0) < 1e-13);
  // ∫ cos(at) sqrt(1-t^2) dt = π J_1(a)/a
  REQUIRE(std::abs(sc - kPi * std::cyl_bessel_j(1, 5.0) / 5.0) < 1e-12);
}

TEST_CASE("Clenshaw-Curtis agrees with Gauss-Legendre on smooth integrand") {
  auto cc = clenshaw_curtis(64);
  const Quad1D& gl = gauss_legendre(32);
  double a = 0.0, b = 0.0;
  for (int i = 0; i < cc.size(); ++i) a += cc.w[i] * std::exp(-cc.x[i] * cc.x[i]);
  for (int i = 0; i < gl.size(); ++i) b += gl.w[i] * std::exp(-gl.x[i] * gl.x[i]);
  REQUIRE(std::abs(a - b) < 1e-12);
}

TEST_CASE("J1 zeros") {
  auto z = besselj1_zeros(20);
  for (double zk : z) REQUIRE(std::abs(std::cyl_bessel_j(1, zk)) < 1e-12);
  REQUIRE(std::abs(z[0] - 3.8317059702075123) < 1e-10);
}

TEST_CASE("panel integration splits oscillatory Bessel integrands") {
  // ∫_0^B J_1(s c)/(s c) s^3 ds against a fine reference
  const double B = 2.0, c = 37.0;
  auto f = [&](double s) { return std::cyl_bessel_j(1, s * c) / (s * c) * s * s * s; };
  auto breaks = bessel_panel_breaks(B, c);
  const double val = integrate_panels(f, breaks, 8);
  std::vector<double> fine;
  for (int i = 0; i <= 4000; ++i) fine.push_back(B * i / 4000.0);
  const double ref = integrate_panels(f, fine, 4);
  REQUIRE(std::abs(val - ref) < 1e-10);
}
