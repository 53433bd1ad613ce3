#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <complex>

#include "biharm4/selfcheck.hpp"
#include "biharm4/special_kernels.hpp"

using namespace bh4;

namespace {
// independent harmonic-sum oracle, summed backwards in exact rationals
Rat harmonic_oracle(int n) {
  Rat h = rat(0, 1);
  for (int j = n; j >= 1; --j) h += rat(1, j);
  h += rat(1, 2 * (n + 1));
  return h;
}
}  // namespace

TEST_CASE("c_coeff frozen values and exact oracle") {
  REQUIRE(c_coeff(0) == rat(1, 2));
  REQUIRE(c_coeff(1) == rat(5, 4));
  REQUIRE(c_coeff(2) == rat(5, 3));
  for (int n = 0; n <= 50; ++n) REQUIRE(c_coeff(n) == harmonic_oracle(n));
}

TEST_CASE("g_log at reference points") {
  const double g2pi = kEulerGamma / (2.0 * kPi);
  auto a = g_log(cdouble(2.0, 0.0));
  REQUIRE(std::abs(a - cdouble(-g2pi, 0.25)) < 1e-15);
  auto b = g_log(cdouble(0.0, 2.0));
  REQUIRE(std::abs(b - cdouble(-g2pi, 0.0)) < 1e-15);
  auto c = g_log(cdouble(2.0 * std::exp(1.0), 0.0));
  REQUIRE(std::abs(c - cdouble(-1.0 / (2.0 * kPi) - g2pi, 0.25)) < 1e-15);
  REQUIRE_THROWS_AS(g_log(cdouble(0.0, 0.0)), std::domain_error);
}

TEST_CASE("green kernel: small-argument limit and positivity on +i axis") {
  // leading term 1/(4π² r²) dominates as |z| r -> 0
  const double r = 0.7;
  double prev = 1e300;
  for (double za : {1e-2, 1e-4, 1e-6}) {
    const cdouble z = za * cdouble(std::cos(0.3), std::sin(0.3));
    const double excess =
        std::abs(green_series(z, r) - 1.0 / (4.0 * kPi * kPi * r * r));
    REQUIRE(excess < prev);
    prev = excess;
  }
  REQUIRE(prev < 1e-12);

  // (-Δ + t²)^{-1} kernel is real and positive
  for (double t : {0.3, 1.0, 4.0}) {
    for (double rr : {0.2, 1.0, 3.0}) {
      const cdouble v = green_kernel(cdouble(0.0, t), rr);
      REQUIRE(std::abs(v.imag()) < 1e-12 * std::abs(v));
      REQUIRE(v.real() > 0.0);
    }
  }
}

TEST_CASE("green kernel dual route agrees on the overlap band") {
  auto rep = green_dual_route_sweep(50, 20240601ull);
  REQUIRE(rep.max_relerr < 1e-8);
}

TEST_CASE("green kernel rejects bad arguments") {
  REQUIRE_THROWS_AS(green_kernel(cdouble(1.0, -0.1), 1.0), std::domain_error);
  REQUIRE_THROWS_AS(green_kernel(cdouble(0.0, 0.0), 1.0), std::domain_error);
  REQUIRE_THROWS_AS(green_kernel(cdouble(1.0, 0.0), 0.0), std::domain_error);
}

TEST_CASE("calR: r = 0 gives the constant descent term") {
  for (double l : {0.3, 1.0, 2.5}) {
    REQUIRE(std::abs(calR(l, 0.0) - gtilde(0, l)) == 0.0);
  }
}

TEST_CASE("calR dual route agrees on the overlap band") {
  REQUIRE(calR_dual_route_max_relerr(60, 77ull) < 1e-8);
}

TEST_CASE("calR stays finite as r -> 0 relative to the log term") {
  // calR(λ, r) - N0(r) -> g̃0(λ) as r -> 0
  const double l = 0.8;
  const cdouble v = calR(l, 1e-8) - N0_kernel(1e-8 * l) / 1.0;
  // N0 of the product variable: calR(μ) + log(μ)/(8π²) -> g-like constant
  const cdouble w = calR_series(l * 1e-8) + std::log(l * 1e-8) / (8.0 * kPi * kPi);
  REQUIRE(std::isfinite(w.real()));
  REQUIRE(std::isfinite(w.imag()));
  (void)v;
  // imaginary part of the μ->0 limit is 1/(32π)
  REQUIRE(std::abs(w.imag() - 1.0 / (32.0 * kPi)) < 1e-10);
}

TEST_CASE("descent terms: frozen low-order values") {
  REQUIRE(N0_kernel(1.0) == 0.0);
  REQUIRE(std::abs(G2_kernel(2.0) - cdouble(0.0, -1.0 / (64.0 * kPi))) < 1e-18);

  auto t0 = descent_term(0, 2.0);
  REQUIRE(std::abs(t0.poly - cdouble(1.0, 0.0)) < 1e-15);
  REQUIRE(std::abs(t0.logpart - cdouble(N0_kernel(2.0), 0.0)) < 1e-15);

  auto t1 = descent_term(1, 2.0);
  REQUIRE(std::abs(t1.poly - G2_kernel(2.0)) < 1e-18);
  REQUIRE(!t1.has_log);

  auto t2 = descent_term(2, 2.0);
  REQUIRE(std::abs(t2.poly - cdouble(G4_kernel(2.0), 0.0)) < 1e-15);
  REQUIRE(std::abs(t2.logpart - cdouble(G4l_kernel(2.0), 0.0)) < 1e-15);

  auto s0 = descent_term(0, 0.0);
  REQUIRE(s0.log_singular);
  REQUIRE(std::isinf(s0.logpart.real()));
}

TEST_CASE("descent partial sums approximate calR to O(λ^6 log λ)") {
  const double r = 1.3;
  for (double l : {0.05, 0.02, 0.008}) {
    const cdouble rem = calR(l, r) - descent_partial(2, l, r);
    const double bound = std::pow(l, 6) * logbracket(l * r) * std::pow(r, 6);
    REQUIRE(std::abs(rem) < 10.0 * bound);
  }
}

TEST_CASE("remainder: definitional spot value and vanishing limit") {
  const double l = 0.1, r = 1.0;
  const cdouble direct = calR(l, r) - gtilde(0, l) - N0_kernel(r);
  REQUIRE(std::abs(remainder(1, l, r) - direct) < 1e-15);

  // |remainder| / (λ² <log λr> r²) stays bounded, and remainder -> 0
  double prev_ratio = 0.0;
  for (double ll : {0.1, 0.01, 0.001}) {
    const double ratio =
        std::abs(remainder(1, ll, r)) / (ll * ll * logbracket(ll * r) * r * r);
    REQUIRE(ratio < 0.1);  // coefficient-scale constant
    prev_ratio = ratio;
  }
  (void)prev_ratio;
  REQUIRE(std::abs(remainder(1, 1e-5, r)) < 1e-8);
}

TEST_CASE("descent Taylor fit recovers the frozen coefficients") {
  for (double r : {0.5, 1.0, 2.0}) {
    auto fit = descent_taylor_fit(r, descent_fit_lambdas(r));
    const double n0 = N0_kernel(r);
    const cdouble g2 = G2_kernel(r);
    const double g4 = G4_kernel(r), g4l = G4l_kernel(r);
    if (r == 1.0) {
      REQUIRE(std::abs(fit.n0 - n0) < 1e-8);
      REQUIRE(std::abs(fit.g4l - g4l) < 1e-8 * std::abs(g4));
    } else {
      REQUIRE(std::abs(fit.n0 - n0) < 1e-6 * std::abs(n0));
      REQUIRE(std::abs(fit.g4l - g4l) < 1e-6 * std::abs(g4l));
    }
    REQUIRE(std::abs(fit.g2 - g2) < 1e-6 * std::abs(g2));
    REQUIRE(std::abs(fit.g4 - g4) < 1e-6 * std::abs(g4));
  }
}

TEST_CASE("growth bounds: |∂_λ^j calR| follows the two-regime shape") {
  // first regime: μ <= 1, |∂^j calR| <= C λ^{-j} <log μ>
  // second regime: μ >= 1, |∂^j calR| <= C r^j <μ>^{-3/2}
  for (int j = 0; j <= 3; ++j) {
    double cmax = 0.0, cmin = 1e300;
    for (double mu : {1e-3, 1e-2, 1e-1, 0.5}) {
      const double l = mu, r = 1.0;  // μ = λ with r = 1
      const double num = std::abs(calR_dlambda(j, l, r));
      const double ratio = num / (std::pow(l, -j) * logbracket(mu));
      cmax = std::max(cmax, ratio);
      cmin = std::min(cmin, ratio);
    }
    REQUIRE(cmax < 1.0);  // desk-scale constant
    for (double mu : {2.0, 8.0, 32.0, 128.0}) {
      const double l = mu, r = 1.0;
      const double num = std::abs(calR_dlambda(j, l, r));
      const double ratio = num / std::pow(jbracket(mu), -1.5);
      REQUIRE(ratio < 1.0);
    }
  }
}
