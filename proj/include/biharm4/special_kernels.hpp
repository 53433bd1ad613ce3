#pragma once

// Explicit kernels attached to the free operators Δ² and -Δ on R^4.
//
//   green_kernel(z, r)  kernel of (-Δ - z²)^{-1} at |x| = r, for z in the
//                       closed upper-right quadrant; power series for small
//                       |z|r, semi-infinite integral representation for
//                       large |z|r, with an overlap band where both work.
//   calR(λ, r)          boundary kernel of (Δ² - λ⁴ - i0)^{-1}; a function
//                       of the single product μ = λr,
//                       calR = (green(λ,r) - green(iλ,r)) / (2λ²).
//   descent terms       small-λ ordering of calR into
//                       g̃₀(λ) + N0(r) + λ²G2(r) + λ⁴(g̃₂(λ)G4(r)+G4l(r)) + …

#include <cmath>
#include <complex>
#include <stdexcept>

#include "biharm4/common.hpp"
#include "biharm4/quadrature.hpp"

namespace bh4 {

// ---------------------------------------------------------------------------
// Exact rational c_n = 1/(2(n+1)) + H_n with H_n the n-th harmonic number.
// 128-bit integers hold the exact value comfortably through n = 50.
struct Rat {
  __int128 num = 0, den = 1;

  static __int128 gcd(__int128 a, __int128 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    return a;
  }
  void normalize() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const __int128 g = gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  Rat& operator+=(const Rat& o) {
    num = num * o.den + o.num * den;
    den *= o.den;
    normalize();
    return *this;
  }
  bool operator==(const Rat& o) const { return num == o.num && den == o.den; }
  double value() const {
    return static_cast<double>(num) / static_cast<double>(den);
  }
};

inline Rat rat(long long n, long long d) {
  Rat r{n, d};
  r.normalize();
  return r;
}

inline Rat c_coeff(int n) {
  if (n < 0) throw std::invalid_argument("c_coeff: n must be >= 0");
  Rat c = rat(1, 2 * (static_cast<long long>(n) + 1));
  for (long long j = 1; j <= n; ++j) c += rat(1, j);
  return c;
}

// cached double values of c_n for the series hot path
inline double c_coeff_d(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(80);
    double h = 0.0;
    for (int k = 0; k < 80; ++k) {
      t[k] = 1.0 / (2.0 * (k + 1)) + h;
      h += 1.0 / (k + 1);
    }
    return t;
  }();
  return n < 80 ? table[n] : c_coeff(n).value();
}

// ---------------------------------------------------------------------------
// g(z) = -(1/2π) log(z/2) - γ/(2π) + i/4, principal branch, z != 0.
inline cdouble g_log(cdouble z) {
  if (z == cdouble(0.0, 0.0)) throw std::domain_error("g_log: z = 0");
  return -std::log(z / 2.0) / (2.0 * kPi) - kEulerGamma / (2.0 * kPi) +
         cdouble(0.0, 0.25);
}

// g̃_n(λ) = (1/4π)(g(λ) + c_n/2π - i/8)
inline cdouble gtilde(int n, double lambda) {
  return (g_log(cdouble(lambda, 0.0)) + c_coeff(n).value() / (2.0 * kPi) -
          cdouble(0.0, 0.125)) /
         (4.0 * kPi);
}

// ---------------------------------------------------------------------------
// Evaluation-regime switch. Both routes are valid on [0.5, 2]; the default
// crossover sits where the two estimates trade accuracy.
struct KernelRegime {
  enum Mode { SeriesSmallArg, IntegralLargeArg };
  double crossover = 1.0;

  KernelRegime() = default;
  explicit KernelRegime(double c) : crossover(c) {
    if (c < 0.5 || c > 2.0)
      throw std::invalid_argument("KernelRegime: crossover outside [0.5, 2]");
  }
  Mode pick(double mu) const {
    return mu < crossover ? SeriesSmallArg : IntegralLargeArg;
  }
};

namespace detail {

inline constexpr int kSeriesMaxTerms = 60;
inline constexpr double kSeriesRelTol = 1e-16;

// Series for the -Δ kernel:
//   1/(4π²r²) + (z²/4π) Σ_n (g(z) + c_n/2π - log r/2π) (-z²r²/4)^n / (n!(n+1)!)
inline cdouble green_series(cdouble z, double r) {
  const cdouble gz = g_log(z);
  const double logr = std::log(r);
  const cdouble base = -z * z * (r * r) / 4.0;
  cdouble pow{1.0, 0.0};
  double inv_fact = 1.0;  // 1/(n!(n+1)!)
  cdouble sum{0.0, 0.0};
  for (int n = 0; n < kSeriesMaxTerms; ++n) {
    if (n > 0) {
      pow *= base;
      inv_fact /= static_cast<double>(n) * (n + 1);
    }
    const cdouble term =
        (gz + (c_coeff_d(n) - logr) / (2.0 * kPi)) * pow * inv_fact;
    sum += term;
    if (std::abs(term) < kSeriesRelTol * (std::abs(sum) + 1e-300) && n > 2) break;
  }
  return 1.0 / (4.0 * kPi * kPi * r * r) + z * z / (4.0 * kPi) * sum;
}

// Integral representation, weight e^{-t} t^{1/2} absorbed by generalized
// Gauss-Laguerre (α = 1/2):
//   G_z(r) = e^{izr} / ((2π)^{3/2} √π r²) * (1/2) ∫ e^{-t} t^{1/2} (t/2 - izr)^{1/2} dt
// (prefactor written with Γ(3/2) = √π/2 folded in).
inline constexpr int kLaguerreNodes = 64;

inline clongd green_integral_ld(clongd z, long double r) {
  const Quad1D& q = gauss_laguerre(kLaguerreNodes, 0.5);
  const clongd izr = clongd(0.0L, 1.0L) * z * r;
  clongd acc{0.0L, 0.0L};
  for (int k = 0; k < q.size(); ++k) {
    const clongd arg = clongd(q.x[k] / 2.0L, 0.0L) - izr;
    acc += static_cast<long double>(q.w[k]) * std::sqrt(arg);
  }
  const long double pref =
      1.0L / (2.0L * std::pow(2.0L * static_cast<long double>(kPi), 1.5L) *
              std::sqrt(static_cast<long double>(kPi)) * r * r);
  // overall 1/(2 (2π)^{3/2} Γ(3/2) r²) with Γ(3/2) = √π/2
  return std::exp(izr) * 2.0L * pref * acc;
}

inline cdouble green_integral(cdouble z, double r) {
  const clongd v = green_integral_ld(clongd(z.real(), z.imag()), r);
  return cdouble(static_cast<double>(v.real()), static_cast<double>(v.imag()));
}

// Series for calR as a function of μ = λ|x|:
//   Σ_{n even} g̃_n(μ) p_n - (i/32π) Σ_{n odd} p_n,  p_n = (μ²/4)^n / (n!(n+1)!)
template <class Real>
std::complex<Real> calR_series_t(Real mu) {
  using C = std::complex<Real>;
  const Real pi = static_cast<Real>(kPi);
  const C g0 = -std::log(C(mu / 2, 0)) / (2 * pi) -
               static_cast<Real>(kEulerGamma) / (2 * pi) + C(0, Real(0.25));
  const Real base = mu * mu / 4;
  Real pow = 1, inv_fact = 1;
  C sum{0, 0};
  for (int n = 0; n < kSeriesMaxTerms; ++n) {
    if (n > 0) {
      pow *= base;
      inv_fact /= static_cast<Real>(n) * (n + 1);
    }
    C term;
    if (n % 2 == 0) {
      const C gt = (g0 + static_cast<Real>(c_coeff_d(n)) / (2 * pi) -
                    C(0, Real(0.125))) /
                   (4 * pi);
      term = gt * pow * inv_fact;
    } else {
      term = C(0, Real(-1) / (32 * pi)) * pow * inv_fact;
    }
    sum += term;
    if (std::abs(term) < static_cast<Real>(kSeriesRelTol) * std::abs(sum) && n > 2)
      break;
  }
  return sum;
}

// Integral route for calR = (G_λ - G_{iλ}) / (2λ²), as a function of μ = λr:
//   calR(μ) = [ e^{iμ} ∫ e^{-t} t^{1/2}(t/2 - iμ)^{1/2} dt
//             - e^{-μ} ∫ e^{-t} t^{1/2}(t/2 + μ)^{1/2} dt ] / (4 (2π)^{3/2} Γ(3/2) μ²)
// The 1/μ² parts of the two Green kernels cancel; long double keeps the
// cancellation harmless at small μ.  (Writing this as a difference of one
// analytically-continued H(·) flips the sign of the second term through
// (iμ)² = -μ²; the combination below is the one matching the definition.)
// ∫_0^∞ e^{-t} t^{1/2} (t/2 + c)^{1/2} dt by panels after t = u²; the branch
// point sits at |u| ~ sqrt(2|c|), so panels shrink geometrically there.  Used
// when the branch point is too close to the contour for Gauss-Laguerre.
inline clongd sqrt_weight_integral_ld(clongd c) {
  std::vector<double> br{0.0};
  const double s = std::sqrt(2.0 * std::max(1e-30, std::abs(cdouble(
                                 static_cast<double>(c.real()),
                                 static_cast<double>(c.imag())))));
  for (double m : {0.5, 1.0, 2.0, 4.0})
    if (m * s < 0.5) br.push_back(m * s);
  for (double t = 0.5; t <= 8.01; t += 0.5) br.push_back(t);
  const Quad1D& q = gauss_legendre(20);
  clongd total{0.0L, 0.0L};
  for (size_t p = 0; p + 1 < br.size(); ++p) {
    const long double a = br[p], b = br[p + 1];
    const long double hw = (b - a) / 2.0L, mid = (a + b) / 2.0L;
    for (int i = 0; i < q.size(); ++i) {
      const long double u = mid + hw * static_cast<long double>(q.x[i]);
      total += (hw * static_cast<long double>(q.w[i])) * 2.0L * u * u *
               std::exp(-u * u) * std::sqrt(clongd(u * u / 2.0L, 0.0L) + c);
    }
  }
  return total;
}

inline clongd calR_hankel_ld(long double mu) {
  const clongd imu(0.0L, mu);
  clongd acc_p{0.0L, 0.0L}, acc_m{0.0L, 0.0L};
  if (mu >= 1.0L) {
    const Quad1D& q = gauss_laguerre(kLaguerreNodes, 0.5);
    long double am = 0.0L;
    for (int k = 0; k < q.size(); ++k) {
      const long double t2 = q.x[k] / 2.0L;
      acc_p += static_cast<long double>(q.w[k]) * std::sqrt(clongd(t2, 0.0L) - imu);
      am += static_cast<long double>(q.w[k]) * std::sqrt(t2 + mu);
    }
    acc_m = am;
  } else {
    acc_p = sqrt_weight_integral_ld(-imu);
    acc_m = sqrt_weight_integral_ld(clongd(mu, 0.0L));
  }
  const long double pi = static_cast<long double>(kPi);
  const long double pref =
      1.0L / (2.0L * std::pow(2.0L * pi, 1.5L) * std::sqrt(pi) * mu * mu);
  return pref * (std::exp(imu) * acc_p - std::exp(-mu) * acc_m);
}

// Fast path for μ >= 1: calR(μ) = pref(μ) (e^{iμ} F(μ) - e^{-μ} G(μ)) with the
// smooth non-oscillatory factors
//   F(μ) = ∫ e^{-t} t^{1/2} (t/2 - iμ)^{1/2} dt,
//   G(μ) = ∫ e^{-t} t^{1/2} (t/2 + μ)^{1/2} dt
// tabulated by Chebyshev interpolation in log μ on dyadic panels.
struct CalRTable {
  static constexpr int kDeg = 24;
  static constexpr int kPanels = 13;  // [1, 2, 4, ..., 8192]
  // coefficients per panel: Re F, Im F, G
  double fr[kPanels][kDeg], fi[kPanels][kDeg], gg[kPanels][kDeg];

  static const CalRTable& instance() {
    static CalRTable t;
    return t;
  }

  CalRTable() {
    const Quad1D& q = gauss_laguerre(kLaguerreNodes, 0.5);
    for (int p = 0; p < kPanels; ++p) {
      const double lo = std::log(std::pow(2.0, p)), hi = std::log(std::pow(2.0, p + 1));
      double vfr[kDeg], vfi[kDeg], vg[kDeg];
      for (int k = 0; k < kDeg; ++k) {
        const double th = kPi * (k + 0.5) / kDeg;
        const double mu = std::exp(0.5 * (lo + hi) + 0.5 * (hi - lo) * std::cos(th));
        clongd F{0.0L, 0.0L};
        long double G = 0.0L;
        for (int i = 0; i < q.size(); ++i) {
          const long double t2 = q.x[i] / 2.0L;
          F += static_cast<long double>(q.w[i]) *
               std::sqrt(clongd(t2, -static_cast<long double>(mu)));
          G += static_cast<long double>(q.w[i]) * std::sqrt(t2 + static_cast<long double>(mu));
        }
        vfr[k] = static_cast<double>(F.real());
        vfi[k] = static_cast<double>(F.imag());
        vg[k] = static_cast<double>(G);
      }
      // Chebyshev coefficients by DCT
      for (int j = 0; j < kDeg; ++j) {
        double ar = 0, ai = 0, ag = 0;
        for (int k = 0; k < kDeg; ++k) {
          const double c = std::cos(j * kPi * (k + 0.5) / kDeg);
          ar += vfr[k] * c;
          ai += vfi[k] * c;
          ag += vg[k] * c;
        }
        const double scale = (j == 0 ? 1.0 : 2.0) / kDeg;
        fr[p][j] = ar * scale;
        fi[p][j] = ai * scale;
        gg[p][j] = ag * scale;
      }
    }
  }

  bool covers(double mu) const { return mu >= 1.0 && mu < 8192.0; }

  void eval(double mu, cdouble& F, double& G) const {
    const int p = std::min(kPanels - 1, std::max(0, static_cast<int>(std::log2(mu))));
    const double lo = std::log(std::pow(2.0, p)), hi = std::log(std::pow(2.0, p + 1));
    const double x = 2.0 * (std::log(mu) - lo) / (hi - lo) - 1.0;
    // Clenshaw
    double br1 = 0, br2 = 0, bi1 = 0, bi2 = 0, bg1 = 0, bg2 = 0;
    for (int j = kDeg - 1; j >= 1; --j) {
      const double tr = 2.0 * x * br1 - br2 + fr[p][j];
      br2 = br1;
      br1 = tr;
      const double ti = 2.0 * x * bi1 - bi2 + fi[p][j];
      bi2 = bi1;
      bi1 = ti;
      const double tg = 2.0 * x * bg1 - bg2 + gg[p][j];
      bg2 = bg1;
      bg1 = tg;
    }
    F = cdouble(fr[p][0] + x * br1 - br2, fi[p][0] + x * bi1 - bi2);
    G = gg[p][0] + x * bg1 - bg2;
  }
};

inline cdouble calR_hankel_fast(double mu) {
  const CalRTable& t = CalRTable::instance();
  if (!t.covers(mu)) {
    const clongd v = calR_hankel_ld(mu);
    return cdouble(static_cast<double>(v.real()), static_cast<double>(v.imag()));
  }
  cdouble F;
  double G;
  t.eval(mu, F, G);
  const double pref =
      1.0 / (2.0 * std::pow(2.0 * kPi, 1.5) * std::sqrt(kPi) * mu * mu);
  return pref * (std::exp(cdouble(0.0, mu)) * F - std::exp(-mu) * G);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Public kernel evaluators.

inline cdouble green_kernel(cdouble z, double r,
                            const KernelRegime& regime = KernelRegime{}) {
  if (r <= 0.0) throw std::domain_error("green_kernel: r must be > 0");
  if (z == cdouble(0.0, 0.0)) throw std::domain_error("green_kernel: z = 0");
  if (z.imag() < 0.0 || z.real() < 0.0)
    throw std::domain_error("green_kernel: z outside closed upper-right quadrant");
  return regime.pick(std::abs(z) * r) == KernelRegime::SeriesSmallArg
             ? detail::green_series(z, r)
             : detail::green_integral(z, r);
}

inline cdouble green_series(cdouble z, double r) { return detail::green_series(z, r); }
inline cdouble green_integral(cdouble z, double r) { return detail::green_integral(z, r); }

// calR as a function of the product μ = λ|x|.
inline cdouble calR_of_mu(double mu, const KernelRegime& regime = KernelRegime{}) {
  if (regime.pick(mu) == KernelRegime::SeriesSmallArg)
    return detail::calR_series_t<double>(mu);
  return detail::calR_hankel_fast(mu);
}

inline cdouble calR_series(double mu) { return detail::calR_series_t<double>(mu); }
inline cdouble calR_hankel(double mu) {
  const clongd v = detail::calR_hankel_ld(mu);
  return cdouble(static_cast<double>(v.real()), static_cast<double>(v.imag()));
}

inline cdouble calR(double lambda, double r,
                    const KernelRegime& regime = KernelRegime{}) {
  if (lambda <= 0.0) throw std::domain_error("calR: lambda must be > 0");
  if (r < 0.0) throw std::domain_error("calR: r must be >= 0");
  if (r == 0.0) return gtilde(0, lambda);  // constant descent term
  return calR_of_mu(lambda * r, regime);
}

// ---------------------------------------------------------------------------
// Descent-expansion terms.  Order n contributes
//   even n : λ^{2n} ( g̃_n(λ) * poly(r) + logpart(r) )
//   odd  n : λ^{2n} *  poly(r)                       (no g̃ factor, no log)
struct DescentTerm {
  int order = 0;
  cdouble poly{0.0, 0.0};   // G_{2n}(r)
  cdouble logpart{0.0, 0.0};  // G_{2n,l}(r); zero for odd n
  bool has_log = false;
  bool log_singular = false;  // r == 0 hit a log term
};

inline double descent_inv_fact(int n) {
  double f = 1.0;
  for (int k = 1; k <= n; ++k) f /= 4.0 * k * (k + 1);  // 1/(4^n n!(n+1)!)
  return f;
}

inline DescentTerm descent_term(int n, double r) {
  if (n < 0) throw std::invalid_argument("descent_term: n must be >= 0");
  DescentTerm t;
  t.order = n;
  const double c = descent_inv_fact(n);
  const double rp = std::pow(r, 2 * n);
  if (n % 2 == 0) {
    t.poly = rp * c;
    t.has_log = true;
    if (r == 0.0) {
      t.log_singular = (n == 0);
      t.logpart = (n == 0)
                      ? cdouble(std::numeric_limits<double>::infinity(), 0.0)
                      : cdouble(0.0, 0.0);
    } else {
      t.logpart = -rp * std::log(r) * c / (8.0 * kPi * kPi);
    }
  } else {
    t.poly = cdouble(0.0, -1.0 / (32.0 * kPi)) * rp * c;
  }
  return t;
}

// Named low-order terms.
inline double N0_kernel(double r) { return -std::log(r) / (8.0 * kPi * kPi); }
inline cdouble G2_kernel(double r) { return cdouble(0.0, -r * r / (256.0 * kPi)); }
inline double G4_kernel(double r) { return std::pow(r, 4) / 192.0; }
inline double G4l_kernel(double r) {
  return r == 0.0 ? 0.0 : -std::pow(r, 4) * std::log(r) / (1536.0 * kPi * kPi);
}

// Partial descent sum through order 2m (m = -1 gives 0).
inline cdouble descent_partial(int m, double lambda, double r) {
  cdouble s{0.0, 0.0};
  if (m >= 0) s += gtilde(0, lambda) + N0_kernel(r);
  if (m >= 1) s += sq(lambda) * G2_kernel(r);
  if (m >= 2)
    s += std::pow(lambda, 4) * (gtilde(2, lambda) * G4_kernel(r) + G4l_kernel(r));
  return s;
}

// calR minus the descent partial sum through order 2(n-1).
inline cdouble remainder(int n, double lambda, double r,
                         const KernelRegime& regime = KernelRegime{}) {
  if (n < 1 || n > 2) throw std::invalid_argument("remainder: n in {1,2}");
  return calR(lambda, r, regime) - descent_partial(n - 1, lambda, r);
}

// ---------------------------------------------------------------------------
// Central finite differences of calR in λ.  Step sizes widen with the order
// so the difference stays above the double-precision noise floor.
inline double fd_step(int j, double lambda) {
  if (j == 1) return std::max(1e-5, 1e-5 * lambda);
  static constexpr double rel[4] = {0.0, 1e-5, 1e-4, 2e-3};
  return rel[j] * lambda;  // relative for higher orders; keeps stencils in (0,inf)
}

inline cdouble calR_dlambda(int j, double lambda, double r,
                            const KernelRegime& regime = KernelRegime{}) {
  if (j == 0) return calR(lambda, r, regime);
  const double h = fd_step(j, lambda);
  auto f = [&](double l) { return calR(l, r, regime); };
  switch (j) {
    case 1:
      return (f(lambda + h) - f(lambda - h)) / (2.0 * h);
    case 2:
      return (f(lambda + h) - 2.0 * f(lambda) + f(lambda - h)) / (h * h);
    case 3:
      return (0.5 * f(lambda + 2 * h) - f(lambda + h) + f(lambda - h) -
              0.5 * f(lambda - 2 * h)) /
             (h * h * h);
    default:
      throw std::invalid_argument("calR_dlambda: j <= 3");
  }
}

}  // namespace bh4
