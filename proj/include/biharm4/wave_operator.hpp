#pragma once

// Stationary wave-operator machinery on test functions u with û supported in
// an annulus [α, β] ⊂ (0, ∞):
//   Π(λ)u(x) = (1/(2π)²) ∫_{S³} e^{iλ x·ω} û(λω) dω    (spectral projection)
//   K u(x)   = ∫ calR(λ|x|) (Π(λ)u)(0) λ³ dλ
//   W_n χ_{≥a} u = ∫ R₀(λ⁴) (M_V R₀(λ⁴))^{n-1} M_V Π(λ)u λ³ χ_{≥a}(λ) dλ
//   W₋ u     = u - ∫ R₀⁺(λ⁴) M_v M(λ⁴)^{-1} M_v Π(λ)u λ³ dλ
// For radial û the angular integrals reduce through
//   ∫_{S³} e^{i a ω·θ} dω = (2π)² J₁(a)/a.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <nlohmann/json.hpp>
#include <vector>

#include "biharm4/operator_algebra.hpp"

namespace bh4 {

// smooth cutoffs: χ_≤(t) = 1 for t <= 1, 0 for t >= 2, C^∞ in between
inline double chi_le(double t) {
  if (t <= 1.0) return 1.0;
  if (t >= 2.0) return 0.0;
  auto f = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
  return f(2.0 - t) / (f(2.0 - t) + f(t - 1.0));
}
inline double chi_le_a(double lambda, double a) { return chi_le(lambda / a); }
inline double chi_ge_a(double lambda, double a) { return 1.0 - chi_le(lambda / a); }

inline double j1_over_z(double z) {
  if (std::abs(z) < 1e-8) return 0.5 - z * z / 16.0;
  return std::cyl_bessel_j(1, z) / z;
}

// Radial-profile test function in the class D_*.
struct TestFunction {
  double alpha = 1.0, beta = 2.0;
  std::function<cdouble(double)> profile;  // û(ξ) = profile(|ξ|)

  // canonical bump, normalized to 1 at the midpoint
  static TestFunction bump(double a = 1.0, double b = 2.0) {
    TestFunction u;
    u.alpha = a;
    u.beta = b;
    u.profile = [a, b](double s) -> cdouble {
      if (s <= a || s >= b) return 0.0;
      return std::exp(4.0 / (b - a) - 1.0 / (s - a) - 1.0 / (b - s));
    };
    return u;
  }

  TestFunction multiplied(std::function<cdouble(double)> f) const {
    TestFunction out = *this;
    auto base = profile;
    out.profile = [base, f](double s) { return f(s) * base(s); };
    return out;
  }
  // u_s(x) = s² u(sx):  û_s(ξ) = s^{-2} û(ξ/s), support [sα, sβ]
  TestFunction dilated(double s) const {
    TestFunction out = *this;
    auto base = profile;
    out.alpha = alpha * s;
    out.beta = beta * s;
    out.profile = [base, s](double sig) { return base(sig / s) / (s * s); };
    return out;
  }

  // Π(λ)u at radius r (radial û); vanishes for λ outside the support
  cdouble Pi(double lambda, double r) const {
    return profile(lambda) * j1_over_z(lambda * r);
  }
  cdouble Pi0(double lambda) const { return 0.5 * profile(lambda); }

  // u(x) = ∫ profile(s) s³ J₁(s|x|)/(s|x|) ds
  cdouble value_radial(double r, int gl = 96) const {
    auto q = gauss_legendre_ab(gl, alpha, beta);
    cdouble acc = 0.0;
    for (int i = 0; i < q.size(); ++i)
      acc += q.w[i] * profile(q.x[i]) * std::pow(q.x[i], 3) * j1_over_z(q.x[i] * r);
    return acc;
  }

  double norm2_fourier(int gl = 192) const {
    auto q = gauss_legendre_ab(gl, alpha, beta);
    double acc = 0.0;
    for (int i = 0; i < q.size(); ++i)
      acc += q.w[i] * std::norm(profile(q.x[i])) * std::pow(q.x[i], 3);
    return std::sqrt(kSurfS3 * acc);
  }
  // physical-side L² norm by radial quadrature with Bessel-zero panels
  double norm2_physical(double r_max = 80.0) const {
    auto breaks = bessel_panel_breaks(r_max, beta);
    double acc = 0.0;
    const Quad1D& q = gauss_legendre(8);
    for (size_t p = 0; p + 1 < breaks.size(); ++p) {
      const double c = 0.5 * (breaks[p + 1] - breaks[p]);
      const double m = 0.5 * (breaks[p + 1] + breaks[p]);
      for (int i = 0; i < q.size(); ++i) {
        const double r = m + c * q.x[i];
        acc += c * q.w[i] * std::norm(value_radial(r)) * std::pow(r, 3);
      }
    }
    return std::sqrt(kSurfS3 * acc);
  }
};

// Π(λ)(τ_{-x}u)(0) through the 1-D Gegenbauer reduction with an independent
// Chebyshev rule (used to cross-check the J₁ closed form).
inline cdouble spectral_projection_quadrature(const TestFunction& u, double lambda,
                                              double r, int n = 48) {
  auto q = chebyshev2(n);
  cdouble acc = 0.0;
  for (int i = 0; i < q.size(); ++i)
    acc += q.w[i] * std::exp(kI * (lambda * r * q.x[i]));
  // ∫_{S³} e^{iλ r ω·n} dω = 4π ∫_{-1}^{1} e^{iλ r t} sqrt(1-t²) dt
  return u.profile(lambda) * (4.0 * kPi / sq(2.0 * kPi)) * acc;
}

// ---------------------------------------------------------------------------
// The operator K and its two halves, by λ-quadrature.
struct KQuadConfig {
  int lambda_nodes = 96;
  KernelRegime regime;
};

inline cdouble K_apply(const TestFunction& u, double r,
                       const KQuadConfig& cfg = KQuadConfig{}) {
  auto q = gauss_legendre_ab(cfg.lambda_nodes, u.alpha, u.beta);
  cdouble acc = 0.0;
  for (int i = 0; i < q.size(); ++i) {
    const double l = q.x[i];
    acc += q.w[i] * calR(l, r, cfg.regime) * u.Pi0(l) * std::pow(l, 3);
  }
  return acc;
}

inline cdouble K1_apply(const TestFunction& u, double r,
                        const KQuadConfig& cfg = KQuadConfig{}) {
  auto q = gauss_legendre_ab(cfg.lambda_nodes, u.alpha, u.beta);
  cdouble acc = 0.0;
  for (int i = 0; i < q.size(); ++i)
    acc += q.w[i] * green_kernel(cdouble(q.x[i], 0.0), r, cfg.regime) *
           u.Pi0(q.x[i]) * q.x[i];
  return acc;
}

inline cdouble K2_apply(const TestFunction& u, double r,
                        const KQuadConfig& cfg = KQuadConfig{}) {
  auto q = gauss_legendre_ab(cfg.lambda_nodes, u.alpha, u.beta);
  cdouble acc = 0.0;
  for (int i = 0; i < q.size(); ++i)
    acc += q.w[i] * green_kernel(cdouble(0.0, q.x[i]), r, cfg.regime) *
           u.Pi0(q.x[i]) * q.x[i];
  return acc;
}

// Closed form for K1 with ε-regularization,
//   K1,ε u(x) = -1/((4π²)²(|x|²+iε)) ∫ u(y)/(|x|²-|y|²+iε) dy,
// reduced radially and extrapolated ε -> 0 (quadratic fit in ε).
inline cdouble K1_closed_eps(const TestFunction& u, double rho, double eps,
                             double r_cut = 60.0) {
  std::vector<double> br{0.0};
  // panels refined around the singular radius r = ρ
  for (double d :
       {-2.0, -1.0, -0.5, -0.25, -0.1, -0.04, -0.01, -0.003, -0.001,
        0.001, 0.003, 0.01, 0.04, 0.1, 0.25, 0.5, 1.0, 2.0}) {
    const double rr = rho + d;
    if (rr > 0.0 && rr < r_cut) br.push_back(rr);
  }
  for (double rr = 4.0; rr < r_cut; rr += 2.0) br.push_back(rr);
  br.push_back(r_cut);
  std::sort(br.begin(), br.end());
  const Quad1D& q = gauss_legendre(16);
  cdouble acc = 0.0;
  for (size_t p = 0; p + 1 < br.size(); ++p) {
    const double c = 0.5 * (br[p + 1] - br[p]), m = 0.5 * (br[p + 1] + br[p]);
    for (int i = 0; i < q.size(); ++i) {
      const double r = m + c * q.x[i];
      acc += c * q.w[i] * u.value_radial(r) * std::pow(r, 3) /
             cdouble(rho * rho - r * r, eps);
    }
  }
  return -kSurfS3 / (sq(4.0 * kPi * kPi) * cdouble(rho * rho, eps)) * acc;
}

inline cdouble K1_closed(const TestFunction& u, double rho) {
  const double e1 = 1e-2, e2 = 1e-3, e3 = 1e-4;
  const cdouble f1 = K1_closed_eps(u, rho, e1);
  const cdouble f2 = K1_closed_eps(u, rho, e2);
  const cdouble f3 = K1_closed_eps(u, rho, e3);
  // quadratic extrapolation to ε = 0
  Eigen::Matrix3cd M;
  M << 1.0, e1, e1 * e1, 1.0, e2, e2 * e2, 1.0, e3, e3 * e3;
  Eigen::Vector3cd rhs{f1, f2, f3};
  return M.partialPivLu().solve(rhs)(0);
}

// K2 closed form needs no regularization:
//   K2 u(x) = 1/((4π²)²|x|²) ∫ u(y)/(|x|²+|y|²) dy
inline cdouble K2_closed(const TestFunction& u, double rho, double r_cut = 60.0) {
  auto breaks = bessel_panel_breaks(r_cut, u.beta);
  const Quad1D& q = gauss_legendre(8);
  cdouble acc = 0.0;
  for (size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double c = 0.5 * (breaks[p + 1] - breaks[p]);
    const double m = 0.5 * (breaks[p + 1] + breaks[p]);
    for (int i = 0; i < q.size(); ++i) {
      const double r = m + c * q.x[i];
      acc += c * q.w[i] * u.value_radial(r) * std::pow(r, 3) / (rho * rho + r * r);
    }
  }
  return kSurfS3 / (sq(4.0 * kPi * kPi) * rho * rho) * acc;
}

// ---------------------------------------------------------------------------
// Grid-side machinery shared by the Born terms and the stationary formula.
struct WaveOpConfig {
  double cutoff_a = 0.5;
  int lambda_nodes = 96;
  AssemblyConfig assembly;
  KernelRegime regime;
  double rcond_warn = 1e-12;
};

// value-convention kernel matrix of R₀⁺(λ⁴) on the grid, with the corrected
// log quadrature and the cell-averaged diagonal
inline Eigen::MatrixXcd build_R0_kernel(double lambda, const Grid4& g,
                                        const Eigen::MatrixXd& craw,
                                        const AssemblyConfig& cfg,
                                        const KernelRegime& regime) {
  const int n = g.size();
  Eigen::MatrixXcd K(n, n);
  parallel_for(n, [&](long i) {
    for (int j = 0; j < n; ++j) {
      cdouble k;
      if (i == static_cast<long>(j)) {
        const double dlog = std::log(g.local_spacing(i)) - cfg.c_cell;
        k = gtilde(0, lambda) - dlog / (8.0 * kPi * kPi);
      } else {
        k = calR(lambda, (g.nodes.row(i) - g.nodes.row(j)).norm(), regime);
      }
      K(i, j) = (k + craw(i, j)) * g.w[j];
    }
  });
  return K;
}

// W_n χ_{≥a}(|D|) u sampled on grid nodes (n = 1, 2, 3)
inline Eigen::VectorXcd born_term(int order, const TestFunction& u,
                                  const Potential& pot, const Grid4& g,
                                  const WaveOpConfig& cfg = WaveOpConfig{}) {
  if (order < 1 || order > 3)
    throw std::invalid_argument("born_term: order in {1,2,3}");
  const int n = g.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  if (pot.zero()) return out;
  Eigen::MatrixXd craw = raw_log_correction(g, cfg.assembly);
  auto q = gauss_legendre_ab(cfg.lambda_nodes, u.alpha, u.beta);
  for (int iq = 0; iq < q.size(); ++iq) {
    const double l = q.x[iq];
    const double chi = chi_ge_a(l, cfg.cutoff_a);
    if (chi == 0.0) continue;
    Eigen::MatrixXcd R0 = build_R0_kernel(l, g, craw, cfg.assembly, cfg.regime);
    Eigen::VectorXcd f(n);
    for (int i = 0; i < n; ++i) f[i] = u.Pi(l, g.r[i]);
    f = pot.V.cast<cdouble>().asDiagonal() * f;
    Eigen::VectorXcd h = R0 * f;
    for (int k = 1; k < order; ++k) {
      h = pot.V.cast<cdouble>().asDiagonal() * h;
      h = R0 * h;
    }
    out += (q.w[iq] * std::pow(l, 3) * chi) * h;
  }
  return out;
}

// W₂ χ_{≥a} u through the translated-superposition identity:
//   W₂ u(x) = ∫ R₀(λ⁴) [ V(x) Σ_y V(x-y) calR(λ|y|) Π(λ)u(x-y) w_y ] λ³ χ dλ
// (the inner y-sum is the grid quadrature; V is evaluated off-grid through
// its radial profile).
inline Eigen::VectorXcd born2_translated(const TestFunction& u,
                                         const PotentialSpec& vspec,
                                         const Potential& pot, const Grid4& g,
                                         const WaveOpConfig& cfg = WaveOpConfig{}) {
  const int n = g.size();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  Eigen::MatrixXd craw = raw_log_correction(g, cfg.assembly);
  // pairwise distances |x_j - y_k|
  Eigen::MatrixXd D(n, n);
  parallel_for(n, [&](long j) {
    for (int k = 0; k < n; ++k)
      D(j, k) = (g.nodes.row(j) - g.nodes.row(k)).norm();
  });
  auto q = gauss_legendre_ab(cfg.lambda_nodes, u.alpha, u.beta);
  for (int iq = 0; iq < q.size(); ++iq) {
    const double l = q.x[iq];
    const double chi = chi_ge_a(l, cfg.cutoff_a);
    if (chi == 0.0) continue;
    // inner bracket B_j = V(x_j) Σ_k w_k V(x_j - y_k) calR(λ|y_k|) Π(λ)u(x_j - y_k)
    Eigen::VectorXcd calR_y(n);
    for (int k = 0; k < n; ++k) calR_y[k] = calR(l, g.r[k], cfg.regime);
    Eigen::VectorXcd B(n);
    parallel_for(n, [&](long j) {
      cdouble acc = 0.0;
      for (int k = 0; k < n; ++k) {
        const double d = D(j, k);
        acc += g.w[k] * potential_value(vspec, d) * calR_y[k] *
               u.profile(l) * j1_over_z(l * d);
      }
      B[j] = pot.V[j] * acc;
    });
    Eigen::MatrixXcd R0 = build_R0_kernel(l, g, craw, cfg.assembly, cfg.regime);
    out += (q.w[iq] * std::pow(l, 3) * chi) * (R0 * B);
  }
  return out;
}

// Stationary formula: W₋u = u - ∫ R₀⁺(λ⁴) M_v M(λ⁴)^{-1} M_v Π(λ)u λ³ dλ
struct StationaryResult {
  Eigen::VectorXcd Wu;             // on grid nodes
  Eigen::VectorXcd u_grid;
  std::vector<double> lambdas;
  std::vector<double> rcond;       // conditioning of M(λ⁴) per node
  std::vector<std::string> warnings;
};

inline StationaryResult stationary_wave_op(const TestFunction& u,
                                           const Potential& pot, const Grid4& g,
                                           const WaveOpConfig& cfg = WaveOpConfig{}) {
  const int n = g.size();
  StationaryResult res;
  res.u_grid.resize(n);
  for (int i = 0; i < n; ++i) res.u_grid[i] = u.value_radial(g.r[i]);
  res.Wu = res.u_grid;
  if (pot.zero()) return res;  // W₋u = u exactly

  Eigen::MatrixXd craw = raw_log_correction(g, cfg.assembly);
  Eigen::VectorXd sw = g.w.array().sqrt();
  auto q = gauss_legendre_ab(cfg.lambda_nodes, u.alpha, u.beta);
  std::vector<Eigen::VectorXcd> contrib(q.size());
  for (int iq = 0; iq < q.size(); ++iq) {
    const double l = q.x[iq];
    res.lambdas.push_back(l);
    HSOp M = assemble_M(l, pot, g, cfg.assembly, cfg.regime);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M.m);
    const double rc = lu.rcond();
    res.rcond.push_back(rc);
    if (rc < cfg.rcond_warn)
      res.warnings.push_back("M(lambda^4) ill-conditioned at lambda=" +
                             std::to_string(l));
    // b = half-weighted v Π(λ)u
    Eigen::VectorXcd b(n);
    for (int i = 0; i < n; ++i) b[i] = sw[i] * pot.v[i] * u.Pi(l, g.r[i]);
    Eigen::VectorXcd z = lu.solve(b);
    // c = value-vector v * z
    Eigen::VectorXcd c(n);
    for (int i = 0; i < n; ++i) c[i] = pot.v[i] * z[i] / sw[i];
    Eigen::MatrixXcd R0 = build_R0_kernel(l, g, craw, cfg.assembly, cfg.regime);
    contrib[iq] = (q.w[iq] * std::pow(l, 3)) * (R0 * c);
  }
  for (int iq = 0; iq < q.size(); ++iq) res.Wu -= contrib[iq];  // ordered reduction
  return res;
}

// dilation-family L^p probe; heuristic by construction
struct LpProbeRow {
  double p = 0.0, s = 0.0;
  double ratio = 0.0;  // ||W₋u_s||_p / ||u_s||_p on the grid ball
};

inline std::vector<LpProbeRow> lp_probe(const TestFunction& u, const Potential& pot,
                                        const Grid4& g, const std::vector<double>& ps,
                                        const std::vector<double>& ss,
                                        const WaveOpConfig& cfg = WaveOpConfig{}) {
  std::vector<LpProbeRow> rows;
  for (double s : ss) {
    TestFunction us = u.dilated(s);
    auto res = stationary_wave_op(us, pot, g, cfg);
    for (double p : ps) {
      LpProbeRow row;
      row.p = p;
      row.s = s;
      const double nu = g.norm_p(res.u_grid.cwiseAbs(), p);
      row.ratio = nu > 0.0 ? g.norm_p(res.Wu.cwiseAbs(), p) / nu : 0.0;
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace bh4
