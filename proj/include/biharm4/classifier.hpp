#pragma once

// The zero-energy classification cascade:
//   S1 = ker QT0Q|_Q,  T1 = S1 T0 P T0 S1,
//   S2 = ker T1|_S1,   T2 = S2 G2^(v) S2,
//   S3 = ker T2|_S2,   T3 = S3 G4^(v) S3,
//   S4 = ker T3|_S3,   T4 = S4 G4l^(v) S4,
// stopping at the first invertible T_k.  All operators here are real
// symmetric (T2 is i times one), so the whole cascade runs in real
// arithmetic on half-weighted vectors.

#include <Eigen/Dense>
#include <cmath>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "biharm4/operator_algebra.hpp"

namespace bh4 {

struct CascadeConfig {
  // Relative singular-value cut for kernel decisions.  The default sits an
  // order of magnitude above the measured discretization floor of the
  // corrected log-kernel quadrature at default grid sizes (~1e-4), with the
  // next singular values O(0.1..1); the factor-10 gap machinery flags any
  // potential for which this margin is not clean.
  double tol = 2e-3;
  AssemblyConfig assembly;
  KernelRegime regime;
};

struct StageDecision {
  std::string stage;
  double sigma_scale = 0.0;   // scale multiplying tol in the cut
  double sigma_min = 0.0;     // smallest retained (non-kernel) singular value
  double sigma_kernel_max = 0.0;
  int kernel_rank = 0;
  int rank_lo = 0, rank_hi = 0;  // candidate ranks at cut/sqrt(10), cut*sqrt(10)
  bool gap_warning = false;
};

enum class SingularKind { Regular, First, Second, Third, Fourth };

inline const char* kind_name(SingularKind k) {
  switch (k) {
    case SingularKind::Regular: return "Regular";
    case SingularKind::First: return "First";
    case SingularKind::Second: return "Second";
    case SingularKind::Third: return "Third";
    default: return "Fourth";
  }
}

struct SingularityReport {
  SingularKind kind = SingularKind::Regular;
  int rank_S1 = 0, rank_S2 = 0, rank_S3 = 0, rank_S4 = 0;
  std::vector<StageDecision> stages;
  int count_s = 0, count_p = 0, count_d = 0, count_eig = 0;
  std::string predicted_interval = "(1,inf)";
  bool t3_zero = false;
  bool gap_warning = false;
  double c1_regular = std::numeric_limits<double>::quiet_NaN();
  double c1_with_S1 = std::numeric_limits<double>::quiet_NaN();
  // half-weighted orthonormal bases of the nested subspaces
  Eigen::MatrixXd S1, S2, S3, S4;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["version"] = "1";
    j["kind"] = kind_name(kind);
    j["ranks"] = {{"S1", rank_S1}, {"S2", rank_S2}, {"S3", rank_S3}, {"S4", rank_S4}};
    j["resonance_counts"] = {{"s", count_s}, {"p", count_p}, {"d", count_d},
                             {"eigenfunction", count_eig}};
    j["predicted_lp_interval"] = predicted_interval;
    j["t3_zero"] = t3_zero;
    j["gap_warning"] = gap_warning;
    nlohmann::json st = nlohmann::json::array();
    for (const auto& s : stages)
      st.push_back({{"stage", s.stage},
                    {"sigma_min", s.sigma_min},
                    {"sigma_kernel_max", s.sigma_kernel_max},
                    {"sigma_scale", s.sigma_scale},
                    {"kernel_rank", s.kernel_rank},
                    {"rank_lo", s.rank_lo},
                    {"rank_hi", s.rank_hi},
                    {"gap_warning", s.gap_warning}});
    j["stages"] = st;
    j["c1"] = {{"regular", c1_regular}, {"with_S1", c1_with_S1}};
    return j;
  }
};

namespace detail {

// eigen-decomposition based kernel split of a real symmetric matrix;
// |eigenvalue| <= tol * scale is kernel.
struct SymSplit {
  Eigen::MatrixXd kernel;  // columns
  StageDecision info;
};

inline SymSplit sym_kernel_split(const Eigen::MatrixXd& A, double tol,
                                 double scale, const std::string& name) {
  SymSplit out;
  out.info.stage = name;
  const int n = static_cast<int>(A.rows());
  if (n == 0) {
    out.kernel.resize(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  Eigen::VectorXd abseig = es.eigenvalues().cwiseAbs();
  if (scale <= 0.0) scale = abseig.maxCoeff();
  out.info.sigma_scale = scale;
  const double cut = tol * std::max(scale, 1e-300);
  const double root10 = std::sqrt(10.0);
  std::vector<int> ker;
  double kept_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = abseig[i];
    if (s <= cut)
      ker.push_back(i);
    else
      kept_min = std::min(kept_min, s);
    if (s <= cut / root10) ++out.info.rank_lo;
    if (s <= cut * root10) ++out.info.rank_hi;
    out.info.sigma_kernel_max = s <= cut ? std::max(out.info.sigma_kernel_max, s)
                                         : out.info.sigma_kernel_max;
  }
  out.info.kernel_rank = static_cast<int>(ker.size());
  out.info.sigma_min = std::isfinite(kept_min) ? kept_min : 0.0;
  out.kernel.resize(n, out.info.kernel_rank);
  for (size_t c = 0; c < ker.size(); ++c) out.kernel.col(c) = es.eigenvectors().col(ker[c]);
  const bool ratio_ok =
      ker.empty() || out.info.kernel_rank == n ||
      out.info.sigma_min >= 10.0 * std::max(out.info.sigma_kernel_max, 1e-300);
  out.info.gap_warning = (out.info.rank_lo != out.info.rank_hi) || !ratio_ok;
  return out;
}

// large symmetric stage: spectrum via EigenvaluesOnly, kernel vectors via
// inverse iteration on a shifted LU (cheaper than full vectors at n ~ 2000)
inline SymSplit sym_kernel_split_large(const Eigen::MatrixXd& A, double tol,
                                       const std::string& name) {
  SymSplit out;
  out.info.stage = name;
  const int n = static_cast<int>(A.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  Eigen::VectorXd abseig = es.eigenvalues().cwiseAbs();
  const double scale = abseig.maxCoeff();
  out.info.sigma_scale = scale;
  const double cut = tol * scale;
  const double root10 = std::sqrt(10.0);
  int kcount = 0;
  double kept_min = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = abseig[i];
    if (s <= cut) {
      ++kcount;
      out.info.sigma_kernel_max = std::max(out.info.sigma_kernel_max, s);
    } else {
      kept_min = std::min(kept_min, s);
    }
    if (s <= cut / root10) ++out.info.rank_lo;
    if (s <= cut * root10) ++out.info.rank_hi;
  }
  out.info.kernel_rank = kcount;
  out.info.sigma_min = std::isfinite(kept_min) ? kept_min : 0.0;
  const bool ratio_ok =
      kcount == 0 || kcount == n ||
      out.info.sigma_min >= 10.0 * std::max(out.info.sigma_kernel_max, 1e-300);
  out.info.gap_warning = (out.info.rank_lo != out.info.rank_hi) || !ratio_ok;

  if (kcount > 0) {
    // block inverse iteration with a tiny regularizing shift
    const double shift = 1e-3 * cut;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(
        A + shift * Eigen::MatrixXd::Identity(n, n));
    const int b = std::min(n, kcount + 2);
    Eigen::MatrixXd X(n, b);
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> nd;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < b; ++j) X(i, j) = nd(rng);
    for (int it = 0; it < 40; ++it) {
      X = lu.solve(X);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
      X = Eigen::MatrixXd(qr.householderQ()) .leftCols(b);
      if (it >= 8 && it % 4 == 0) {
        Eigen::MatrixXd R = X.transpose() * A * X;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(R);
        if (small.eigenvalues().cwiseAbs().minCoeff() <= cut &&
            (A * X - X * R).norm() < 1e-12 * scale * std::sqrt(double(n)))
          break;
      }
    }
    Eigen::MatrixXd R = X.transpose() * A * X;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(R);
    X = X * small.eigenvectors();
    out.kernel.resize(n, kcount);
    int c = 0;
    for (int i = 0; i < b && c < kcount; ++i)
      if (std::abs(small.eigenvalues()[i]) <= cut) out.kernel.col(c++) = X.col(i);
    // fall back to the dense path if the iteration failed to resolve them
    if (c < kcount) return sym_kernel_split(A, tol, scale, name);
  } else {
    out.kernel.resize(n, 0);
  }
  return out;
}

// apply a sandwiched kernel to a few half-weighted vectors without storing
// the full matrix
inline Eigen::MatrixXd apply_sandwiched_real(SandwichKernel id, const Potential& pot,
                                             const Grid4& g, const Eigen::MatrixXd& X,
                                             const AssemblyConfig& cfg) {
  const int n = g.size(), k = static_cast<int>(X.cols());
  Eigen::VectorXd vh = g.w.array().sqrt() * pot.v.array();
  Eigen::MatrixXd Y = Eigen::MatrixXd::Zero(n, k);
  parallel_for(n, [&](long i) {
    for (int j = 0; j < n; ++j) {
      double kv;
      if (i == static_cast<long>(j)) {
        const double dlog = std::log(g.local_spacing(i)) - cfg.c_cell;
        kv = id == SandwichKernel::N0 ? -dlog / (8.0 * kPi * kPi) : 0.0;
      } else {
        const double r = (g.nodes.row(i) - g.nodes.row(j)).norm();
        switch (id) {
          case SandwichKernel::N0: kv = N0_kernel(r); break;
          case SandwichKernel::G2: kv = cfg.g2_scale * (-r * r / (256.0 * kPi)); break;
          case SandwichKernel::G4: kv = G4_kernel(r); break;
          default: kv = G4l_kernel(r); break;
        }
      }
      const double f = vh[i] * kv * vh[j];
      for (int c = 0; c < k; ++c) Y(i, c) += f * X(j, c);
    }
  });
  return Y;
}

}  // namespace detail

// ||T0 ζ|| and the moments <x^α v, ζ> for |α| <= order (half-weighted ζ).
struct MomentCheck {
  double t0_residual = 0.0;
  double moment0 = 0.0;                 // <v, ζ>
  Eigen::Vector4d moment1;              // <x_j v, ζ>
  Eigen::Matrix4d moment2;              // <x_j x_k v, ζ>
  double max_moment1 = 0.0, max_moment2 = 0.0;
};

inline MomentCheck moment_check(const Eigen::VectorXd& zeta, const Potential& pot,
                                const Grid4& g, int order,
                                const Eigen::MatrixXd* T0r = nullptr) {
  MomentCheck mc;
  mc.moment1.setZero();
  mc.moment2.setZero();
  Eigen::VectorXd vh = g.w.array().sqrt() * pot.v.array();
  for (int i = 0; i < g.size(); ++i) {
    const double f = vh[i] * zeta[i];
    mc.moment0 += f;
    if (order >= 1)
      for (int a = 0; a < 4; ++a) mc.moment1[a] += g.nodes(i, a) * f;
    if (order >= 2)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) mc.moment2(a, b) += g.nodes(i, a) * g.nodes(i, b) * f;
  }
  mc.max_moment1 = mc.moment1.cwiseAbs().maxCoeff();
  mc.max_moment2 = mc.moment2.cwiseAbs().maxCoeff();
  if (T0r) mc.t0_residual = (*T0r * zeta).norm();
  return mc;
}

inline SingularityReport cascade(const Potential& pot, const Grid4& g,
                                 const CascadeConfig& cfg = CascadeConfig{}) {
  if (pot.zero()) throw std::invalid_argument("cascade: potential is zero");
  SingularityReport rep;
  const int n = g.size();

  HSOp t0c = compute_T0(pot, g, cfg.assembly);
  Eigen::MatrixXd T0 = t0c.m.real();
  t0c.m.resize(0, 0);
  auto pq = build_PQ(pot, g);
  HouseholderComplement hc(pq.vtilde);

  // ---- stage 0: S1 = ker QT0Q restricted to Q L²
  Eigen::MatrixXd reduced = hc.conjugate_real(T0).block(1, 1, n - 1, n - 1);
  auto st0 = n > 700 ? detail::sym_kernel_split_large(reduced, cfg.tol, "QT0Q")
                     : detail::sym_kernel_split(reduced, cfg.tol, 0.0, "QT0Q");
  reduced.resize(0, 0);
  rep.stages.push_back(st0.info);
  rep.rank_S1 = st0.info.kernel_rank;
  if (rep.rank_S1 > 0) {
    rep.S1.resize(n, rep.rank_S1);
    for (int c = 0; c < rep.rank_S1; ++c) {
      Eigen::VectorXcd lifted =
          hc.lift(st0.kernel.col(c).cast<cdouble>());
      rep.S1.col(c) = lifted.real();
    }
  }

  // c1 both ways (identical when S1 = 0): D0 = Q (QT0Q [+ S1])^{-1} Q
  auto compute_c1 = [&](bool with_s1) -> double {
    Eigen::MatrixXd B = T0;
    // block-diagonalize: replace the P-direction by the identity
    Eigen::VectorXd tv = T0 * pq.vtilde;
    B -= pq.vtilde * tv.transpose();
    B -= tv * pq.vtilde.transpose();
    B += (pq.vtilde.dot(tv) + 1.0) * pq.vtilde * pq.vtilde.transpose();
    if (with_s1 && rep.rank_S1 > 0) B += rep.S1 * rep.S1.transpose();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    if (lu.rcond() < 1e-13) return std::numeric_limits<double>::quiet_NaN();
    Eigen::VectorXd qt0v = T0 * (pot.v.cwiseProduct(g.w.array().sqrt().matrix()));
    qt0v -= pq.vtilde * pq.vtilde.dot(qt0v);  // Q T0 v
    Eigen::VectorXd d0q = lu.solve(qt0v);
    d0q -= pq.vtilde * pq.vtilde.dot(d0q);  // Q (…)^{-1} Q T0 v
    Eigen::VectorXd vh = pot.v.cwiseProduct(g.w.array().sqrt().matrix());
    return (vh.dot(T0 * vh) - qt0v.dot(d0q)) / pot.norm1;
  };
  rep.c1_with_S1 = compute_c1(true);
  if (rep.rank_S1 == 0) rep.c1_regular = rep.c1_with_S1;

  if (rep.rank_S1 == 0) {
    rep.kind = SingularKind::Regular;
    rep.predicted_interval = "(1,inf)";
    rep.gap_warning = st0.info.gap_warning;
    return rep;
  }

  // ---- stage 1: T1 = S1 T0 P T0 S1 = c cᵀ with c_j = ṽᵀ T0 ζ_j;
  // ker T1 = ker cᵀ, decided against the row-map scale ||T0 ṽ||.
  {
    const Eigen::VectorXd t0v = T0 * pq.vtilde;
    Eigen::VectorXd c = rep.S1.transpose() * t0v;
    const double scale = t0v.norm();
    StageDecision sd;
    sd.stage = "T1";
    sd.sigma_scale = scale;
    const double cut = cfg.tol * std::max(scale, 1e-300);
    const double cn = c.norm();
    const double root10 = std::sqrt(10.0);
    if (cn <= cut) {
      sd.kernel_rank = rep.rank_S1;
      rep.S2 = rep.S1;
      sd.sigma_kernel_max = cn * cn;
      sd.sigma_min = 0.0;
    } else {
      sd.kernel_rank = rep.rank_S1 - 1;
      sd.sigma_min = cn * cn;  // the nonzero eigenvalue of T1|S1
      if (sd.kernel_rank > 0) {
        // orthonormal complement of c inside span(S1), via a Householder map
        HouseholderComplement hcc(c / cn);
        Eigen::MatrixXd K(rep.rank_S1, sd.kernel_rank);
        for (int j = 1; j < rep.rank_S1; ++j) {
          Eigen::VectorXd ej = Eigen::VectorXd::Zero(rep.rank_S1);
          ej[j] = 1.0;
          K.col(j - 1) = hcc.u.isZero(0) ? ej : (ej - 2.0 * hcc.u[j] * hcc.u).eval();
        }
        rep.S2 = rep.S1 * K;
      }
    }
    sd.rank_lo = rep.rank_S1 - (cn <= cut / root10 ? 0 : 1);
    sd.rank_hi = rep.rank_S1 - (cn <= cut * root10 ? 0 : 1);
    sd.gap_warning = sd.rank_lo != sd.rank_hi;
    rep.stages.push_back(sd);
    rep.rank_S2 = static_cast<int>(rep.S2.cols());
  }
  if (rep.rank_S2 == 0) {
    rep.kind = SingularKind::First;
    rep.predicted_interval = "(1,inf)";
  } else {
    // ---- stage 2: T2 = S2 G2^(v) S2 = i * (real symmetric)
    // (T2 = i × this real symmetric block; kernels and σ's are unchanged)
    auto g2s2 = detail::apply_sandwiched_real(SandwichKernel::G2, pot, g, rep.S2,
                                              cfg.assembly);
    Eigen::MatrixXd T2r = rep.S2.transpose() * g2s2;
    const double g2scale = hs_norm_sandwiched(SandwichKernel::G2, pot, g, cfg.assembly);
    auto st2 = detail::sym_kernel_split(T2r, cfg.tol, g2scale, "T2");
    rep.stages.push_back(st2.info);
    rep.rank_S3 = st2.info.kernel_rank;
    if (rep.rank_S3 > 0) rep.S3 = rep.S2 * st2.kernel;
    if (rep.rank_S3 == 0) {
      rep.kind = SingularKind::Second;
      rep.predicted_interval = "(1,4)";
    } else {
      // ---- stage 3: T3 = S3 G4^(v) S3
      auto g4s3 = detail::apply_sandwiched_real(SandwichKernel::G4, pot, g, rep.S3,
                                                cfg.assembly);
      Eigen::MatrixXd T3r = rep.S3.transpose() * g4s3;
      const double g4scale = hs_norm_sandwiched(SandwichKernel::G4, pot, g, cfg.assembly);
      auto st3 = detail::sym_kernel_split(T3r, cfg.tol, g4scale, "T3");
      rep.stages.push_back(st3.info);
      rep.rank_S4 = st3.info.kernel_rank;
      if (rep.rank_S4 > 0) rep.S4 = rep.S3 * st3.kernel;
      if (rep.rank_S4 == 0) {
        rep.kind = SingularKind::Third;
        rep.predicted_interval = "(1,2]";
      } else {
        rep.kind = SingularKind::Fourth;
        rep.t3_zero = (rep.rank_S4 == rep.rank_S3);
        rep.predicted_interval = rep.t3_zero ? "(1,4)" : "(1,2]";
        // T4 conditioning is reported, never failed on
        auto g4ls4 = detail::apply_sandwiched_real(SandwichKernel::G4l, pot, g,
                                                   rep.S4, cfg.assembly);
        Eigen::MatrixXd T4r = rep.S4.transpose() * g4ls4;
        const double g4lscale =
            hs_norm_sandwiched(SandwichKernel::G4l, pot, g, cfg.assembly);
        auto st4 = detail::sym_kernel_split(T4r, cfg.tol, g4lscale, "T4");
        rep.stages.push_back(st4.info);
      }
    }
  }

  rep.count_s = rep.rank_S1 - rep.rank_S2;
  rep.count_p = rep.rank_S2 - rep.rank_S3;
  rep.count_d = rep.rank_S3 - rep.rank_S4;
  rep.count_eig = rep.rank_S4;
  for (const auto& s : rep.stages) rep.gap_warning = rep.gap_warning || s.gap_warning;
  return rep;
}

// ---------------------------------------------------------------------------
// Regular-case expansion checks:
//   (T0 + g0(λ)P)^{-1} = D0 + h(λ) L0           (algebraic identity)
//   M(λ⁴)^{-1} = D̃0(λ) - λ² D̃0 G2^(v) D̃0 + O(λ⁴ log λ)   (slope check)
struct RegularExpansionReport {
  bool ran = false;
  std::string skip_reason;
  double c1 = 0.0;
  double identity_err_max = 0.0;   // sup_λ of ||(T0+g0P)^{-1} - D0 - h L0|| / ||..||
  std::vector<double> lambdas, model_errs;
  double slope = 0.0;
  int rank_L0 = 0;
  double l0_sigma1 = 0.0, l0_sigma2 = 0.0, l0_sigma3 = 0.0;
};

inline RegularExpansionReport regular_expansion_check(
    const Potential& pot, const Grid4& g, const std::vector<double>& lambdas,
    const CascadeConfig& cfg = CascadeConfig{}) {
  RegularExpansionReport rep;
  rep.lambdas = lambdas;
  const int n = g.size();
  HSOp t0c = compute_T0(pot, g, cfg.assembly);
  Eigen::MatrixXd T0 = t0c.m.real();
  t0c.m.resize(0, 0);
  auto pq = build_PQ(pot, g);

  // D0 = Q (QT0Q)^{-1} Q via a P-direction replacement
  Eigen::MatrixXd B = T0;
  Eigen::VectorXd tv = T0 * pq.vtilde;
  B -= pq.vtilde * tv.transpose();
  B -= tv * pq.vtilde.transpose();
  B += (pq.vtilde.dot(tv) + 1.0) * pq.vtilde * pq.vtilde.transpose();
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  if (lu.rcond() < cfg.tol) {
    rep.skip_reason = "QT0Q singular at the cascade tolerance; potential is not regular";
    return rep;
  }
  Eigen::MatrixXd D0 = lu.inverse();
  // sandwich with Q on both sides
  auto qsym = [&](Eigen::MatrixXd& M) {
    Eigen::VectorXd mv = M * pq.vtilde;
    M -= mv * pq.vtilde.transpose();
    Eigen::VectorXd vm = M.transpose() * pq.vtilde;
    M -= pq.vtilde * vm.transpose();
  };
  qsym(D0);

  Eigen::VectorXd y = D0 * (T0 * pq.vtilde);
  Eigen::VectorXd u = pq.vtilde - y;
  Eigen::MatrixXd L0 = u * u.transpose();
  {
    Eigen::VectorXd vh = pot.v.cwiseProduct(g.w.array().sqrt().matrix());
    Eigen::VectorXd qt0v = T0 * vh;
    qt0v -= pq.vtilde * pq.vtilde.dot(qt0v);
    rep.c1 = (vh.dot(T0 * vh) - qt0v.dot(D0 * qt0v)) / pot.norm1;
  }
  {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(L0);
    const auto& sv = svd.singularValues();
    rep.l0_sigma1 = sv(0);
    rep.l0_sigma2 = sv.size() > 1 ? sv(1) : 0.0;
    rep.l0_sigma3 = sv.size() > 2 ? sv(2) : 0.0;
    rep.rank_L0 = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > cfg.tol * sv(0)) ++rep.rank_L0;
  }

  HSOp g2v = assemble_sandwiched(SandwichKernel::G2, pot, g, cfg.assembly);
  for (double l : lambdas) {
    const cdouble g0 = pot.norm1 * gtilde(0, l);
    const cdouble h = 1.0 / (g0 + rep.c1);
    Eigen::MatrixXcd Dt = D0.cast<cdouble>() + h * L0.cast<cdouble>();
    // identity: direct inverse of T0 + g0 P
    Eigen::MatrixXcd direct =
        (T0.cast<cdouble>() + g0 * (pq.vtilde * pq.vtilde.transpose()).cast<cdouble>())
            .partialPivLu()
            .inverse();
    rep.identity_err_max = std::max(
        rep.identity_err_max, (direct - Dt).norm() / std::max(1.0, Dt.norm()));
    // M^{-1} against the two-term model
    HSOp m = assemble_M(l, pot, g, cfg.assembly, cfg.regime);
    Eigen::MatrixXcd minv = m.m.partialPivLu().inverse();
    Eigen::MatrixXcd model = Dt - sq(l) * (Dt * g2v.m * Dt);
    rep.model_errs.push_back((minv - model).norm());
  }
  if (lambdas.size() >= 2) {
    // least-squares slope of log err vs log λ
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const int m = static_cast<int>(lambdas.size());
    for (int i = 0; i < m; ++i) {
      const double x = std::log(lambdas[i]), yv = std::log(rep.model_errs[i]);
      sx += x;
      sy += yv;
      sxx += x * x;
      sxy += x * yv;
    }
    rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  rep.ran = true;
  return rep;
}

}  // namespace bh4
