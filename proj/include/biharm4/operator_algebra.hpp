#pragma once

// Dense discretization of the sandwiched integral operators.
//
// Convention: a sampled function f is carried as the half-weighted vector
// f~_i = sqrt(w_i) f(x_i), so the L² inner product is the Euclidean one and
// orthogonal projections / SVDs are the standard matrix ones.  An integral
// operator with kernel K(x,y) becomes A_ij = sqrt(w_i) K(x_i,x_j) sqrt(w_j);
// multiplication operators stay diagonal.  The Hilbert-Schmidt norm is then
// the Frobenius norm of the stored matrix.

#include <Eigen/Dense>
#include <fstream>
#include <mutex>
#include <optional>

#include "biharm4/grid.hpp"
#include "biharm4/potential.hpp"
#include "biharm4/special_kernels.hpp"

namespace bh4 {

inline Eigen::VectorXd half_weight(const Grid4& g, const Eigen::VectorXd& values) {
  return g.w.array().sqrt() * values.array();
}
inline Eigen::VectorXd unweight(const Grid4& g, const Eigen::VectorXd& hw) {
  return hw.array() / g.w.array().sqrt();
}

struct HSOp {
  Eigen::MatrixXcd m;  // half-weighted matrix
  double hs = 0.0;     // cached HS (= Frobenius) norm

  HSOp() = default;
  explicit HSOp(Eigen::MatrixXcd mat) : m(std::move(mat)), hs(m.norm()) {}

  int n() const { return static_cast<int>(m.rows()); }
  HSOp adjoint() const { return HSOp(m.adjoint()); }
  double hs_norm() const { return hs; }

  // action on a plain value vector: (Af)(x_i) = Σ_j K_ij w_j f(x_j)
  Eigen::VectorXcd apply_values(const Grid4& g, const Eigen::VectorXcd& f) const {
    Eigen::VectorXcd hw = g.w.array().sqrt() * f.array();
    Eigen::VectorXcd out = m * hw;
    return out.array() / g.w.array().sqrt();
  }
};

struct AssemblyConfig {
  double c_cell = 1.5;     // diagonal log regularization: log h_i - c_cell
  double g2_scale = 1.0;   // test hook; 1.0 is the exact coefficient
  double hs_blowup = 1e12; // assembly error threshold
  bool shell_mean_correction = true;  // product-integration fix of the log kernel
};

// Angular channel action of log|x-y| on S³: from the Chebyshev expansion
//   log|x-y| = log r_> - Σ_{n>=1} t^n T_n(cos γ)/n,    t = r_< / r_>,
// the exact action on a degree-m spherical harmonic H is λ_m(r,ρ) H(x̂) with
//   λ_0 = 2π² (log r_> + t²/4)
//   λ_m = (2π²/(m+1)) [ t^{m+2}/(2(m+2)) - t^m/(2m) ],  m >= 1.
inline double log_channel_lambda(int m, double r, double rho) {
  const double hi = std::max(r, rho), lo = std::min(r, rho);
  const double t = lo / hi;
  if (m == 0) return kSurfS3 * (std::log(hi) + 0.25 * sq(t));
  return kSurfS3 / (m + 1) *
         (std::pow(t, m + 2) / (2.0 * (m + 2)) - std::pow(t, m) / (2.0 * m));
}

// Orthonormal basis (w.r.t. the design quadrature = the S³ inner product for
// degrees <= 3) of spherical polynomials of degree <= 3, with their degrees.
struct SphChannelBasis {
  Eigen::MatrixXd H;        // m_nodes x q
  std::vector<int> degree;  // q entries in {0,1,2,3}
};

inline const SphChannelBasis& design_channel_basis(const Grid4& g) {
  static SphChannelBasis basis;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  if (basis.H.size() > 0) return basis;
  const int m = static_cast<int>(g.sph.rows());
  const double aw = kSurfS3 / m;
  std::vector<Eigen::VectorXd> cols;
  std::vector<int> degs;
  auto push = [&](const Eigen::VectorXd& c, int d) {
    cols.push_back(c);
    degs.push_back(d);
  };
  push(Eigen::VectorXd::Ones(m), 0);
  for (int a = 0; a < 4; ++a) push(g.sph.col(a), 1);
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b)
      push(g.sph.col(a).cwiseProduct(g.sph.col(b)), 2);
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b)
      for (int c = b; c < 4; ++c)
        push(g.sph.col(a).cwiseProduct(g.sph.col(b)).cwiseProduct(g.sph.col(c)), 3);
  // modified Gram-Schmidt in the aw-weighted inner product; drop dependents
  std::vector<Eigen::VectorXd> ortho;
  std::vector<int> odeg;
  for (size_t c = 0; c < cols.size(); ++c) {
    Eigen::VectorXd u = cols[c];
    for (int pass = 0; pass < 2; ++pass)
      for (size_t q = 0; q < ortho.size(); ++q)
        u -= (aw * ortho[q].dot(u)) * ortho[q];
    const double nn = std::sqrt(aw * u.squaredNorm());
    if (nn < 1e-8) continue;
    ortho.push_back(u / nn);
    odeg.push_back(degs[c]);
  }
  basis.H.resize(m, ortho.size());
  for (size_t q = 0; q < ortho.size(); ++q) basis.H.col(q) = ortho[q];
  basis.degree = odeg;
  return basis;
}

// Product-integration correction for the -log|x-y|/(8π²) kernel: on every
// shell pair, the action on angular channels of degree <= 3 is replaced by
// its exact value, which removes the dominant quadrature bias of the
// singular kernel.  Value-kernel convention (add to N0(|x_i-x_j|)).
inline Eigen::MatrixXd raw_log_correction(const Grid4& g,
                                          const AssemblyConfig& cfg) {
  const int n = g.size();
  const int m = static_cast<int>(g.sph.rows());
  const int nsh = g.n_radial;
  const double aw = kSurfS3 / m;
  const SphChannelBasis& cb = design_channel_basis(g);
  const int nq = static_cast<int>(cb.H.cols());
  Eigen::MatrixXd C(n, n);
  parallel_for(nsh, [&](long k) {
    Eigen::MatrixXd K(m, m), lamH(m, nq);
    for (int l = 0; l < nsh; ++l) {
      const double rk = g.radial_nodes[k], rl = g.radial_nodes[l];
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const int i = static_cast<int>(k) * m + a, j = l * m + b;
          if (i == j) {
            const double dlog = std::log(g.local_spacing(i)) - cfg.c_cell;
            K(a, b) = -dlog / (8.0 * kPi * kPi);
          } else {
            K(a, b) = N0_kernel((g.nodes.row(i) - g.nodes.row(j)).norm());
          }
        }
      for (int q = 0; q < nq; ++q)
        lamH.col(q) = (-log_channel_lambda(cb.degree[q], rk, rl) /
                       (8.0 * kPi * kPi)) *
                      cb.H.col(q);
      Eigen::MatrixXd P = aw * (K * cb.H);
      Eigen::MatrixXd dK = (lamH - P) * cb.H.transpose();
      C.block(static_cast<int>(k) * m, l * m, m, m) = dK;
    }
  });
  return C;
}

// Same correction sandwiched by v and half-weighted; symmetrized so T0 stays
// exactly self-adjoint.  Added to N0^{(v)} and to M(λ⁴), whose log part is
// λ-independent.
inline Eigen::MatrixXd log_channel_correction(const Potential& pot, const Grid4& g,
                                              const AssemblyConfig& cfg) {
  Eigen::MatrixXd C = raw_log_correction(g, cfg);
  const int n = g.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      C(i, j) *= pot.v[i] * pot.v[j] * std::sqrt(g.w[i] * g.w[j]);
  Eigen::MatrixXd S = 0.5 * (C + C.transpose());
  return S;
}

// (N0 u)(x_i) for a plain value vector u, with the corrected quadrature.
inline Eigen::VectorXd apply_N0_raw(const Grid4& g, const Eigen::VectorXd& u,
                                    const AssemblyConfig& cfg = AssemblyConfig{}) {
  const int n = g.size();
  Eigen::MatrixXd C = raw_log_correction(g, cfg);
  Eigen::VectorXd out(n);
  parallel_for(n, [&](long i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      double k;
      if (i == j) {
        const double dlog = std::log(g.local_spacing(i)) - cfg.c_cell;
        k = -dlog / (8.0 * kPi * kPi);
      } else {
        k = N0_kernel((g.nodes.row(i) - g.nodes.row(j)).norm());
      }
      acc += g.w[j] * (k + C(i, j)) * u[j];
    }
    out[i] = acc;
  });
  return out;
}

enum class SandwichKernel { N0, G2, G4, G4l };

// v(x_i) κ(|x_i - x_j|) v(x_j) with the cell-averaged log on the diagonal.
inline HSOp assemble_sandwiched(SandwichKernel id, const Potential& pot,
                                const Grid4& g,
                                const AssemblyConfig& cfg = AssemblyConfig{}) {
  if (pot.zero())
    throw std::invalid_argument("assemble_sandwiched: potential is zero");
  const int n = g.size();
  Eigen::VectorXd vh = g.w.array().sqrt() * pot.v.array();
  Eigen::MatrixXcd m(n, n);
  parallel_for(n, [&](long i) {
    for (int j = 0; j < n; ++j) {
      cdouble k;
      if (i == static_cast<long>(j)) {
        const double dlog = std::log(g.local_spacing(i)) - cfg.c_cell;
        switch (id) {
          case SandwichKernel::N0: k = -dlog / (8.0 * kPi * kPi); break;
          case SandwichKernel::G2:
          case SandwichKernel::G4:
          case SandwichKernel::G4l: k = 0.0; break;
        }
      } else {
        const double r = (g.nodes.row(i) - g.nodes.row(j)).norm();
        switch (id) {
          case SandwichKernel::N0: k = N0_kernel(r); break;
          case SandwichKernel::G2: k = cfg.g2_scale * G2_kernel(r); break;
          case SandwichKernel::G4: k = G4_kernel(r); break;
          case SandwichKernel::G4l: k = G4l_kernel(r); break;
        }
      }
      m(i, j) = vh[i] * k * vh[j];
    }
  });
  if (id == SandwichKernel::N0 && cfg.shell_mean_correction)
    m += log_channel_correction(pot, g, cfg).cast<cdouble>();
  HSOp op(std::move(m));
  if (!(op.hs < cfg.hs_blowup))
    throw std::runtime_error("assemble_sandwiched: HS norm blowup");
  return op;
}

// M(λ⁴) = M_U + M_v calR_λ M_v ;  diagonal uses the same cell-averaged log,
// so the descent partial sums cancel it exactly.
inline HSOp assemble_M(double lambda, const Potential& pot, const Grid4& g,
                       const AssemblyConfig& cfg = AssemblyConfig{},
                       const KernelRegime& regime = KernelRegime{}) {
  if (lambda <= 0.0) throw std::domain_error("assemble_M: lambda > 0");
  const int n = g.size();
  Eigen::VectorXd vh = g.w.array().sqrt() * pot.v.array();
  Eigen::MatrixXcd m(n, n);
  parallel_for(n, [&](long i) {
    for (int j = 0; j < n; ++j) {
      cdouble k;
      if (i == static_cast<long>(j)) {
        const double dlog = std::log(g.local_spacing(i)) - cfg.c_cell;
        k = gtilde(0, lambda) - dlog / (8.0 * kPi * kPi);
      } else {
        k = calR(lambda, (g.nodes.row(i) - g.nodes.row(j)).norm(), regime);
      }
      m(i, j) = vh[i] * k * vh[j];
    }
  });
  for (int i = 0; i < n; ++i) m(i, i) += pot.U[i];
  // the log part of calR is λ-independent, so the same correction applies;
  // adding it to both M(λ⁴) and T0 keeps their descent difference untouched
  if (cfg.shell_mean_correction && !pot.zero())
    m += log_channel_correction(pot, g, cfg).cast<cdouble>();
  return HSOp(std::move(m));
}

// HS norm of a sandwiched kernel without materializing the matrix.
inline double hs_norm_sandwiched(SandwichKernel id, const Potential& pot,
                                 const Grid4& g,
                                 const AssemblyConfig& cfg = AssemblyConfig{}) {
  const int n = g.size();
  Eigen::VectorXd vh = g.w.array().sqrt() * pot.v.array();
  std::vector<double> rows(n, 0.0);
  parallel_for(n, [&](long i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) {
      double k;
      if (i == static_cast<long>(j)) {
        const double dlog = std::log(g.local_spacing(i)) - cfg.c_cell;
        k = id == SandwichKernel::N0 ? -dlog / (8.0 * kPi * kPi) : 0.0;
      } else {
        const double r = (g.nodes.row(i) - g.nodes.row(j)).norm();
        switch (id) {
          case SandwichKernel::N0: k = N0_kernel(r); break;
          case SandwichKernel::G2: k = cfg.g2_scale * r * r / (256.0 * kPi); break;
          case SandwichKernel::G4: k = G4_kernel(r); break;
          default: k = G4l_kernel(r); break;
        }
      }
      acc += sq(vh[i] * k * vh[j]);
    }
    rows[i] = acc;
  });
  double total = 0.0;
  for (double x : rows) total += x;
  return std::sqrt(total);
}

// T0 = M_U + N0^{(v)}
inline HSOp compute_T0(const Potential& pot, const Grid4& g,
                       const AssemblyConfig& cfg = AssemblyConfig{}) {
  HSOp t0 = assemble_sandwiched(SandwichKernel::N0, pot, g, cfg);
  for (int i = 0; i < t0.n(); ++i) t0.m(i, i) += pot.U[i];
  t0.hs = t0.m.norm();
  return t0;
}

// ---------------------------------------------------------------------------
struct Proj {
  Eigen::MatrixXcd basis;  // n x rank, orthonormal columns
  int rank = 0;
  double tol = 0.0;
  bool gap_warning = false;
  int rank_lo = 0, rank_hi = 0;   // ranks at cut/sqrt(10) and cut*sqrt(10)
  double sigma_kernel_max = 0.0;  // largest σ inside the kernel cut
  double sigma_kept_min = 0.0;    // smallest σ above the cut

  Eigen::MatrixXcd matrix(int n) const {
    if (rank == 0) return Eigen::MatrixXcd::Zero(n, n);
    return basis * basis.adjoint();
  }
};

// P = ṽ⊗ṽ and Q = 1 - P (Q kept as "complement of the P basis").
struct PQPair {
  Eigen::VectorXd vtilde;  // half-weighted, unit norm
  int n = 0;
  Eigen::MatrixXcd P() const {
    return (vtilde * vtilde.transpose()).cast<cdouble>();
  }
  Eigen::MatrixXcd Q() const {
    return Eigen::MatrixXcd::Identity(n, n) - P();
  }
};

inline PQPair build_PQ(const Potential& pot, const Grid4& g) {
  Eigen::VectorXd vh = g.w.array().sqrt() * pot.v.array();
  const double nv = vh.norm();
  if (nv <= 0.0) throw std::invalid_argument("build_PQ: v = 0");
  return PQPair{vh / nv, g.size()};
}

// Householder complement: orthonormal basis of {vtilde}^⊥ applied implicitly.
// H e_1 = vtilde with H = I - 2 u uᵀ; columns 2..n of H span the complement.
struct HouseholderComplement {
  Eigen::VectorXd u;
  int n = 0;

  explicit HouseholderComplement(const Eigen::VectorXd& vtilde) : n(vtilde.size()) {
    Eigen::VectorXd e1 = Eigen::VectorXd::Zero(n);
    e1[0] = 1.0;
    u = e1 - vtilde;
    const double nu = u.norm();
    if (nu < 1e-14) {
      u.setZero();  // vtilde == e1: H = I
    } else {
      u /= nu;
    }
  }
  // apply H to a matrix from both sides: H A H
  Eigen::MatrixXcd conjugate(const Eigen::MatrixXcd& A) const {
    if (u.isZero(0)) return A;
    Eigen::MatrixXcd B = A;
    Eigen::MatrixXcd t = 2.0 * (u.transpose().cast<cdouble>() * B);
    B.noalias() -= u.cast<cdouble>() * t;
    Eigen::MatrixXcd s = 2.0 * (B * u.cast<cdouble>());
    B.noalias() -= s * u.transpose().cast<cdouble>();
    return B;
  }
  Eigen::MatrixXd conjugate_real(const Eigen::MatrixXd& A) const {
    if (u.isZero(0)) return A;
    Eigen::MatrixXd B = A;
    Eigen::MatrixXd t = 2.0 * (u.transpose() * B);
    B.noalias() -= u * t;
    Eigen::MatrixXd s = 2.0 * (B * u);
    B.noalias() -= s * u.transpose();
    return B;
  }
  Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const {
    if (u.isZero(0)) return x;
    return x - 2.0 * u.cast<cdouble>() * (u.cast<cdouble>().dot(x));
  }
  // lift a reduced vector (length n-1, complement coordinates) to full space
  Eigen::VectorXcd lift(const Eigen::VectorXcd& xr) const {
    Eigen::VectorXcd full = Eigen::VectorXcd::Zero(n);
    full.tail(n - 1) = xr;
    return apply(full);
  }
  // restrict A to the complement: (H A H) dropping first row/column
  Eigen::MatrixXcd restrict_op(const Eigen::MatrixXcd& A) const {
    return conjugate(A).block(1, 1, n - 1, n - 1);
  }
};

// ---------------------------------------------------------------------------
// Kernel projection: SVD of A restricted to span(Sbasis); kernel = singular
// values <= tol * σ_max.  A missing factor-10 gap around the cut raises the
// warning flag.
inline Proj kernel_projection(const Eigen::MatrixXcd& A,
                              const Eigen::MatrixXcd& Sbasis, double tol) {
  Proj out;
  out.tol = tol;
  const int k = static_cast<int>(Sbasis.cols());
  if (k == 0) return out;
  Eigen::MatrixXcd R = Sbasis.adjoint() * A * Sbasis;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(R, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  const double smax = sv.size() ? sv(0) : 0.0;
  const double cut = tol * std::max(smax, 1e-300);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) <= cut) ++rank;
  out.rank = rank;
  out.sigma_kernel_max = rank > 0 ? sv(sv.size() - rank) : 0.0;
  out.sigma_kept_min = rank < sv.size() ? sv(sv.size() - rank - 1) : 0.0;
  if (rank > 0) {
    out.basis = Sbasis * svd.matrixV().rightCols(rank);
  } else {
    out.basis.resize(Sbasis.rows(), 0);
  }
  // factor-10 gap demanded around the cut; the two candidate ranks are the
  // counts at cut/sqrt(10) and cut*sqrt(10)
  const double root10 = std::sqrt(10.0);
  for (int i = 0; i < sv.size(); ++i) {
    if (sv(i) <= cut / root10) ++out.rank_lo;
    if (sv(i) <= cut * root10) ++out.rank_hi;
  }
  const bool ratio_ok =
      rank == 0 || rank == sv.size() ||
      out.sigma_kept_min >= 10.0 * std::max(out.sigma_kernel_max, 1e-300);
  out.gap_warning = (out.rank_lo != out.rank_hi) || !ratio_ok;
  return out;
}

inline Proj kernel_projection(const Eigen::MatrixXcd& A, double tol) {
  return kernel_projection(
      A, Eigen::MatrixXcd::Identity(A.rows(), A.cols()), tol);
}

// ---------------------------------------------------------------------------
// Feshbach block inverse of [[a11, a12], [a21, a22]] (a22 invertible):
//   d = (a11 - a12 a22^{-1} a21)^{-1}
//   A^{-1} = [[d, -d a12 a22^{-1}],
//             [-a22^{-1} a21 d, a22^{-1} a21 d a12 a22^{-1} + a22^{-1}]]
struct FeshbachResult {
  bool invertible = false;
  double smallest_sv_d = 0.0;   // σ_min of the Schur complement
  double cond_a22 = 0.0;
  Eigen::MatrixXcd b11, b12, b21, b22;
};

inline FeshbachResult feshbach_inverse(const Eigen::MatrixXcd& a11,
                                       const Eigen::MatrixXcd& a12,
                                       const Eigen::MatrixXcd& a21,
                                       const Eigen::MatrixXcd& a22,
                                       double tol = 1e-13) {
  FeshbachResult r;
  Eigen::JacobiSVD<Eigen::MatrixXcd> s22(a22);
  r.cond_a22 = s22.singularValues()(0) /
               std::max(s22.singularValues().tail(1)(0), 1e-300);
  Eigen::MatrixXcd inv22 = a22.partialPivLu().inverse();
  Eigen::MatrixXcd inv22_a21 = inv22 * a21;
  Eigen::MatrixXcd schur = a11 - a12 * inv22_a21;
  Eigen::JacobiSVD<Eigen::MatrixXcd> sd(schur);
  const auto& sv = sd.singularValues();
  r.smallest_sv_d = sv(sv.size() - 1);
  if (r.smallest_sv_d <= tol * sv(0)) return r;  // not invertible
  r.invertible = true;
  r.b11 = schur.partialPivLu().inverse();
  Eigen::MatrixXcd a12_inv22 = a12 * inv22;
  r.b12 = -r.b11 * a12_inv22;
  r.b21 = -inv22_a21 * r.b11;
  r.b22 = inv22_a21 * r.b11 * a12_inv22 + inv22;
  return r;
}

// ---------------------------------------------------------------------------
// Jensen-Nenciu inversion of A through an auxiliary projection (basis S):
//   B = S - S (A+S)^{-1} S  on range(S);
//   A^{-1} = (A+S)^{-1} + (A+S)^{-1} S B^{-1} S (A+S)^{-1}.
struct JnResult {
  bool invertible = false;
  Eigen::MatrixXcd inv;           // A^{-1} when invertible
  Eigen::MatrixXcd B_restricted;  // k x k reduced operator
  double smallest_sv_B = 0.0;
};

inline JnResult jn_inverse(const Eigen::MatrixXcd& A,
                           const Eigen::MatrixXcd& Sbasis, double tol = 1e-12) {
  const int n = static_cast<int>(A.rows());
  const int k = static_cast<int>(Sbasis.cols());
  Eigen::MatrixXcd ApS = A;
  if (k > 0) ApS.noalias() += Sbasis * Sbasis.adjoint();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(ApS);
  {
    const double rc = lu.rcond();
    if (!(rc > 1e-14))
      throw std::invalid_argument("jn_inverse: A + S numerically singular");
  }
  JnResult r;
  Eigen::MatrixXcd sol = lu.solve(Sbasis);
  r.B_restricted =
      Eigen::MatrixXcd::Identity(k, k) - Sbasis.adjoint() * sol;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(r.B_restricted);
  const auto& sv = svd.singularValues();
  r.smallest_sv_B = sv.size() ? sv(sv.size() - 1) : 0.0;
  const double smax = sv.size() ? sv(0) : 0.0;
  if (k > 0 && r.smallest_sv_B <= tol * std::max(smax, 1.0)) return r;
  r.invertible = true;
  r.inv = lu.inverse();
  if (k > 0) {
    Eigen::MatrixXcd Binv = r.B_restricted.partialPivLu().inverse();
    Eigen::MatrixXcd right = Sbasis.adjoint() * r.inv;  // S (A+S)^{-1}
    r.inv.noalias() += sol * Binv * right;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Raw binary dump (one-line JSON header, then row-major complex doubles).
inline void dump_hsop(const HSOp& op, const std::string& path,
                      const std::string& label = "") {
  std::ofstream out(path, std::ios::binary);
  out << "{\"format\":\"bh4-hsop\",\"version\":1,\"n\":" << op.n()
      << ",\"label\":\"" << label << "\"}\n";
  for (int i = 0; i < op.n(); ++i)
    out.write(reinterpret_cast<const char*>(op.m.row(i).eval().data()),
              sizeof(cdouble) * op.n());
}

}  // namespace bh4
