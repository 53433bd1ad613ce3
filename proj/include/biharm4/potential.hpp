#pragma once

// Potentials sampled on the grid, with the derived fields
//   U = sign V,  v = |V|^{1/2},  w = U v   (so V = v w pointwise)
// and the weighted norms entering the decay hypotheses.  Also the engineered
// resonance fixtures: closed-form (V, φ) pairs with (Δ² + V)φ = 0 exactly.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "biharm4/grid.hpp"

namespace bh4 {

struct PotentialSpec {
  enum Kind { Gaussian, Table, EngineeredS, EngineeredP, EngineeredD };
  Kind kind = Gaussian;
  double depth = 0.05;              // gaussian well: V = -depth * exp(-|x|^2)
  std::vector<long> indices;        // table: node indices
  std::vector<double> values;       // table: values at those nodes
};

struct Potential {
  const Grid4* grid = nullptr;
  Eigen::VectorXd V, U, v, w;
  std::map<int, double> log_weighted_norm1;  // k -> ||<log|x|>^2 <x>^k V||_1
  double q = 2.0;
  double norm_q = 0.0;              // ||V||_q on the grid
  double norm1 = 0.0;               // ||V||_1 = ||v||_2^2

  bool zero() const { return norm1 == 0.0; }
};

namespace fixtures {

// s-wave: φ = 1 + e^{-r²}
inline double phi_s(double r) { return 1.0 + std::exp(-r * r); }
inline double bih_s(double r) {  // Δ²φ, radial
  const double s = r * r;
  return 16.0 * (s * s - 6.0 * s + 6.0) * std::exp(-s);
}
inline double V_s(double r) { return -bih_s(r) / phi_s(r); }

// p-wave: φ = x₁ f(r), f = (1 - e^{-r²})/r²  (f(0) = 1)
inline double f_p(double r) {
  const double s = r * r;
  return s < 1e-12 ? 1.0 - s / 2.0 : -std::expm1(-s) / s;
}
inline double bih_p(double r) {  // Δ²φ = x₁ * bih_p(r)
  const double s = r * r;
  return 16.0 * (4.0 - s) * std::exp(-s);
}
inline double V_p(double r) {
  const double s = r * r;
  if (s < 1e-10) return -64.0 + 48.0 * s;
  return 16.0 * s * (s - 4.0) / std::expm1(s);
}

// Σ_{k>=2} s^k / k! = e^s - 1 - s, summed directly when the subtraction
// would cancel.
inline double exp_tail2(double s) {
  if (s >= 0.25) return std::expm1(s) - s;
  double term = s * s / 2.0, sum = term;
  for (int k = 3; k < 24; ++k) {
    term *= s / k;
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

// d-wave: φ = x₁x₂ f(r), f = (1 - (1+r²)e^{-r²})/r⁴  (f(0) = 1/2)
inline double f_d(double r) {
  const double s = r * r;
  if (s >= 0.25) return (1.0 - (1.0 + s) * std::exp(-s)) / (s * s);
  // Σ_{k>=2} (-1)^k (k-1)/k! s^{k-2}
  double term = 0.5, sum = term, sk = 1.0;  // k = 2 term
  double fact = 2.0;
  for (int k = 3; k < 24; ++k) {
    fact *= k;
    sk *= -s;
    term = (k - 1.0) * sk / fact;
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}
inline double bih_d(double r) {  // Δ²φ = x₁x₂ * bih_d(r)
  const double s = r * r;
  return 16.0 * (5.0 - s) * std::exp(-s);
}
inline double V_d(double r) {
  const double s = r * r;
  if (s < 1e-10) return -160.0 + 256.0 / 3.0 * s;
  return 16.0 * s * s * (5.0 - s) / (-exp_tail2(s));
}

}  // namespace fixtures

inline double potential_value(const PotentialSpec& spec, double r) {
  switch (spec.kind) {
    case PotentialSpec::Gaussian:
      return -spec.depth * std::exp(-r * r);
    case PotentialSpec::EngineeredS:
      return fixtures::V_s(r);
    case PotentialSpec::EngineeredP:
      return fixtures::V_p(r);
    case PotentialSpec::EngineeredD:
      return fixtures::V_d(r);
    default:
      throw std::logic_error("potential_value: table has no radial profile");
  }
}

inline Potential sample_potential(const PotentialSpec& spec, const Grid4& grid,
                                  double q = 2.0) {
  const int n = grid.size();
  Potential p;
  p.grid = &grid;
  p.q = q;
  p.V.resize(n);
  if (spec.kind == PotentialSpec::Table) {
    if (static_cast<int>(spec.indices.size()) != n ||
        spec.values.size() != spec.indices.size())
      throw std::invalid_argument(
          "sample_potential: table must cover every grid node");
    Eigen::VectorXd seen = Eigen::VectorXd::Zero(n);
    for (size_t k = 0; k < spec.indices.size(); ++k) {
      const long i = spec.indices[k];
      if (i < 0 || i >= n) throw std::invalid_argument("table index out of range");
      p.V[i] = spec.values[k];
      seen[i] += 1.0;
    }
    if ((seen.array() != 1.0).any())
      throw std::invalid_argument("table must list each node exactly once");
  } else {
    for (int i = 0; i < n; ++i) p.V[i] = potential_value(spec, grid.r[i]);
  }
  if (!p.V.allFinite())
    throw std::invalid_argument("sample_potential: non-finite value rejected");

  p.U.resize(n);
  p.v.resize(n);
  p.w.resize(n);
  for (int i = 0; i < n; ++i) {
    const double Vi = p.V[i];
    p.U[i] = std::abs(Vi) < 1e-300 ? 0.0 : (Vi > 0.0 ? 1.0 : -1.0);
    p.v[i] = std::sqrt(std::abs(Vi));
    p.w[i] = p.U[i] * p.v[i];
  }
  for (int k : {0, 3, 8, 12, 16}) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      s += grid.w[i] * sq(logbracket(grid.r[i])) *
           std::pow(jbracket(grid.r[i]), k) * std::abs(p.V[i]);
    p.log_weighted_norm1[k] = s;
  }
  // computed through v so ||v||_2^2 = ||V||_1 holds bit-exactly on the grid
  p.norm1 = (grid.w.array() * p.v.array().square()).sum();
  p.norm_q = grid.norm_p(p.V, q);
  return p;
}

// ---------------------------------------------------------------------------
// Engineered fixtures: (V, φ) with (Δ² + V)φ = 0 identically, φ bounded, and
// a known resonance type.  ζ = -wφ is the matching kernel vector.
struct ResonanceFixture {
  enum Kind { SWave, PWave, DWave };
  Kind kind = SWave;
  Potential pot;
  Eigen::VectorXd phi;   // φ on grid nodes
  Eigen::VectorXd zeta;  // -wφ on grid nodes
  double expected_c0 = 0.0;
  // closed-form evaluators (arbitrary points, e.g. far field)
  std::function<double(const Eigen::RowVector4d&)> phi_at;
  std::function<double(const Eigen::RowVector4d&)> bih_at;  // Δ²φ
};

inline ResonanceFixture engineered_resonance_fixture(ResonanceFixture::Kind kind,
                                                     const Grid4& grid) {
  ResonanceFixture fx;
  fx.kind = kind;
  PotentialSpec spec;
  switch (kind) {
    case ResonanceFixture::SWave:
      spec.kind = PotentialSpec::EngineeredS;
      fx.phi_at = [](const Eigen::RowVector4d& x) {
        return fixtures::phi_s(x.norm());
      };
      fx.bih_at = [](const Eigen::RowVector4d& x) {
        return fixtures::bih_s(x.norm());
      };
      fx.expected_c0 = -1.0;  // φ -> 1 = -c0 at infinity
      break;
    case ResonanceFixture::PWave:
      spec.kind = PotentialSpec::EngineeredP;
      fx.phi_at = [](const Eigen::RowVector4d& x) {
        return x[0] * fixtures::f_p(x.norm());
      };
      fx.bih_at = [](const Eigen::RowVector4d& x) {
        return x[0] * fixtures::bih_p(x.norm());
      };
      fx.expected_c0 = 0.0;
      break;
    case ResonanceFixture::DWave:
      spec.kind = PotentialSpec::EngineeredD;
      fx.phi_at = [](const Eigen::RowVector4d& x) {
        return x[0] * x[1] * fixtures::f_d(x.norm());
      };
      fx.bih_at = [](const Eigen::RowVector4d& x) {
        return x[0] * x[1] * fixtures::bih_d(x.norm());
      };
      fx.expected_c0 = 0.0;
      break;
  }
  fx.pot = sample_potential(spec, grid);
  const int n = grid.size();
  fx.phi.resize(n);
  fx.zeta.resize(n);
  for (int i = 0; i < n; ++i) {
    fx.phi[i] = fx.phi_at(grid.nodes.row(i));
    fx.zeta[i] = -fx.pot.w[i] * fx.phi[i];
  }
  return fx;
}

// ---------------------------------------------------------------------------
// Decay-hypothesis check: the weighted norms required by the four theorem
// cases, with a truncation-growth test standing in for finiteness.
struct HypothesisReport {
  int theorem_case = 1;
  int k = 8;
  double log_weighted_norm = 0.0;       // ||<log>^2 <x>^k V||_1 on the grid
  std::vector<double> partial;          // partial sums at R/4, R/2, 3R/4, R
  bool finite = true;
  double lq_loc_norm = 0.0;             // sup over sampled centers
  std::vector<double> center_radii;     // ball centers used (along e1)
  double q = 2.0;
};

inline HypothesisReport hypothesis_check(const Potential& pot, int theorem_case) {
  static const int kcase[5] = {0, 8, 12, 16, 16};
  if (theorem_case < 1 || theorem_case > 4)
    throw std::invalid_argument("hypothesis_check: case in 1..4");
  const Grid4& g = *pot.grid;
  HypothesisReport rep;
  rep.theorem_case = theorem_case;
  rep.k = kcase[theorem_case];
  rep.q = pot.q;

  auto partial_norm = [&](double R) {
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i)
      if (g.r[i] <= R)
        s += g.w[i] * sq(logbracket(g.r[i])) *
             std::pow(jbracket(g.r[i]), rep.k) * std::abs(pot.V[i]);
    return s;
  };
  for (double f : {0.25, 0.5, 0.75, 1.0}) rep.partial.push_back(partial_norm(f * g.r_max));
  rep.log_weighted_norm = rep.partial.back();
  const double tail = rep.partial[3] - rep.partial[2];
  rep.finite = rep.partial[3] == 0.0 || tail <= 0.05 * rep.partial[3];

  // uniform-local L^q over balls of radius 2 centered on the e1 axis
  for (double f : {0.0, 0.25, 0.5, 0.75}) rep.center_radii.push_back(f * g.r_max);
  for (double c : rep.center_radii) {
    Eigen::RowVector4d y{c, 0.0, 0.0, 0.0};
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i)
      if ((g.nodes.row(i) - y).norm() <= 2.0)
        s += g.w[i] * std::pow(std::abs(pot.V[i]), pot.q);
    rep.lq_loc_norm = std::max(rep.lq_loc_norm, std::pow(s, 1.0 / pot.q));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON potential definition:  {"type": "gaussian"|"table"|"engineered_s", ...}
// ("engineered_p" / "engineered_d" are accepted as extensions.)
inline PotentialSpec potential_spec_from_json(const nlohmann::json& j) {
  PotentialSpec spec;
  const std::string type = j.at("type").get<std::string>();
  if (type == "gaussian") {
    spec.kind = PotentialSpec::Gaussian;
    spec.depth = j.value("depth", 0.05);
  } else if (type == "table") {
    spec.kind = PotentialSpec::Table;
    spec.indices = j.at("indices").get<std::vector<long>>();
    spec.values = j.at("values").get<std::vector<double>>();
  } else if (type == "engineered_s") {
    spec.kind = PotentialSpec::EngineeredS;
  } else if (type == "engineered_p") {
    spec.kind = PotentialSpec::EngineeredP;
  } else if (type == "engineered_d") {
    spec.kind = PotentialSpec::EngineeredD;
  } else {
    throw std::invalid_argument("unknown potential type: " + type);
  }
  return spec;
}

}  // namespace bh4
