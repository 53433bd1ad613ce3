#include <catch2/catch_amalgamated.hpp>

#include "biharm4/classifier.hpp"

using namespace bh4;

namespace {
Potential gaussian_pot(const Grid4& g, double depth) {
  PotentialSpec spec;
  spec.kind = PotentialSpec::Gaussian;
  spec.depth = depth;
  return sample_potential(spec, g);
}
}  // namespace

TEST_CASE("shallow gaussian well is regular at zero") {
  auto g = build_grid(16, 8.0, 6);
  auto pot = gaussian_pot(g, 0.01);
  auto rep = cascade(pot, g);
  REQUIRE(rep.kind == SingularKind::Regular);
  REQUIRE(rep.rank_S1 == 0);
  REQUIRE(rep.predicted_interval == "(1,inf)");
  REQUIRE(!rep.gap_warning);
  REQUIRE(rep.stages[0].sigma_min > 0.5);
  REQUIRE(std::isfinite(rep.c1_regular));
  REQUIRE(rep.c1_regular == rep.c1_with_S1);
}

TEST_CASE("zero potential is rejected") {
  auto g = build_grid(16, 8.0, 6);
  auto z = gaussian_pot(g, 0.0);
  REQUIRE_THROWS_AS(cascade(z, g), std::invalid_argument);
}

TEST_CASE("s-wave fixture: first kind, rank one") {
  auto g = build_grid(24, 10.0, 6);
  auto fx = engineered_resonance_fixture(ResonanceFixture::SWave, g);
  auto rep = cascade(fx.pot, g);
  REQUIRE(rep.kind == SingularKind::First);
  REQUIRE(rep.rank_S1 == 1);
  REQUIRE(rep.rank_S2 == 0);
  REQUIRE(rep.count_s == 1);
  REQUIRE(rep.predicted_interval == "(1,inf)");
  REQUIRE(!rep.gap_warning);
  // the kernel vector is the (normalized) -wφ up to sign
  Eigen::VectorXd zh = half_weight(g, fx.zeta).normalized();
  const double overlap = std::abs(zh.dot(rep.S1.col(0)));
  REQUIRE(overlap > 0.999);
}

TEST_CASE("p-wave fixture: second kind (full 4-dim dipole multiplet)") {
  auto g = build_grid(24, 10.0, 6);
  auto fx = engineered_resonance_fixture(ResonanceFixture::PWave, g);
  auto rep = cascade(fx.pot, g);
  REQUIRE(rep.kind == SingularKind::Second);
  // radial V admits φ = x_j f(r) for every coordinate
  REQUIRE(rep.rank_S1 == 4);
  REQUIRE(rep.rank_S2 == 4);
  REQUIRE(rep.rank_S3 == 0);
  REQUIRE(rep.count_p == 4);
  REQUIRE(rep.predicted_interval == "(1,4)");
  // S2 membership: T0 ζ = 0 within the grid floor
  HSOp t0 = compute_T0(fx.pot, g);
  Eigen::MatrixXd T0 = t0.m.real();
  auto mc = moment_check(rep.S2.col(0), fx.pot, g, 1, &T0);
  REQUIRE(mc.t0_residual <= 10.0 * 2e-3);
  REQUIRE(std::abs(mc.moment0) < 1e-10);  // exact by construction of S1
}

TEST_CASE("d-wave fixture: third kind (full 9-dim quadrupole multiplet)") {
  auto g = build_grid(24, 10.0, 6);
  auto fx = engineered_resonance_fixture(ResonanceFixture::DWave, g);
  auto rep = cascade(fx.pot, g);
  REQUIRE(rep.kind == SingularKind::Third);
  // radial V admits one resonance per degree-2 harmonic (9 on S³)
  REQUIRE(rep.rank_S1 == 9);
  REQUIRE(rep.rank_S2 == 9);
  REQUIRE(rep.rank_S3 == 9);
  REQUIRE(rep.rank_S4 == 0);
  REQUIRE(rep.count_d == 9);
  REQUIRE(rep.predicted_interval == "(1,2]");
  // S3 membership: characterization moments |<x^α v, ζ>| for |α| <= 1
  HSOp t0 = compute_T0(fx.pot, g);
  Eigen::MatrixXd T0 = t0.m.real();
  auto mc = moment_check(rep.S3.col(0), fx.pot, g, 2, &T0);
  REQUIRE(mc.t0_residual <= 10.0 * 2e-3);
  REQUIRE(mc.max_moment1 <= 10.0 * 2e-3);
}

TEST_CASE("nesting: S_{k+1} ranges sit inside S_k") {
  auto g = build_grid(24, 10.0, 6);
  auto fx = engineered_resonance_fixture(ResonanceFixture::DWave, g);
  auto rep = cascade(fx.pot, g);
  // ||S_k S_{k+1} - S_{k+1}|| with S_k as projection matrices
  auto proj_err = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a * (a.transpose() * b) - b).norm();
  };
  REQUIRE(proj_err(rep.S1, rep.S2) < 1e-9);
  REQUIRE(proj_err(rep.S2, rep.S3) < 1e-9);
}

TEST_CASE("classification stable under radial refinement") {
  for (auto kind : {ResonanceFixture::SWave, ResonanceFixture::PWave}) {
    auto g1 = build_grid(24, 10.0, 6);
    auto g2 = build_grid(36, 10.0, 6);
    auto r1 = cascade(engineered_resonance_fixture(kind, g1).pot, g1);
    auto r2 = cascade(engineered_resonance_fixture(kind, g2).pot, g2);
    REQUIRE(r1.kind == r2.kind);
    REQUIRE(r1.rank_S1 == r2.rank_S1);
    REQUIRE(r1.rank_S2 == r2.rank_S2);
  }
}

TEST_CASE("moment_check of v-tilde itself fails S1 membership") {
  auto g = build_grid(16, 8.0, 6);
  auto pot = gaussian_pot(g, 0.3);
  auto pq = build_PQ(pot, g);
  auto mc = moment_check(pq.vtilde, pot, g, 0, nullptr);
  // <v, ṽ> = ||v||₂ != 0
  REQUIRE(std::abs(mc.moment0 - std::sqrt(pot.norm1)) < 1e-10);
}

TEST_CASE("report serializes with a stable schema") {
  auto g = build_grid(16, 8.0, 6);
  auto rep = cascade(gaussian_pot(g, 0.01), g);
  auto j = rep.to_json();
  REQUIRE(j["version"] == "1");
  REQUIRE(j["kind"] == "Regular");
  REQUIRE(j["ranks"]["S1"] == 0);
  REQUIRE(j["predicted_lp_interval"] == "(1,inf)");
  REQUIRE(j.contains("stages"));
}

TEST_CASE("regular expansion: inversion identity and λ⁴ slope") {
  auto g = build_grid(16, 8.0, 6);
  auto pot = gaussian_pot(g, 0.01);
  auto rep = regular_expansion_check(pot, g, {0.1, 0.03, 0.01});
  REQUIRE(rep.ran);
  REQUIRE(rep.identity_err_max < 1e-9);
  REQUIRE(std::abs(rep.slope - 4.0) < 0.4);
  // the block formula factors as a rank-one outer product (see ledger);
  // σ2/σ1 collapses accordingly
  REQUIRE(rep.rank_L0 == 1);
  REQUIRE(rep.l0_sigma2 < 1e-10 * rep.l0_sigma1);
  REQUIRE(std::isfinite(rep.c1));
}

TEST_CASE("regular expansion skips non-regular input") {
  auto g = build_grid(16, 10.0, 6);
  auto fx = engineered_resonance_fixture(ResonanceFixture::SWave, g);
  auto rep = regular_expansion_check(fx.pot, g, {0.1});
  REQUIRE(!rep.ran);
  REQUIRE(!rep.skip_reason.empty());
}
