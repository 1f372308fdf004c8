#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>

#include "gamow/gamow.hpp"
#include "support.hpp"

using namespace gamow;
using support::cplx_of;
using support::golden;
using support::rel;

namespace {

const ShellPotential g0(1.0, 2.0, 10.0);

// First four resonances of G0 and their mirrors, built once for the whole file.
struct Fixture {
  ShellScattering scat{g0};
  PoleSearch search;
  std::vector<GamowState> states;
  std::vector<GamowState> mirrors;

  Fixture() {
    const PoleFinder finder(g0);
    search = finder.find_poles({0.1, 8.0, -3.0, -0.001, 0.25});
    for (const auto& p : search.resonances()) {
      states.push_back(build_state(scat, p, search.poles));
      mirrors.push_back(build_state(scat, finder.mirror(p), search.poles));
    }
  }
};

const Fixture& fx() {
  static const Fixture f;
  return f;
}

}  // namespace

TEST(GamowState, NormalizationMatchesOracle) {
  const auto g = golden("normalization.json")["states"];
  ASSERT_EQ(fx().states.size(), g.size());
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_LT(rel(fx().states[i].n_sq(), cplx_of(g[i]["n_sq"])), 1e-9) << "n=" << i + 1;
}

TEST(GamowState, FakePoleHasNoResidue) {
  const ShellScattering free_scat(ShellPotential(1.0, 2.0, 0.0));
  Pole fake{1, {2.0, -0.5}, cplx{2.0, -0.5} * cplx{2.0, -0.5}, PoleKind::resonance, 0.0};
  EXPECT_THROW(build_state(free_scat, fake), ResidueError);
}

TEST(GamowState, BoundStateIsSquareIntegrable) {
  const ShellPotential well(1.0, 2.0, -5.0);
  const ShellScattering scat(well);
  const PoleSearch search = default_pole_search(PoleFinder(well));
  const auto it = std::find_if(search.poles.begin(), search.poles.end(),
                               [](const Pole& p) { return p.kind == PoleKind::bound; });
  ASSERT_NE(it, search.poles.end());
  const GamowState s = build_state(scat, *it, search.poles);
  EXPECT_GT(s.n_sq().real(), 0.0);
  EXPECT_LT(std::abs(s.n_sq().imag()), 1e-10 * s.n_sq().real());
  const double l2 = integrate([&](double r) { return cplx(std::norm(s(r))); }, 0.0, 60.0, {1e-16, 1e-13}).value.real();
  EXPECT_NEAR(l2, 1.0, 1e-10);
  EXPECT_NEAR(std::abs(zeldovich_norm(s).value - l2), 0.0, 1e-10);
}

TEST(GamowState, ShapeAtOriginAndOuterEdge) {
  const GamowState& s = fx().states[0];
  EXPECT_EQ(s(0.0), cplx{});
  const RadialPoint in = s.at(2.0);
  const RadialPoint out = s.at(2.0 + 1e-12);
  EXPECT_LT(std::abs(in.value - out.value), 1e-9 * std::abs(in.value));
  EXPECT_LT(std::abs(in.derivative - out.derivative), 1e-8 * std::abs(in.derivative));
  // Purely outgoing: u(4)/u(3) = e^{ik}.
  EXPECT_LT(rel(s(4.0) / s(3.0), std::exp(I * s.k())), 1e-13);
  EXPECT_THROW(s(-1.0), DomainError);
}

TEST(GamowState, EigenfunctionMatchesOracleCsv) {
  const GamowState& s = fx().states[0];
  std::istringstream in(support::golden_text("eigenfunction_n1.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'r') continue;
    double r, re, im, mag;
    ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &r, &re, &im, &mag), 4);
    EXPECT_LT(std::abs(s(r) - cplx{re, im}), 1e-8 * std::max(1.0, mag)) << "r=" << r;
    ++rows;
  }
  EXPECT_EQ(rows, 201);
}

TEST(Zeldovich, NormIsOne) {
  for (const auto& s : fx().states) EXPECT_LT(std::abs(zeldovich_norm(s).value - 1.0), 1e-6) << s.pole().n;
}

TEST(Zeldovich, ScalesQuadratically) {
  const GamowState& s = fx().states[1];
  EXPECT_LT(std::abs(zeldovich_norm(s.scaled(2.0)).value - 4.0), 4e-6);
}

TEST(Zeldovich, DistinctStatesAreOrthogonal) {
  const auto& st = fx().states;
  for (std::size_t i = 0; i < st.size(); ++i)
    for (std::size_t j = i + 1; j < st.size(); ++j)
      EXPECT_LT(std::abs(zeldovich_overlap(st[i], st[j]).value), 1e-6) << i + 1 << "," << j + 1;
}

TEST(Zeldovich, RejectsBadRegulatorSequence) {
  const GamowState& s = fx().states[0];
  EXPECT_THROW(zeldovich_norm(s, {0.1, 0.2}), DomainError);
  EXPECT_THROW(zeldovich_norm(s, {0.1, -0.1}), DomainError);
}

TEST(GreenResidue, IsProductOfEigenfunctions) {
  for (std::size_t n : {0u, 1u}) {
    const GamowState& s = fx().states[n];
    for (auto [r, q] : {std::pair{0.3, 2.7}, std::pair{1.2, 0.4}, std::pair{2.5, 1.7}}) {
      const cplx res = green_residue(s, r, q);
      EXPECT_LT(rel(res, s(r) * s(q)), 1e-8);
      EXPECT_LT(rel(green_residue(s, q, r), res), 1e-12);
    }
    EXPECT_LT(std::abs(green_residue(s, 0.0, 1.5)), 1e-14);
  }
}

TEST(Symmetry, MirrorIsComplexConjugate) {
  for (std::size_t i = 0; i < fx().states.size(); ++i) {
    const GamowState& s = fx().states[i];
    const GamowState& m = fx().mirrors[i];
    EXPECT_LT(rel(m.n_sq(), std::conj(s.n_sq())), 1e-10);
    for (double r : {0.4, 1.3, 2.0, 2.9}) EXPECT_LT(rel(std::conj(m(r)), s(r)), 1e-10) << r;
  }
}

TEST(Pairing, ZeroPacketGivesZero) {
  EXPECT_EQ(pair_ket(WavePacket{}, fx().states[0]), cplx{});
  EXPECT_EQ(pair_bra(WavePacket{}, fx().states[0]), cplx{});
}

TEST(Pairing, MatchesQuadratureOracle) {
  const cplx expected = cplx_of(golden("normalization.json")["pair_ket_p1_n1"]);
  EXPECT_LT(rel(pair_ket(standard_packet(1), fx().states[0]), expected), 1e-10);
}

TEST(Pairing, KetConjugatesPacket) {
  const WavePacket phi = standard_packet(3).scaled(cplx{0.0, 1.0});
  const GamowState& s = fx().states[1];
  EXPECT_LT(rel(pair_ket(phi, s), pair_bra(phi.conjugated(), s)), 1e-12);
}

TEST(Evolution, SemigroupDomains) {
  const Pole& res = fx().states[0].pole();
  const Pole& anti = fx().mirrors[0].pole();
  EXPECT_LT(std::abs(evolution_factor(res, 2.0).value - std::exp(-I * res.z * 2.0)), 1e-15);
  EXPECT_NEAR(std::abs(evolution_factor(res, 10.0).value), std::exp(-res.width() * 5.0), 1e-14);
  EXPECT_EQ(evolution_factor(res, 0.0).value, cplx(1.0));
  EXPECT_THROW(evolution_factor(res, -1.0), SemigroupDomainError);
  EXPECT_THROW(evolution_factor(anti, 1.0), SemigroupDomainError);
  EXPECT_NO_THROW(evolution_factor(anti, -1.0));
}

TEST(ResonancePacket, IsNormalizedAndFollowsState) {
  const GamowState& s = fx().states[0];
  const WavePacket p = resonance_packet(s);
  EXPECT_NEAR(p.norm(), 1.0, 1e-10);
  const cplx ratio = p(1.5) / (s(1.5) * std::exp(-1.5 * 1.5 / 8.0));
  EXPECT_LT(rel(p(0.7) / (s(0.7) * std::exp(-0.7 * 0.7 / 8.0)), ratio), 1e-12);
}
