#include <gtest/gtest.h>

#include <algorithm>

#include "gamow/gamow.hpp"
#include "support.hpp"

using namespace gamow;
using support::cplx_of;
using support::golden;

namespace {

const ShellPotential g0(1.0, 2.0, 10.0);

SearchRegion box_region() {
  const auto r = golden("poles_box.json")["region"];
  return {r["re_min"].get<double>(), r["re_max"].get<double>(), r["im_min"].get<double>(),
          r["im_max"].get<double>(), 0.25};
}

}  // namespace

TEST(Classify, Quadrants) {
  EXPECT_EQ(classify({2.0, -0.1}), PoleKind::resonance);
  EXPECT_EQ(classify({-2.0, -0.1}), PoleKind::anti_resonance);
  EXPECT_EQ(classify({0.0, 1.5}), PoleKind::bound);
  EXPECT_EQ(classify({0.0, -0.3}), PoleKind::virtual_state);
  EXPECT_EQ(classify({0.0, 0.0}), PoleKind::virtual_state);
  EXPECT_STREQ(to_string(PoleKind::anti_resonance), "anti_resonance");
  EXPECT_STREQ(to_string(PoleKind::virtual_state), "virtual");
}

TEST(PoleFinder, FreeShellHasNoZeros) {
  const PoleFinder finder(ShellPotential(1.0, 2.0, 0.0));
  EXPECT_EQ(finder.count_zeros(box_region()), 0);
  EXPECT_TRUE(finder.find_poles(box_region()).poles.empty());
}

TEST(PoleFinder, ArgumentPrincipleCountsAndIsAdditive) {
  const PoleFinder finder(g0);
  const SearchRegion box = box_region();
  EXPECT_EQ(finder.count_zeros(box), golden("poles_box.json")["count"].get<int>());
  SearchRegion left = box, right = box;
  left.re_max = right.re_min = 4.6;
  EXPECT_EQ(finder.count_zeros(left) + finder.count_zeros(right), finder.count_zeros(box));
  EXPECT_EQ(finder.count_zeros(left), 2);
}

TEST(PoleFinder, MatchesGridScanOracle) {
  const PoleFinder finder(g0);
  const PoleSearch search = finder.find_poles(box_region());
  EXPECT_TRUE(search.failures.empty());
  const auto expected = golden("poles_box.json")["poles"];
  const auto found = search.resonances();
  ASSERT_EQ(found.size(), expected.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    const cplx k = cplx_of(expected[i]);
    EXPECT_EQ(found[i].n, static_cast<int>(i) + 1);
    EXPECT_LT(std::abs(found[i].k - k), 1e-9 * std::abs(k));
    EXPECT_LE(found[i].jost_residual, 1e-11);
    EXPECT_EQ(finder.winding_circle(found[i].k, 1e-3), 1);
  }
}

TEST(PoleFinder, MirrorsCarryNegatedIndex) {
  const PoleFinder finder(g0);
  const PoleSearch search = finder.find_poles(box_region());
  for (const auto& p : search.resonances()) {
    const auto it = std::find_if(search.poles.begin(), search.poles.end(), [&](const Pole& m) { return m.n == -p.n; });
    ASSERT_NE(it, search.poles.end());
    EXPECT_EQ(it->kind, PoleKind::anti_resonance);
    EXPECT_EQ(it->k, -std::conj(p.k));
    EXPECT_LT(std::abs(it->z - std::conj(p.z)), 1e-14 * std::abs(p.z));
    EXPECT_LE(it->jost_residual, 1e-11);
  }
}

TEST(PoleFinder, WidthIsMinusTwiceImaginaryEnergy) {
  const auto poles = PoleFinder(g0).find_poles(box_region()).resonances();
  ASSERT_FALSE(poles.empty());
  const cplx k = poles.front().k;
  EXPECT_NEAR(poles.front().width(), -4.0 * k.real() * k.imag(), 1e-15);
}

TEST(PoleFinder, DefaultSearchMatchesOracleTable) {
  const auto table = golden("poles_default.json");
  const PoleSearch search = default_pole_search(PoleFinder(g0));
  EXPECT_TRUE(search.failures.empty());
  ASSERT_EQ(search.poles.size(), table.size());
  for (const auto& row : table) {
    const int n = row["n"].get<int>();
    const auto it = std::find_if(search.poles.begin(), search.poles.end(), [&](const Pole& p) { return p.n == n; });
    ASSERT_NE(it, search.poles.end()) << n;
    const cplx k{row["k_re"].get<double>(), row["k_im"].get<double>()};
    EXPECT_LT(std::abs(it->k - k), 1e-9 * std::abs(k)) << n;
    EXPECT_EQ(to_string(it->kind), row["kind"].get<std::string>());
  }
}

TEST(PoleFinder, BoundStateOfAttractiveShell) {
  const auto g = golden("bound_state.json");
  const ShellPotential well(g["geometry"]["a"].get<double>(), g["geometry"]["b"].get<double>(),
                            g["geometry"]["v0"].get<double>());
  const PoleSearch search = default_pole_search(PoleFinder(well));
  const auto bound = std::find_if(search.poles.begin(), search.poles.end(),
                                  [](const Pole& p) { return p.kind == PoleKind::bound; });
  ASSERT_NE(bound, search.poles.end());
  EXPECT_EQ(bound->n, 1);
  EXPECT_NEAR(bound->k.imag(), g["kappa"].get<double>(), 1e-10);
  EXPECT_NEAR(bound->k.real(), 0.0, 1e-10);
  EXPECT_NEAR(bound->z.real(), g["energy"].get<double>(), 1e-9);
  EXPECT_LE(std::abs(bound->z.imag()), 1e-10);
}

TEST(PoleFinder, RepulsiveShellHasNoBoundBox) {
  EXPECT_FALSE(bound_state_region(g0).has_value());
  EXPECT_TRUE(bound_state_region(ShellPotential(1.0, 2.0, -1.0)).has_value());
}

TEST(PoleFinder, ResultIndependentOfThreadCount) {
  const auto one = PoleFinder(g0, 1).find_poles(box_region()).poles;
  const auto four = PoleFinder(g0, 4).find_poles(box_region()).poles;
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].n, four[i].n);
    EXPECT_EQ(one[i].k, four[i].k);
  }
}

TEST(PoleFinder, RejectsEmptyRegion) {
  EXPECT_THROW(PoleFinder(g0).find_poles({1.0, 1.0, -1.0, 0.0}), DomainError);
}

TEST(PoleFinder, PolishConvergesFromNearbyStart) {
  const PoleFinder finder(g0);
  const cplx k = cplx_of(golden("poles_box.json")["poles"][1]);
  const auto polished = finder.polish(k + cplx{0.02, 0.01});
  ASSERT_TRUE(polished.has_value());
  EXPECT_LT(std::abs(*polished - k), 1e-10);
}
