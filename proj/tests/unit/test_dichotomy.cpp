#include <gtest/gtest.h>

#include <cmath>

#include <limsup/dichotomy.hpp>

using namespace limsup;

TEST(Series, PsiEqualsRhoCountsLevels) {
  Family f = ShrinkingFamily{{CantorSpec(2, {0, 1})}, {Rational(0)}};
  auto rp = make_rates(pass_through({RateFunction::parse("u^-1")}), f, LevelScheme::identity(), 1, 2);
  rp.psi = rp.rho;
  auto rep = theorem_series(rp, ambient_space(f), 1000);
  EXPECT_NEAR(rep.final_sum(), 1000.0, 1e-9);
  EXPECT_EQ(rep.classification, SeriesClass::Diverging);
}

TEST(Series, GeometricClosedForm) {
  const long M = 32;
  auto s = sanitize_simultaneous({RateFunction::parse("u^-1"), RateFunction::parse("u^-1")});
  auto rp = make_rates(s, RationalFamily{2}, LevelScheme::geometric(M), 1, 5);
  auto rep = theorem_series(rp, std::vector<double>{1, 1}, std::vector<double>{0, 0}, 10000);
  EXPECT_NEAR(rep.final_sum(), 1.0 / (M - 1), 1e-6);
  EXPECT_EQ(rep.classification, SeriesClass::Converging);
}

TEST(Series, ApplicationZetaTwo) {
  std::vector<RateFunction> phi{RateFunction::parse("u^-1"), RateFunction::parse("u^-1")};
  auto rep = application_series(SystemKind::Rational, phi, {}, 10000);
  double z = 0;
  for (long q = 10000; q >= 1; --q) z += 1.0 / (double(q) * q);
  EXPECT_NEAR(rep.final_sum(), z, 1e-9);
  EXPECT_NEAR(rep.final_sum(), 1.64483, 1e-5);
  EXPECT_EQ(rep.classification, SeriesClass::Converging);
  for (std::size_t i = 1; i < rep.points.size(); ++i) EXPECT_GE(rep.points[i].partial_sum, rep.points[i - 1].partial_sum);
}

TEST(Series, HarmonicDiverges) {
  auto lf = application_series(SystemKind::LinearForms, {RateFunction::parse("u^-1")}, {RateFunction::parse("u")},
                               10000, 2);
  EXPECT_EQ(lf.classification, SeriesClass::Diverging);
  EXPECT_TRUE(lf.has_block);
  EXPECT_GE(lf.block_bound, 0.0);
  auto st = application_series(SystemKind::Shrinking, {RateFunction::parse("u^-1")}, {}, 10000);
  EXPECT_EQ(st.classification, SeriesClass::Diverging);
  double h = 0;
  for (long n = 1; n <= 10000; ++n) h += 1.0 / n;
  EXPECT_NEAR(st.final_sum(), h, 1e-9);
}

TEST(LevelSetTest, ShrinkingSingleCenter) {
  Family f = ShrinkingFamily{{CantorSpec(2, {0, 1})}, {Rational(0)}};
  auto rp = make_rates(pass_through({RateFunction::parse("u^-1")}), f, LevelScheme::identity(), 1, 4);
  auto ls = build_level_set(f, rp, ExactBox::cube(1), 3);
  ASSERT_EQ(ls.big.size(), 1u);
  EXPECT_EQ(ls.big[0].half[0], Rational(1, 8));
  auto space = ambient_space(f);
  EXPECT_EQ(exact_union_measure(to_boxes(ls.big[0], space, Rational(5)), lebesgue_shadow(space)).value, 1);
  EXPECT_TRUE(check_level_set(ls, space).empty());
  for (const auto& c : ls.shrunk) EXPECT_EQ(c.size(), 1u);  // points: one rectangle per center
}

TEST(LevelSetTest, RationalInvariantsAndCountFormula) {
  Family f = RationalFamily{1};
  auto s = sanitize_simultaneous({RateFunction::parse("u^-1")});
  auto rp = make_rates(s, f, LevelScheme::identity(), 1, 40);
  auto space = ambient_space(f);
  for (long n : {5L, 17L, 40L}) {
    auto ls = build_level_set(f, rp, ExactBox::cube(1), n);
    EXPECT_TRUE(check_level_set(ls, space).empty());
    // interior rectangles: measure = #rectangles * 2 psi
    std::size_t cnt = 0;
    for (const auto& c : ls.shrunk) cnt += c.size();
    Rational m = exact_union_measure(ls.boxes, space).value;
    Rational expect = Rational(cnt) * 2 * rp.psi_exact(0, n);
    EXPECT_LE(m, expect);
    EXPECT_GE(m, Rational(expect - 2 * rp.psi_exact(0, n)));
  }
}

TEST(ChungErdos, IdenticalSets) {
  LevelSet ls;
  ls.boxes = {ExactBox({{Rational(1, 5), Rational(1, 2)}})};
  std::vector<LevelSet> sets(6, ls);
  auto rep = chung_erdos_bound(sets, AmbientSpace::lebesgue_cube(1));
  ASSERT_TRUE(rep.exact_ratio);
  EXPECT_EQ(*rep.exact_ratio, Rational(Rational(3, 10) * 6 / 5));
  for (std::size_t N = 2; N <= 6; ++N) EXPECT_NEAR(rep.ratios[N - 2], 0.3 * N / (N - 1), 1e-15);
}

TEST(ChungErdos, DisjointSetsGiveInfinity) {
  LevelSet a, b;
  a.boxes = {ExactBox({{Rational(0), Rational(1, 4)}})};
  b.boxes = {ExactBox({{Rational(1, 2), Rational(3, 4)}})};
  auto rep = chung_erdos_bound({a, b}, AmbientSpace::lebesgue_cube(1));
  EXPECT_TRUE(std::isinf(rep.ratios.back()));
  EXPECT_FALSE(rep.exact_ratio);
  EXPECT_NE(rep.note.find("0.5"), std::string::npos);
}

TEST(ChungErdos, RelabelingInvariant) {
  LevelSet a, b, c;
  a.boxes = {ExactBox({{Rational(0), Rational(1, 2)}})};
  b.boxes = {ExactBox({{Rational(1, 4), Rational(3, 4)}})};
  c.boxes = {ExactBox({{Rational(1, 3), Rational(1)}})};
  auto space = AmbientSpace::lebesgue_cube(1);
  auto r1 = chung_erdos_bound({a, b, c}, space);
  auto r2 = chung_erdos_bound({c, a, b}, space);
  EXPECT_EQ(*r1.exact_ratio, *r2.exact_ratio);
}

TEST(ChungErdos, DivergentRationalPinned) {
  Family f = RationalFamily{1};
  auto s = sanitize_simultaneous({RateFunction::parse("u^-1")});
  auto rp = make_rates(s, f, LevelScheme::identity(), 1, 20);
  std::vector<LevelSet> sets;
  for (long n = 1; n <= 20; ++n) sets.push_back(build_level_set(f, rp, ExactBox::cube(1), n));
  auto rep = chung_erdos_bound(sets, ambient_space(f));
  EXPECT_NEAR(rep.ratios.back(), 0.864268927683689, 1e-12);
  EXPECT_NEAR(to_double(rep.measures[2]), 2.0 / 9, 1e-15);
  // symmetric with the measures on the diagonal
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 20; ++j) EXPECT_EQ(rep.pairwise[i][j], rep.pairwise[j][i]);
}

TEST(Hits, OriginHitsEveryLevel) {
  Family f = RationalFamily{1};
  auto rp = make_rates(sanitize_simultaneous({RateFunction::parse("u^-1")}), f, LevelScheme::identity(), 1, 50);
  auto h = hit_statistics(f, rp, {{0.0}}, 1, 50);
  for (char c : h.hits[0]) EXPECT_EQ(c, 1);
  EXPECT_EQ(h.window_fraction(1, 50, 50), 1.0);
}

TEST(Hits, GoldenRatioHitsFibonacci) {
  Family f = RationalFamily{1};
  auto rp = make_rates(sanitize_simultaneous({RateFunction::parse("u^-1")}), f, LevelScheme::identity(), 1, 100);
  auto h = hit_statistics(f, rp, {{0.6180339887}}, 1, 100);
  std::vector<long> got;
  for (long q = 1; q <= 100; ++q)
    if (h.hits[0][q - 1]) got.push_back(q);
  EXPECT_EQ(got, (std::vector<long>{1, 2, 3, 5, 8, 13, 21, 34, 55, 89}));
}

TEST(Hits, FractionsNonincreasingInK) {
  Family f = RationalFamily{1};
  auto rp = make_rates(sanitize_simultaneous({RateFunction::parse("u^-1")}), f, LevelScheme::identity(), 4, 8);
  auto pts = sample_points(ambient_space(f), 2000, 1);
  auto h = hit_statistics(f, rp, pts, 4, 8);
  double prev = 1.0;
  for (int k = 1; k <= 5; ++k) {
    double v = h.window_fraction(4, 8, k);
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_THROW(h.window_fraction(3, 8), ValidationError);
}

TEST(Hits, ConvergentTrendAgainstOracleBand) {
  Family f = RationalFamily{2};
  auto s = sanitize_simultaneous({RateFunction::parse("u^-1"), RateFunction::parse("u^-1")});
  auto rp = make_rates(s, f, LevelScheme::identity(), 4, 32);
  auto pts = sample_points(ambient_space(f), 10000, 2024);
  auto h = hit_statistics(f, rp, pts, 4, 32);
  EXPECT_NEAR(h.window_fraction(4, 8), 0.532604308, 0.02);
  EXPECT_NEAR(h.window_fraction(16, 32), 0.125341718, 0.0133);
}
