#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include <limsup/farey.hpp>
#include <limsup/membership.hpp>
#include <limsup/minkowski.hpp>
#include <limsup/rates.hpp>
#include <limsup/systems.hpp>

using namespace limsup;

TEST(RateFunction, ParseForms) {
  auto f = RateFunction::parse("2*u^-1*log(u)^2");
  EXPECT_NEAR(f(10.0), 2.0 / 10 * std::pow(std::log(10.0), 2), 1e-12);
  auto g = RateFunction::parse("3^-u");
  EXPECT_NEAR(g(4.0), 1.0 / 81, 1e-15);
  EXPECT_EQ(*g.exact_at(4), Rational(1, 81));
  auto t = RateFunction::parse("table:1=0.5,2=0.25");
  EXPECT_DOUBLE_EQ(t(2.0), 0.25);
  auto u = RateFunction::parse("u");
  EXPECT_EQ(u.integer_at(7), 7);
  EXPECT_THROW(RateFunction::parse("u^^2"), ValidationError);
}

TEST(RateFunction, GeneralizedInverse) {
  EXPECT_EQ(generalized_inverse(RateFunction::parse("2*u"), 5), 3);
  EXPECT_EQ(generalized_inverse(RateFunction::parse("u"), 1), 1);
  EXPECT_EQ(generalized_inverse(RateFunction::parse("u^2"), 10), 4);
}

TEST(Enumerate, RationalFixedWindow) {
  auto items = enumerate_level(RationalFamily{1}, LevelScheme::fixed(2, 3), 1);
  std::vector<std::vector<std::int64_t>> want{{2, 0}, {2, 1}, {2, 2}, {3, 0}, {3, 1}, {3, 2}, {3, 3}};
  ASSERT_EQ(items.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(items[i].index, want[i]);
}

TEST(Enumerate, RationalCountsMatchClosedForm) {
  for (long n = 1; n <= 2; ++n) {
    Family f = RationalFamily{1};
    auto s = LevelScheme::geometric(4);
    auto items = enumerate_level(f, s, n);
    auto [l, u] = level_bounds(f, s, n);
    long c = 0;
    for (long q = l; q <= u; ++q) c += q + 1;
    EXPECT_EQ(static_cast<long>(items.size()), c);
    EXPECT_EQ(static_cast<long double>(c), count_level(f, s, n));
    for (const auto& it : items) {
      EXPECT_GE(beta(it, f), l);
      EXPECT_LE(beta(it, f), u);
    }
  }
  Family f2 = RationalFamily{2};
  EXPECT_EQ(enumerate_level(f2, LevelScheme::identity(), 3).size(), 16u);
}

TEST(Enumerate, ShrinkingWords) {
  Family f = ShrinkingFamily{{CantorSpec(2, {0, 1})}, {Rational(0)}};
  auto items = enumerate_level(f, LevelScheme::identity(), 2);
  ASSERT_EQ(items.size(), 4u);
  std::set<Rational> centers;
  for (const auto& it : items) {
    centers.insert(std::get<CantorPreimageGeometry<Rational>>(it.geometry[0]).center);
    EXPECT_EQ(beta(it, f), 2.0);
  }
  EXPECT_EQ(centers, (std::set<Rational>{Rational(0), Rational(1, 4), Rational(1, 2), Rational(3, 4)}));
  Family g = ShrinkingFamily{{CantorSpec(3, {0, 2}), CantorSpec(2, {0, 1})}, {Rational(1, 2), Rational(0)}};
  EXPECT_EQ(enumerate_level(g, LevelScheme::identity(), 3).size(), 8u * 8u);
  EXPECT_EQ(count_level(g, LevelScheme::identity(), 3), 64.0L);
}

TEST(Enumerate, ShrinkingCenterIncludesTarget) {
  Family f = ShrinkingFamily{{CantorSpec(3, {0, 2})}, {Rational(1, 2)}};
  auto items = enumerate_level(f, LevelScheme::identity(), 1);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(std::get<CantorPreimageGeometry<Rational>>(items[0].geometry[0]).center, Rational(1, 6));
  EXPECT_EQ(std::get<CantorPreimageGeometry<Rational>>(items[1].geometry[0]).center, Rational(5, 6));
}

TEST(Enumerate, LinearFormsWindow) {
  LinearFormsFamily lf{1, 1, {RateFunction::parse("u")}, 2};
  auto items = enumerate_level(Family(lf), LevelScheme::window(2), 2);
  // q in {+-2, +-3, +-4}, |p| <= |q|
  EXPECT_EQ(items.size(), 42u);
  EXPECT_EQ(static_cast<long double>(items.size()), count_level(Family(lf), LevelScheme::window(2), 2));
  for (const auto& it : items) {
    auto q = std::abs(it.index[0]);
    EXPECT_GE(q, 2);
    EXPECT_LE(q, 4);
    EXPECT_LE(std::abs(it.index[1]), q);
  }
}

TEST(Enumerate, CapRaisesSizeErrorWithCount) {
  try {
    enumerate_level(RationalFamily{2}, LevelScheme::geometric(16), 3, 1000);
    FAIL();
  } catch (const SizeError& e) {
    EXPECT_GT(e.count(), 1000u);
  }
}

TEST(Beta, Examples) {
  Family r = RationalFamily{1};
  ResonantItem it{{3, 1}, 0, {}};
  EXPECT_EQ(beta(it, r), 3.0);
  LinearFormsFamily lf{1, 2, {RateFunction::parse("2*u"), RateFunction::parse("2*u")}, 2};
  ResonantItem a{{5, 0, 1}, 0, {}};
  EXPECT_EQ(beta(a, Family(lf)), 3.0);  // Phi^-1(5) = 3, |0|+ = 1
}

TEST(Sanitize, SimultaneousFloor) {
  auto s = sanitize_simultaneous({RateFunction::parse("u^-3")});
  EXPECT_FALSE(s.full_measure);
  for (double q : {2.0, 10.0, 1000.0}) EXPECT_NEAR(s.sanitized[0](q) / std::pow(q, -1.5), 1.0, 1e-12);
  auto keep = sanitize_simultaneous({RateFunction::parse("u^-1")});
  EXPECT_NEAR(keep.sanitized[0](50.0), 1.0 / 50, 1e-15);
}

TEST(Sanitize, FullMeasureShortCircuit) {
  auto s = sanitize_simultaneous({RateFunction::parse("2*u^-1")});
  EXPECT_TRUE(s.full_measure);
  EXPECT_THROW(make_rates(s, RationalFamily{1}, LevelScheme::geometric(16), 1, 3), ValidationError);
}

TEST(Sanitize, RejectsIncreasingPhi) {
  EXPECT_THROW(sanitize_simultaneous({RateFunction::parse("u^1")}), ValidationError);
}

TEST(Sanitize, SmoothingWorkedExample) {
  SanitizeOptions o;
  o.window_lo = 1;
  o.window_hi = 4096;
  o.epsilon = 0.1;
  auto s = sanitize_linear_forms({RateFunction::parse("u^-5")}, {RateFunction::parse("u")}, 2, o);
  EXPECT_FALSE(s.full_measure);
  for (long u = 2; u <= 4096; ++u) ASSERT_NEAR(s.value(0, u) / std::pow(double(u), -1.9), 1.0, 1e-6) << u;
  EXPECT_TRUE(check_sanitized(s).empty());
}

TEST(Sanitize, SmoothingKeepsPhiOnN1) {
  SanitizeOptions o;
  o.window_hi = 2000;
  // phi crosses the target curve: large early, tiny later
  auto phi = RateFunction::table([] {
    std::map<long, double> t;
    for (long u = 1; u <= 2000; ++u) t[u] = u < 100 ? std::pow(double(u), -1.2) : std::pow(double(u), -6.0);
    return t;
  }());
  auto s = sanitize_linear_forms({phi}, {RateFunction::parse("u")}, 2, o);
  EXPECT_TRUE(check_sanitized(s).empty());
  EXPECT_TRUE(s.n1(50));
  EXPECT_FALSE(s.n1(500));
  EXPECT_DOUBLE_EQ(s.value(0, 50), phi(50.0));
}

TEST(Sanitize, LinearFormsValidation) {
  try {
    sanitize_linear_forms({RateFunction::parse("u^-1")}, {RateFunction::parse("0.5*u")}, 2);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Phi"), std::string::npos);
  }
}

TEST(MakeRates, SimultaneousSubstitution) {
  auto s = sanitize_simultaneous({RateFunction::parse("u^-1"), RateFunction::parse("u^-1")});
  auto rp = make_rates(s, RationalFamily{2}, LevelScheme::geometric(32), 1, 4);
  for (double q : {2.0, 17.0, 1e4}) {
    EXPECT_NEAR(rp.psi[0](q) / std::pow(q, -2), 1.0, 1e-12);
    EXPECT_NEAR(rp.rho[1](q) / std::pow(q, -1.5), 1.0, 1e-12);
    // prod rho = (prod phi / q^d) (q prod phi)^-1
    EXPECT_NEAR(rp.rho[0](q) * rp.rho[1](q) / (std::pow(q, -4) * q), 1.0, 1e-12);
  }
}

TEST(MakeRates, LinearFormsSubstitution) {
  SanitizeOptions o;
  o.window_hi = 4096;
  auto s = sanitize_linear_forms({RateFunction::parse("u^-1")}, {RateFunction::parse("u")}, 4, o);
  LinearFormsFamily lf{1, 1, {RateFunction::parse("u")}, 4};
  auto rp = make_rates(s, Family(lf), LevelScheme::window(4), 1, 5);
  for (double u : {2.0, 33.0, 4096.0}) {
    EXPECT_NEAR(rp.psi[0](u) / std::pow(u, -2), 1.0, 1e-12);
    EXPECT_NEAR(rp.rho[0](u) / (4 * std::pow(u, -2)), 1.0, 1e-12);
  }
}

TEST(MakeRates, ShrinkingRho) {
  Family f = ShrinkingFamily{{CantorSpec(2, {0, 1})}, {Rational(0)}};
  auto rp = make_rates(pass_through({RateFunction::parse("u^-1")}), f, LevelScheme::identity(), 1, 6);
  EXPECT_EQ(rp.rho_exact(0, 3), Rational(1, 8));
  EXPECT_EQ(rp.psi_exact(0, 3), Rational(1, 24));
}

TEST(MakeRates, PsiAboveRhoNamesLevel) {
  Family f = ShrinkingFamily{{CantorSpec(2, {0, 1})}, {Rational(0)}};
  try {
    make_rates(pass_through({RateFunction::parse("table:1=0.5,2=0.5,3=2,4=2")}), f, LevelScheme::identity(), 1, 4);
    FAIL();
  } catch (const RateError& e) {
    EXPECT_EQ(e.level(), 3);
  }
}

TEST(Minkowski, Examples) {
  auto w = minkowski_witness<Rational>({{Rational(1, 2)}}, {5}, {Rational(3, 10)});
  EXPECT_EQ(w.q, std::vector<std::int64_t>{2});
  EXPECT_EQ(w.p, std::vector<std::int64_t>{1});
  EXPECT_EQ(w.score, 0);
  auto g = minkowski_witness<double>({{0.6180339887}}, {5}, {0.2});
  EXPECT_EQ(g.q[0], 5);
  EXPECT_EQ(g.p[0], 3);
  EXPECT_NEAR(g.score * 0.2, 0.0901699435, 1e-9);
  EXPECT_TRUE(verify_witness<double>({{0.6180339887}}, {5}, {0.2}, g));
}

TEST(Minkowski, RandomExactMatrices) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> num(0, 1 << 12);
  for (int t = 0; t < 20; ++t) {
    std::vector<std::vector<Rational>> A(2, std::vector<Rational>(2));
    for (auto& row : A)
      for (auto& a : row) a = Rational(num(rng), 1 << 12);
    std::vector<std::int64_t> Phi{9, 9};
    std::vector<Rational> rho{Rational(1, 9), Rational(1, 9)};
    auto w = minkowski_witness(A, Phi, rho);
    EXPECT_TRUE(verify_witness(A, Phi, rho, w));
  }
}

TEST(Minkowski, VolumeAndCapErrors) {
  EXPECT_THROW(minkowski_witness<double>({{0.3}}, {2}, {0.1}), ValidationError);
  EXPECT_THROW(minkowski_witness<double>({{0.3, 0.2, 0.1}}, {1000, 1000, 1000}, {0.5}, 1000), SizeError);
}

TEST(Farey, BracketAndEnumeration) {
  auto [l, r] = farey_bracket(0.6180339887, 10);
  EXPECT_EQ(l.a, 3);
  EXPECT_EQ(l.b, 5);
  EXPECT_EQ(r.a, 5);
  EXPECT_EQ(r.b, 8);
  std::vector<std::pair<long, long>> got;
  for_each_farey_in(0.19, 0.5, 5, [&](std::int64_t a, std::int64_t b) {
    got.push_back({a, b});
    return false;
  });
  std::vector<std::pair<long, long>> want{{1, 5}, {1, 4}, {1, 3}, {2, 5}, {1, 2}};
  EXPECT_EQ(got, want);
}

TEST(Membership, RationalFastPathAgreesWithLoop) {
  Family f = RationalFamily{1};
  auto s = LevelScheme::geometric(16);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  LevelMembership m(f, s, 3, {std::pow(4096.0, -2) * 8});
  for (int i = 0; i < 300; ++i) {
    double x = u(rng);
    bool naive = false;
    for (long q = 256; q <= 4096 && !naive; ++q) {
      double v = q * x;
      naive = std::abs(v - std::round(v)) < q * std::pow(4096.0, -2) * 8;
    }
    EXPECT_EQ(m({x}), naive) << x;
  }
}
