// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <limsup/limsup.hpp>

#include "../unit/oracles.hpp"

using namespace limsup;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string f6(double v) {
  char b[64];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

// 1. exact sweep vs grid oracle and Monte Carlo
Outcome exact_vs_oracle() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> nbox(1, 50), dimd(1, 3);
  const int bits[] = {0, 14, 9, 6};
  Outcome o;
  double worst_grid = 0, worst_mc = 0;
  for (int c = 0; c < 200; ++c) {
    int dim = dimd(rng), nb = nbox(rng);
    std::vector<Box> boxes;
    for (int i = 0; i < nb; ++i) {
      std::vector<Interval<double>> ax;
      for (int a = 0; a < dim; ++a) {
        double x = u(rng), w = 0.5 * u(rng) * u(rng);
        ax.push_back({x * (1 - w), x * (1 - w) + w});
      }
      boxes.emplace_back(std::move(ax));
    }
    auto space = AmbientSpace::lebesgue_cube(dim, false);
    auto m = union_measure(boxes, space);
    auto g = oracle::grid_measure(boxes, dim, bits[dim]);
    if (m.value < g.inside - 1e-12 || m.value > g.inside + g.boundary + 1e-12) {
      o.pass = false;
      o.detail += " grid case " + std::to_string(c);
    }
    double mid = g.inside + g.boundary / 2;
    worst_grid = std::max(worst_grid, std::abs(m.value - mid) / std::max(g.boundary / 2, 1e-300));
    auto mc = mc_measure(box_union_predicate(boxes), space, 100000, 1000 + c);
    double dev = std::abs(mc.value - m.value);
    if (dev > mc.error) {
      o.pass = false;
      o.detail += " mc case " + std::to_string(c);
    }
    if (mc.error > 0) worst_mc = std::max(worst_mc, dev / (mc.error / 4));
  }
  double t = seconds_since(t0);
  if (t >= 10) o.pass = false;
  o.detail = "200 cases; max |mc-exact| = " + f6(worst_mc) + " sigma; runtime " + f6(t) + " s" + o.detail;
  return o;
}

// 2. five_r_cover invariants
Outcome covering_invariants() {
  std::mt19937_64 rng(2);
  Outcome o;
  std::size_t kept_total = 0;
  for (int t = 0; t < 1000; ++t) {
    int dim = 1 + t % 3;
    bool torus = (t / 3) % 2 == 0;
    int n = 5 + static_cast<int>(rng() % 40);
    Rational h(1, 8 + static_cast<long>(rng() % 40));
    std::vector<CenteredRect<Rational>> v;
    for (int i = 0; i < n; ++i) {
      std::vector<Rational> c;
      for (int a = 0; a < dim; ++a) c.push_back(Rational(static_cast<long>(rng() % 257), 256));
      v.push_back({c, std::vector<Rational>(dim, h)});
    }
    auto space = AmbientSpace::lebesgue_cube(dim, torus);
    auto kept = five_r_cover(v, space);
    kept_total += kept.size();
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = i + 1; j < kept.size(); ++j)
        if (!enlargements_disjoint(kept[i], kept[j], space, Rational(5))) o.pass = false;
    if (cover_residual(v, kept, space) != 0) o.pass = false;
  }
  o.detail = "1000 families, " + std::to_string(kept_total) + " kept rectangles checked exactly";
  return o;
}

// 3. shrinking targets: ratio 1 on the full space
Outcome shrinking_exactness() {
  Outcome o;
  double worst = 0;
  int count = 0;
  for (int b : {2, 3})
    for (int d : {1, 2}) {
      CantorSpec cs(b, b == 2 ? std::vector<int>{0, 1} : std::vector<int>{0, 2});
      Family f = ShrinkingFamily{std::vector<CantorSpec>(d, cs), std::vector<Rational>(d, Rational(0))};
      auto rp = make_rates(pass_through(std::vector<RateFunction>(d, RateFunction::parse("u^-1"))), f,
                           LevelScheme::identity(), 1, 6);
      for (long n = 1; n <= 6; ++n) {
        auto m = ubiquity_ratio(f, rp, ExactBox::cube(d), n);
        worst = std::max(worst, std::abs(m.value - 1.0));
        ++count;
      }
    }
  o.pass = worst <= 1e-12;
  o.detail = std::to_string(count) + " (b, d, n) cases, max |ratio - 1| = " + f6(worst);
  return o;
}

// 4. rational ubiquity floor
Outcome rational_ubiquity() {
  const double floor = 0.5;  // pinned by tests/oracles/rational_ubiquity_oracle.py
  auto s = sanitize_simultaneous({RateFunction::parse("u^-1")});
  Family f = RationalFamily{1};
  auto rp = make_rates(s, f, LevelScheme::geometric(16), 2, 5);
  // the oracle's balls: center k/64, radius 2^-j
  const std::pair<int, int> kj[] = {{13, 5}, {16, 4}, {50, 5}, {38, 4}, {48, 3}, {24, 5}, {35, 5},
                                    {27, 3}, {37, 4}, {29, 2}, {61, 5}, {42, 3}, {34, 3}, {38, 2},
                                    {31, 5}, {24, 2}, {28, 4}, {26, 4}, {28, 3}, {28, 5}};
  std::vector<ExactBox> balls;
  for (auto [k, j] : kj) {
    Rational c(k, 64), r(1, 1 << j);
    balls.push_back(ExactBox({{Rational(c - r), Rational(c + r)}}));
  }
  UbiquityOptions opt;
  opt.seed = 4;
  auto rep = verify_ubiquity(f, rp, balls, 2, 5, opt);
  double lo = 1;
  int mc = 0;
  for (const auto& e : rep.entries) {
    lo = std::min(lo, e.ratio.value);
    mc += e.ratio.method == Method::MonteCarlo;
  }
  Outcome o;
  o.pass = balls.size() == 20 && lo >= floor;
  o.detail = "min ratio " + f6(lo) + " over " + std::to_string(rep.entries.size()) + " (ball, n) pairs (" +
             std::to_string(mc) + " Monte Carlo), floor " + f6(floor);
  return o;
}

// 5. kappa-scaling exponents
Outcome scaling_exponents() {
  Outcome o;
  auto pt1 = kappa_scaling_probe(FactorSpace::lebesgue(1), PointGeometry<Rational>{{Rational(1, 2)}}, {0.5},
                                 {0.2, 0.3}, {0.001, 0.003, 0.01, 0.05}, 1, 1);
  auto pt2 = kappa_scaling_probe(FactorSpace::lebesgue(2), PointGeometry<Rational>{{Rational(1, 3), Rational(1, 2)}},
                                 {1.0 / 3, 0.5}, {0.2, 0.3}, {0.001, 0.003, 0.01, 0.05}, 1, 1);
  auto slab = kappa_scaling_probe(FactorSpace::lebesgue(2, 0.5, false), AffineGeometry{{1, 1}, 1}, {0.5, 0.5},
                                  {0.1, 0.2}, {0.001, 0.01}, 1000000, 5);
  std::vector<double> eps;
  for (int k = 3; k <= 8; ++k) eps.push_back(std::pow(3.0, -k));
  auto can = kappa_scaling_probe(FactorSpace::cantor_factor(CantorSpec(3, {0, 2})), PointGeometry<Rational>{{Rational(0)}},
                                 {0.0}, {1.0 / 3, 1.0 / 9}, eps, 1, 1);
  const double dc = std::log(2.0) / std::log(3.0);
  o.pass = std::abs(pt1.eps_slope - 1) <= 0.05 && std::abs(pt2.eps_slope - 2) <= 0.05 &&
           std::abs(slab.kappa - 0.5) <= 0.1 && std::abs(can.eps_slope - dc) <= 0.05;
  o.detail = "point eps-slopes " + f6(pt1.eps_slope) + " (delta 1), " + f6(pt2.eps_slope) + " (delta 2); slab kappa " +
             f6(slab.kappa) + "; Cantor eps-slope " + f6(can.eps_slope) + " vs " + f6(dc);
  return o;
}

// 6. rate constructions
Outcome rate_identities() {
  Outcome o;
  double worst = 0;
  auto rel = [&](double got, double want) { worst = std::max(worst, std::abs(got / want - 1)); };
  // simultaneous, d = 2, phi = 1/q
  auto s2 = sanitize_simultaneous({RateFunction::parse("u^-1"), RateFunction::parse("u^-1")});
  auto rp2 = make_rates(s2, RationalFamily{2}, LevelScheme::geometric(32), 1, 2);
  // d = 1, phi = 1/(2q); the floor q^-3/2 wins for q < 4
  auto s1 = sanitize_simultaneous({RateFunction::parse("0.5*u^-1")});
  auto rp1 = make_rates(s1, RationalFamily{1}, LevelScheme::geometric(16), 1, 2);
  // linear forms h = d = 1, Phi = q, phi = 1/q
  SanitizeOptions so;
  so.window_hi = 10000;
  auto sl = sanitize_linear_forms({RateFunction::parse("u^-1")}, {RateFunction::parse("u")}, 4, so);
  LinearFormsFamily lf{1, 1, {RateFunction::parse("u")}, 4};
  auto rpl = make_rates(sl, Family(lf), LevelScheme::window(4), 1, 3);
  for (long q = 2; q <= 10000; ++q) {
    double x = static_cast<double>(q);
    rel(rp2.psi[0](x), std::pow(x, -2));
    rel(rp2.rho[0](x), std::pow(x, -1.5));
    double phibar = std::max(0.5 / x, std::pow(x, -1.5));
    rel(rp1.psi[0](x), phibar / x);
    rel(rp1.rho[0](x), phibar / x / (x * phibar));
    rel(rpl.psi[0](x), 1 / (x * x));
    rel(rpl.rho[0](x), 4 / (x * x));
  }
  bool subst = worst <= 1e-12;
  // phi = u^-5, Phi = u, f = u^0.1: phi~ = u^-1.9
  SanitizeOptions sw;
  sw.window_hi = 10000;
  auto lem = sanitize_linear_forms({RateFunction::parse("u^-5")}, {RateFunction::parse("u")}, 2, sw);
  double lw = 0;
  for (long u = 2; u <= 10000; ++u) lw = std::max(lw, std::abs(lem.value(0, u) / std::pow(double(u), -1.9) - 1));
  // invariants on further inputs
  std::size_t viol = check_sanitized(lem).size();
  for (const char* phi : {"u^-3", "0.1*u^-1.5", "u^-2*log(u)^-1"}) {
    auto s = sanitize_linear_forms({RateFunction::parse(phi)}, {RateFunction::parse("u")}, 2, sw);
    viol += check_sanitized(s).size();
  }
  auto s22 = sanitize_linear_forms({RateFunction::parse("u^-3"), RateFunction::parse("u^-2")},
                                   {RateFunction::parse("u"), RateFunction::parse("2*u")}, 4, sw);
  viol += check_sanitized(s22).size();
  o.pass = subst && lw <= 1e-6 && viol == 0;
  o.detail = "substitution max rel err " + f6(worst) + "; smoothing example max rel err " + f6(lw) +
             "; sanitizer violations " + std::to_string(viol);
  return o;
}

// 7. series diagnostics
Outcome series_diagnostics() {
  Outcome o;
  const long M = 32;
  auto s = sanitize_simultaneous({RateFunction::parse("u^-1"), RateFunction::parse("u^-1")});
  auto rp = make_rates(s, RationalFamily{2}, LevelScheme::geometric(M), 1, 5);
  auto geo = theorem_series(rp, ambient_space(Family(RationalFamily{2})), 10000);
  std::vector<RateFunction> phi{RateFunction::parse("u^-1"), RateFunction::parse("u^-1")};
  auto zeta = application_series(SystemKind::Rational, phi, {}, 10000);
  double z = 0;
  for (long q = 10000; q >= 1; --q) z += 1.0 / (static_cast<double>(q) * q);
  auto harm = application_series(SystemKind::Shrinking, {RateFunction::parse("u^-1")}, {}, 10000);
  double eg = std::abs(geo.final_sum() - 1.0 / (M - 1)), ez = std::abs(zeta.final_sum() - z);
  o.pass = eg <= 1e-6 && ez <= 1e-6 && harm.classification == SeriesClass::Diverging &&
           zeta.classification == SeriesClass::Converging;
  o.detail = "geometric err " + f6(eg) + ", zeta(2) truncation err " + f6(ez) + "; harmonic " +
             series_class_name(harm.classification) + ", q^-2 " + series_class_name(zeta.classification);
  return o;
}

// 8. Chung-Erdos
Outcome chung_erdos() {
  Outcome o;
  LevelSet e;
  e.boxes = {ExactBox({{Rational(1, 7), Rational(3, 5)}})};
  bool algebra = true;
  for (std::size_t N = 2; N <= 8; ++N) {
    auto rep = chung_erdos_bound(std::vector<LevelSet>(N, e), AmbientSpace::lebesgue_cube(1));
    Rational mu = Rational(3, 5) - Rational(1, 7);
    if (!rep.exact_ratio || *rep.exact_ratio != Rational(mu * N / (N - 1))) algebra = false;
  }
  const double pinned = 0.864268927683689;  // tests/oracles/chung_erdos_oracle.py
  Family f = RationalFamily{1};
  auto rp = make_rates(sanitize_simultaneous({RateFunction::parse("u^-1")}), f, LevelScheme::identity(), 1, 20);
  std::vector<LevelSet> sets;
  for (long n = 1; n <= 20; ++n) sets.push_back(build_level_set(f, rp, ExactBox::cube(1), n));
  auto rep = chung_erdos_bound(sets, ambient_space(f));
  double r = rep.ratios.back();
  o.pass = algebra && std::abs(r - pinned) <= 1e-12 && r >= 0.1;
  o.detail = std::string("identical sets exact: ") + (algebra ? "yes" : "no") + "; N=20 ratio " + f6(r) +
             " (pinned " + f6(pinned) + ", mu(B) = 1)";
  return o;
}

// 9. hit trends
Outcome hit_trend() {
  Outcome o;
  const double factor = 3.5, floor = 0.8;  // tests/oracles/hit_trend_oracle.py
  Family f2 = RationalFamily{2};
  auto s2 = sanitize_simultaneous({RateFunction::parse("u^-1"), RateFunction::parse("u^-1")});
  auto rp2 = make_rates(s2, f2, LevelScheme::identity(), 4, 32);
  auto h2 = hit_statistics(f2, rp2, sample_points(ambient_space(f2), 10000, 9), 4, 32);
  double a = h2.window_fraction(4, 8), b = h2.window_fraction(16, 32);
  Family f1 = RationalFamily{1};
  auto rp1 = make_rates(sanitize_simultaneous({RateFunction::parse("u^-1")}), f1, LevelScheme::identity(), 4, 128);
  auto h1 = hit_statistics(f1, rp1, sample_points(ambient_space(f1), 10000, 9), 4, 128);
  double lo = 1;
  for (long N : {4L, 8L, 16L, 32L, 64L}) lo = std::min(lo, h1.window_fraction(N, 2 * N));
  o.pass = b > 0 && a / b >= factor && lo >= floor;
  o.detail = "convergent d=2: " + f6(a) + " -> " + f6(b) + " (factor " + f6(b > 0 ? a / b : INFINITY) + " >= " +
             f6(factor) + "); divergent d=1 min " + f6(lo) + " >= " + f6(floor);
  return o;
}

// 10. Minkowski witnesses
Outcome minkowski() {
  Outcome o;
  std::mt19937_64 rng(10);
  int found = 0;
  for (int t = 0; t < 100; ++t) {
    std::size_t d = 1 + rng() % 2, h = 1 + rng() % 2;
    std::vector<std::vector<Rational>> A(d, std::vector<Rational>(h));
    for (auto& row : A)
      for (auto& a : row) a = Rational(static_cast<long>(rng() % 65537), 65536);
    std::vector<std::int64_t> Phi;
    long prod = 1;
    for (std::size_t k = 0; k < h; ++k) {
      Phi.push_back(1 + static_cast<std::int64_t>(rng() % 12));
      prod *= Phi.back();
    }
    std::vector<Rational> rho;
    if (d == 1 && h == 1 && t % 2 == 0) {
      rho.push_back(Rational(2, 2 * Phi[0] + 1));  // Dirichlet box
    } else {
      long m = static_cast<long>(std::floor(std::pow(static_cast<double>(prod), 1.0 / d) + 1e-9));
      while (static_cast<long>(std::pow(m + 1, d)) <= prod) ++m;
      rho.assign(d, Rational(1, m));
    }
    try {
      auto w = minkowski_witness(A, Phi, rho);
      if (verify_witness(A, Phi, rho, w)) ++found;
    } catch (const std::exception& e) {
      o.detail += std::string(" case ") + std::to_string(t) + ": " + e.what();
    }
  }
  o.pass = found == 100;
  o.detail = std::to_string(found) + "/100 witnesses found and verified in exact arithmetic" + o.detail;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all{
      {"exact union measure vs grid oracle and Monte Carlo", exact_vs_oracle},
      {"5r-cover disjointness and zero residual", covering_invariants},
      {"shrinking-target ubiquity ratio is 1", shrinking_exactness},
      {"rational ubiquity above pinned floor", rational_ubiquity},
      {"kappa-scaling exponents", scaling_exponents},
      {"rate construction identities and sanitizer", rate_identities},
      {"series closed forms and labels", series_diagnostics},
      {"Chung-Erdos algebra and pinned ratio", chung_erdos},
      {"hit-fraction trends", hit_trend},
      {"Minkowski witnesses", minkowski},
  };
  int failed = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    Outcome o;
    auto t0 = Clock::now();
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("criterion %2zu: %s  %s | %s [%.2f s]\n", i + 1, o.pass ? "PASS" : "FAIL", all[i].name,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
