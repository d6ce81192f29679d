#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "ckpe/decoupled.hpp"
#include "tuple_sweep.hpp"

using namespace ckpe;

namespace {

FillTuple canonical_tuple(int deg, int genus, const ExtendedK& k, double area_if_free = 1.0) {
  int chi = 2 - 2 * genus;
  PeriodArea pa = canonical_period_area(deg, chi, k);
  FillTuple t;
  t.deg = deg;
  t.chi = chi;
  t.k = k;
  t.period_p = pa.period;
  t.area_a = pa.area_free ? area_if_free : pa.area;
  return t;
}

// Closed-form torus profile for deg != 0 written independently of the
// polynomial representation.
double torus_e_w(int deg, double k3, double xi) {
  double k6 = k3 * k3;
  double num = 1152.0 * k6 - 6.0 * k3 * (8.0 * xi * xi * xi - 12.0 * xi * xi - 6.0 * xi + 1.0) +
               xi * xi * xi;
  return deg / (4.0 * M_PI * M_PI) * 4.0 * M_PI * (2.0 * xi - 1.0) * num /
         ((48.0 * k3 - 1.0) * (96.0 * k3 + 1.0));
}

double torus_We_w(int deg, double k3, double xi) {
  double num = 24.0 * M_PI * k3 * (192.0 * k3 * (xi - 1.0) - 4.0 * xi + 1.0);
  return deg / (4.0 * M_PI * M_PI) * num / ((48.0 * k3 - 1.0) * (96.0 * k3 + 1.0));
}

// Higher-genus closed form, deg != -chi.
double sigma_e_w(int deg, int chi, double vol, double k3, double xi) {
  double k6 = k3 * k3;
  double p1 = -chi * (1.0 + 96.0 * k3) * (xi * xi + 12.0 * k3 * (1.0 + 2.0 * xi));
  double p2 = -2.0 * deg *
              (1152.0 * k6 + xi * xi * xi -
               6.0 * k3 * (1.0 + 2.0 * xi) * (1.0 - 8.0 * xi + 4.0 * xi * xi));
  return (p1 + p2) * 2.0 * M_PI * (1.0 - 2.0 * xi) /
         (vol * (48.0 * k3 - 1.0) * (1.0 + 96.0 * k3));
}

double sigma_We_w(int deg, int chi, double vol, double k3, double xi) {
  double num = 24.0 * k3 * M_PI *
               (-chi * (1.0 + 96.0 * k3) - deg * (-1.0 + 192.0 * k3 * (1.0 - xi) + 4.0 * xi));
  return num / (vol * (48.0 * k3 - 1.0) * (1.0 + 96.0 * k3));
}

}  // namespace

TEST_CASE("degree-zero torus profile") {
  FillTuple t = canonical_tuple(0, 1, ExtendedK::parse("1/cbrt48"), 1.0);
  DecoupledProfile p = build_profile(t, BaseSurface::of_genus(1));
  for (double xi : {0.0, 0.1, 0.37, 0.5}) {
    ProfileSample s = eval(p, xi);
    CHECK(s.e_w ==
          doctest::Approx((1.0 - 8.0 * xi * xi * xi) / (4.0 * M_PI * M_PI)).epsilon(1e-14));
    CHECK(s.We_w == doctest::Approx(1.0 / (4.0 * M_PI * M_PI)).epsilon(1e-14));
    CHECK(s.psi ==
          doctest::Approx((1.0 + 2.0 * xi + 4.0 * xi * xi) / (2.0 * M_PI * M_PI)).epsilon(1e-14));
  }
  CHECK(eval(p, 0.5).psi == doctest::Approx(3.0 / (2.0 * M_PI * M_PI)).epsilon(1e-14));
}

TEST_CASE("boundary values of every admissible profile") {
  for (const auto& [t, base] : ckpe_tests::admissible_sweep()) {
    DecoupledProfile p = build_profile(t, base);
    ProfileSample s0 = eval(p, 0.0);
    CHECK(s0.e_w == doctest::Approx(t.area_a / base.volume).epsilon(1e-13));
    CHECK(s0.W == doctest::Approx(1.0).epsilon(1e-13));
    ProfileSample sb = eval(p, 0.5);
    CHECK(std::fabs(sb.e_w) < 1e-12 * std::max(1.0, t.area_a));
    CHECK(sb.We_w > 0.0);
    CHECK(std::isinf(sb.W));
  }
}

TEST_CASE("torus closed forms, deg != 0") {
  for (double k3 : {-0.2, 0.6, 0.012}) {
    int deg = k3 > 0.0 && k3 < 1.0 / 48.0 ? 2 : -2;
    FillTuple t = canonical_tuple(deg, 1, ExtendedK::from_cube(k3));
    DecoupledProfile p = build_profile(t, BaseSurface::of_genus(1));
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> uxi(0.0, 0.5);
    for (int i = 0; i < 10; ++i) {
      double xi = uxi(rng);
      ProfileSample s = eval(p, xi);
      CHECK(s.e_w == doctest::Approx(torus_e_w(deg, k3, xi)).epsilon(1e-12));
      CHECK(s.We_w == doctest::Approx(torus_We_w(deg, k3, xi)).epsilon(1e-12));
    }
  }
}

TEST_CASE("higher genus closed forms") {
  SUBCASE("generic k") {
    for (int genus : {2, 3}) {
      int chi = 2 - 2 * genus;
      BaseSurface base = BaseSurface::of_genus(genus);
      for (double k3 : {-0.3, 1.4}) {
        FillTuple t = canonical_tuple(-1, genus, ExtendedK::from_cube(k3));
        DecoupledProfile p = build_profile(t, base);
        std::mt19937 rng(5);
        std::uniform_real_distribution<double> uxi(0.0, 0.5);
        for (int i = 0; i < 10; ++i) {
          double xi = uxi(rng);
          ProfileSample s = eval(p, xi);
          CHECK(s.e_w == doctest::Approx(sigma_e_w(-1, chi, base.volume, k3, xi)).epsilon(1e-12));
          CHECK(s.We_w ==
                doctest::Approx(sigma_We_w(-1, chi, base.volume, k3, xi)).epsilon(1e-12));
        }
      }
    }
  }
  SUBCASE("deg = -chi point") {
    BaseSurface base = BaseSurface::of_genus(2);
    FillTuple t = canonical_tuple(2, 2, ExtendedK::parse("1/cbrt48"), 3.0);
    DecoupledProfile p = build_profile(t, base);
    int chi = -2;
    for (double xi : {0.0, 0.2, 0.45}) {
      double expect = (1.0 - 2.0 * xi) *
                      (3.0 * (1.0 + 2.0 * xi + 4.0 * xi * xi) -
                       2.0 * M_PI * chi / 3.0 * xi * (2.0 + xi + 2.0 * xi * xi)) /
                      base.volume;
      double expect_W = (3.0 - 2.0 / 3.0 * M_PI * chi * xi) / base.volume;
      ProfileSample s = eval(p, xi);
      CHECK(s.e_w == doctest::Approx(expect).epsilon(1e-13));
      CHECK(s.We_w == doctest::Approx(expect_W).epsilon(1e-13));
    }
  }
  SUBCASE("asd simplification") {
    BaseSurface base = BaseSurface::of_genus(2);
    FillTuple t = canonical_tuple(-1, 2, ExtendedK::infinite());
    DecoupledProfile p = build_profile(t, base);
    int chi = -2, deg = -1;
    for (double xi : {0.05, 0.3, 0.49}) {
      double expect = M_PI / (2.0 * base.volume) * (1.0 - 2.0 * xi) *
                      (-chi * (1.0 + 2.0 * xi) - 2.0 * deg);
      double expect_W = M_PI / (2.0 * base.volume) * (-chi - 2.0 * deg * (1.0 - xi));
      ProfileSample s = eval(p, xi);
      CHECK(s.e_w == doctest::Approx(expect).epsilon(1e-13));
      CHECK(s.We_w == doctest::Approx(expect_W).epsilon(1e-13));
    }
  }
}

TEST_CASE("toda ode residual vanishes across the sweep") {
  auto sweep = ckpe_tests::admissible_sweep();
  REQUIRE(sweep.size() >= 100);
  for (const auto& [t, base] : sweep) {
    DecoupledProfile p = build_profile(t, base);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      double xi = 0.5 * i / 999.0;
      worst = std::max(worst, std::fabs(toda_ode_residual(p, xi)));
    }
    CAPTURE(t.deg);
    CAPTURE(t.chi);
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("polynomial identity 12E - 6 xi E' = F (12 + xi^3/k^3)") {
  for (const auto& [t, base] : ckpe_tests::admissible_sweep()) {
    if (t.k.is_infinite()) continue;
    DecoupledProfile p = build_profile(t, base);
    double k3 = t.k.cube();
    // Coefficientwise: both sides are quartics.
    double lhs[5] = {12.0 * p.E[0], 6.0 * p.E[1], 0.0, -6.0 * p.E[3], -12.0 * p.E[4]};
    double rhs[5] = {12.0 * p.F[0], 12.0 * p.F[1], 0.0, p.F[0] / k3, p.F[1] / k3};
    for (int c = 0; c < 5; ++c) {
      double scale = std::max({1.0, std::fabs(lhs[c]), std::fabs(rhs[c])});
      CHECK(std::fabs(lhs[c] - rhs[c]) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("smoothness report") {
  SUBCASE("admissible bolt tuple") {
    FillTuple t = canonical_tuple(-3, 2, ExtendedK::finite(2.0));
    DecoupledProfile p = build_profile(t, BaseSurface::of_genus(2));
    SmoothnessReport r = check_smoothness_conditions(p);
    CHECK(r.C1);
    CHECK(r.C2);
    CHECK(r.C3);
    CHECK_FALSE(r.nut_degenerate);
    CHECK(r.A0 > 0.0);
    CHECK(r.cone_check < 1e-12);
  }
  SUBCASE("non-admissible tuple fails a condition") {
    FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(0.1));
    DecoupledProfile p = build_profile(t, BaseSurface::of_genus(1), /*force=*/true);
    SmoothnessReport r = check_smoothness_conditions(p);
    bool all_hold = r.C1 && r.C2 && r.C3;
    CHECK_FALSE(all_hold);
  }
  SUBCASE("nut profile reports the degenerate zero") {
    DecoupledProfile p = nut_profile(ExtendedK::finite(1.0));
    SmoothnessReport r = check_smoothness_conditions(p);
    CHECK(r.nut_degenerate);
    CHECK_FALSE(r.C3);
  }
  SUBCASE("psi stays positive through the bolt") {
    for (const auto& [t, base] : ckpe_tests::admissible_sweep()) {
      DecoupledProfile p = build_profile(t, base);
      CoefficientFunctions c = coefficient_functions(p);
      double mn = 1e300;
      for (int i = 0; i <= 256; ++i) mn = std::min(mn, c.psi(0.5 * i / 256.0));
      CHECK(mn > 0.0);
    }
  }
}

TEST_CASE("admissibility implies the smoothness conditions (cross oracle)") {
  auto sweep = ckpe_tests::admissible_sweep();
  REQUIRE(sweep.size() >= 100);
  for (const auto& [t, base] : sweep) {
    SmoothnessReport r = check_smoothness_conditions(build_profile(t, base));
    CHECK((r.C1 && r.C2 && r.C3));
  }
}

TEST_CASE("nut profiles") {
  SUBCASE("hyperbolic ball at k = inf") {
    DecoupledProfile p = nut_profile(ExtendedK::infinite());
    for (double xi : {0.0, 0.2, 0.45}) {
      ProfileSample s = eval(p, xi);
      CHECK(s.e_w == doctest::Approx(0.25 * (1.0 - 2.0 * xi) * (1.0 - 2.0 * xi)).epsilon(1e-14));
      CHECK(s.W == doctest::Approx(1.0 / (1.0 - 2.0 * xi)).epsilon(1e-14));
    }
    CHECK(p.beta == doctest::Approx(1.0));
  }
  SUBCASE("finite k closed form") {
    double k3 = 1.0;
    DecoupledProfile p = nut_profile(ExtendedK::from_cube(k3));
    CHECK(p.beta == doctest::Approx(96.0 / 97.0).epsilon(1e-15));
    for (double xi : {0.0, 0.1, 0.3, 0.499}) {
      double om = 1.0 - 2.0 * xi;
      double expect_e_w = (24.0 * k3 + xi * xi) * om * om / (96.0 * k3 + 1.0);
      double expect_Winv = om * (1.0 + xi * xi / (24.0 * k3));
      ProfileSample s = eval(p, xi);
      CHECK(s.e_w == doctest::Approx(expect_e_w).epsilon(1e-13));
      CHECK(1.0 / s.W == doctest::Approx(expect_Winv).epsilon(1e-13));
    }
    // Double zero of e^w, simple zeros of We^w and 1/W at the nut point.
    CHECK(std::fabs(p.eval_E(0.5)) < 1e-13);
    CHECK(std::fabs(p.eval_E_prime(0.5)) < 1e-13);
    CHECK(eval(p, 0.5).We_w == doctest::Approx(0.0).epsilon(1e-13));
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(nut_profile(ExtendedK::finite(-0.1)), Error);
  }
}

TEST_CASE("coefficient functions") {
  FillTuple t = canonical_tuple(0, 1, ExtendedK::parse("1/cbrt48"), 1.0);
  CoefficientFunctions c = coefficient_functions(build_profile(t, BaseSurface::of_genus(1)));
  CHECK(c.a(0.5) == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(c.b(0.0) == 0.0);

  FillTuple ta = canonical_tuple(-2, 1, ExtendedK::infinite());
  CoefficientFunctions ca = coefficient_functions(build_profile(ta, BaseSurface::of_genus(1)));
  for (double xi : {0.0, 0.2, 0.5}) {
    CHECK(ca.a(xi) == 0.0);
    CHECK(ca.b(xi) == 0.0);
  }
}

TEST_CASE("profile export") {
  FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
  DecoupledProfile p = build_profile(t, BaseSurface::of_genus(1));
  std::string j = profile_to_json(p);
  CHECK(j.find("E_coeffs") != std::string::npos);
  std::string csv = profile_to_csv(p, 11);
  CHECK(csv.rfind("xi,e_w,W,We_w,psi\n", 0) == 0);
  int lines = 0;
  for (char ch : csv)
    if (ch == '\n') ++lines;
  CHECK(lines == 12);
}

TEST_CASE("eval rejects out-of-range xi") {
  FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
  DecoupledProfile p = build_profile(t, BaseSurface::of_genus(1));
  CHECK_THROWS_AS(eval(p, -0.01), Error);
  CHECK_THROWS_AS(eval(p, 0.51), Error);
}
