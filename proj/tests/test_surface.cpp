#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "ckpe/surface.hpp"

using namespace ckpe;

TEST_CASE("laplacian on analytic fields") {
  TorusGrid g(256, 64);
  SUBCASE("constants annihilate") {
    ScalarField2 f = ScalarField2::sample(g, [](double, double) { return 3.7; });
    ScalarField2 lf = laplacian(f);
    for (double v : lf.v) CHECK(std::fabs(v) < 1e-12);
  }
  SUBCASE("cos x eigenfunction") {
    ScalarField2 f = ScalarField2::sample(g, [](double x, double) { return std::cos(x); });
    ScalarField2 lf = laplacian(f);
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        worst = std::max(worst, std::fabs(lf.at(i, j) + std::cos(g.x(i))));
    CHECK(worst < 1e-4);
  }
  SUBCASE("mixed modes") {
    ScalarField2 f =
        ScalarField2::sample(g, [](double x, double y) { return std::cos(x) + std::sin(2.0 * y); });
    ScalarField2 lf = laplacian(f);
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        worst = std::max(worst,
                         std::fabs(lf.at(i, j) + std::cos(g.x(i)) + 4.0 * std::sin(2.0 * g.y(j))));
    // ny = 64 dominates: O(h_y^2) on the sin(2y) mode.
    CHECK(worst < 4.0 * g.hy() * g.hy());
  }
}

TEST_CASE("integration") {
  TorusGrid g(128, 128);
  CHECK(integrate(ScalarField2::sample(g, [](double, double) { return 1.0; })) ==
        doctest::Approx(4.0 * M_PI * M_PI).epsilon(1e-13));
  CHECK(std::fabs(integrate(ScalarField2::sample(
            g, [](double x, double) { return std::cos(x); }))) < 1e-12);
  CHECK(integrate(ScalarField2::sample(
            g, [](double x, double) { return std::cos(x) * std::cos(x); })) ==
        doctest::Approx(2.0 * M_PI * M_PI).epsilon(1e-10));
}

TEST_CASE("boundary normalization") {
  TorusGrid g(64, 64);
  SUBCASE("already normalized") {
    ScalarField2 zero(g);
    BoundaryDatum d = normalize_boundary(zero, 4.0 * M_PI * M_PI);
    for (double v : d.phi.v) CHECK(std::fabs(v) < 1e-14);
  }
  SUBCASE("constant shift is log 2") {
    ScalarField2 zero(g);
    BoundaryDatum d = normalize_boundary(zero, 8.0 * M_PI * M_PI);
    for (double v : d.phi.v) CHECK(v == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  }
  SUBCASE("oscillatory datum re-integrates to the target") {
    ScalarField2 f = ScalarField2::sample(g, [](double x, double) { return 0.3 * std::cos(x); });
    double a = 4.0 * M_PI * M_PI;
    BoundaryDatum d = normalize_boundary(f, a);
    ScalarField2 ef(g);
    for (std::size_t n = 0; n < ef.v.size(); ++n) ef.v[n] = std::exp(d.phi.v[n]);
    CHECK(integrate(ef) == doctest::Approx(a).epsilon(1e-10));
    ScalarField2 raw_exp(g);
    for (std::size_t n = 0; n < raw_exp.v.size(); ++n) raw_exp.v[n] = std::exp(f.v[n]);
    double expected_c = std::log(a / integrate(raw_exp));
    CHECK(d.phi.at(3, 5) - f.at(3, 5) == doctest::Approx(expected_c).epsilon(1e-13));
  }
  SUBCASE("rejects bad input") {
    ScalarField2 f(g);
    f.at(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(normalize_boundary(f, 1.0), Error);
    CHECK_THROWS_AS(normalize_boundary(ScalarField2(g), -1.0), Error);
  }
}

TEST_CASE("discrete divergence theorem and self-adjointness") {
  TorusGrid g(48, 40);
  std::mt19937 rng(999);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    ScalarField2 f(g), h(g);
    for (auto& v : f.v) v = uni(rng);
    for (auto& v : h.v) v = uni(rng);
    CHECK(std::fabs(integrate(laplacian(f))) < 1e-12);
    double lhs = 0.0, rhs = 0.0, nf = 0.0, nh = 0.0;
    ScalarField2 lf = laplacian(f), lh = laplacian(h);
    for (std::size_t n = 0; n < f.v.size(); ++n) {
      lhs += lf.v[n] * h.v[n];
      rhs += f.v[n] * lh.v[n];
      nf += f.v[n] * f.v[n];
      nh += h.v[n] * h.v[n];
    }
    CHECK(std::fabs(lhs - rhs) < 1e-10 * std::sqrt(nf * nh));
  }
}

TEST_CASE("laplacian converges at second order") {
  auto err_at = [](int n) {
    TorusGrid g(n, n);
    ScalarField2 f = ScalarField2::sample(
        g, [](double x, double y) { return std::sin(x) * std::cos(2.0 * y); });
    ScalarField2 lf = laplacian(f);
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        worst = std::max(
            worst, std::fabs(lf.at(i, j) + 5.0 * std::sin(g.x(i)) * std::cos(2.0 * g.y(j))));
    return worst;
  };
  double e1 = err_at(32), e2 = err_at(64), e3 = err_at(128);
  CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(std::log2(e2 / e3) == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("field files round-trip") {
  TorusGrid g(9, 7);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> uni(-5.0, 5.0);
  ScalarField2 f(g);
  for (auto& v : f.v) v = uni(rng);
  std::string csv = field_to_csv(f);
  TorusGrid g2 = grid_from_sidecar_json(grid_sidecar_json(g));
  CHECK(g2 == g);
  ScalarField2 back = field_from_csv(csv, g2);
  for (std::size_t n = 0; n < f.v.size(); ++n) CHECK(back.v[n] == f.v[n]);
}
