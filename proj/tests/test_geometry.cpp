#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ckpe/geometry.hpp"

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

TodaSolution decoupled_solution(const FillTuple& t, int M, int n) {
  BaseSurface base = BaseSurface::of_genus(1);
  DecoupledProfile p = build_profile(t, base);
  TorusGrid g(n, n);
  double wbar0 = std::log(p.eval_E(0.0) / base.volume);
  ScalarField2 raw = ScalarField2::sample(g, [&](double, double) { return wbar0; });
  SolverConfig cfg;
  return solve(normalize_boundary(raw, t.area_a), t, base, M, cfg);
}

TodaSolution fourier_solution(const FillTuple& t, int M, int n) {
  BaseSurface base = BaseSurface::of_genus(1);
  DecoupledProfile p = build_profile(t, base);
  TorusGrid g(n, n);
  double wbar0 = std::log(p.eval_E(0.0) / base.volume);
  ScalarField2 raw = ScalarField2::sample(
      g, [&](double x, double y) { return wbar0 + 0.3 * std::cos(x) + 0.2 * std::sin(y); });
  SolverConfig cfg;
  return solve(normalize_boundary(raw, t.area_a), t, base, M, cfg);
}

}  // namespace

TEST_CASE("W from decoupled solutions matches the profile ratio") {
  SUBCASE("degree zero: W e^w is the constant a/(4 pi^2)") {
    FillTuple t = canonical_tuple(0, 1, ExtendedK::parse("1/cbrt48"), 4.0 * M_PI * M_PI);
    TodaSolution sol = decoupled_solution(t, 24, 8);
    for (int m = 0; m < sol.lift.M; ++m) {
      double expect = t.area_a / (4.0 * M_PI * M_PI) /
                      (sol.profile.eval_E(sol.lift.xi[m]) / sol.base.volume);
      CHECK(sol.W_at(m, 3, 5) == doctest::Approx(expect).epsilon(1e-11));
      double We_w = sol.W_at(m, 3, 5) * std::exp(sol.w_at(m, 3, 5));
      CHECK(We_w == doctest::Approx(1.0).epsilon(1e-11));  // a/(4 pi^2) = 1 here
    }
  }
  SUBCASE("generic and asd tuples: W equals F/E at every node") {
    for (const char* tok : {"1", "inf"}) {
      FillTuple t = canonical_tuple(tok[0] == 'i' ? -2 : -1, 1, ExtendedK::parse(tok));
      TodaSolution sol = decoupled_solution(t, 24, 8);
      for (int m = 0; m < sol.lift.M; ++m) {
        double xi = sol.lift.xi[m];
        double expect = sol.profile.eval_F(xi) / sol.profile.eval_E(xi);
        CHECK(sol.W_at(m, 1, 2) == doctest::Approx(expect).epsilon(1e-10));
      }
    }
  }
  SUBCASE("compute_W rejects corrupted fields") {
    FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
    TodaSolution sol = decoupled_solution(t, 24, 8);
    // Push a huge gradient into u near the bolt: W goes negative.
    sol.u.at(0, 0, 0) += 50.0;
    sol.u.at(1, 0, 0) -= 50.0;
    CHECK_THROWS_AS(compute_W(sol, t.k), Error);
  }
}

TEST_CASE("curvature two-form of decoupled fields is the constant deg*p/Vol") {
  FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
  TodaSolution sol = decoupled_solution(t, 32, 8);
  CurvatureTwoForm F = curvature_two_form_from_solution(sol);
  double expect = t.deg * t.period_p / sol.base.volume;
  for (int s = 0; s < static_cast<int>(F.xi.size()); ++s)
    for (int i = 0; i < F.grid.nx; ++i)
      for (int j = 0; j < F.grid.ny; ++j) {
        CHECK(F.F1[s].at(i, j) == doctest::Approx(expect).epsilon(1e-9));
        CHECK(std::fabs(F.d_xi_dx[s].at(i, j)) < 1e-11);
        CHECK(std::fabs(F.d_xi_dy[s].at(i, j)) < 1e-11);
      }
}

TEST_CASE("gauge potentials") {
  SUBCASE("synthetic oscillatory curvature round-trips at second order") {
    // F1 = mean + 0.5 cos(2x) sin(y); the potential solve plus the linear
    // term must reproduce it under the discrete curl.
    auto curl_error = [](int n) {
      TorusGrid g(n, n);
      int deg = -1;
      double period = 2.0;
      double mean = deg * period / (4.0 * M_PI * M_PI);
      CurvatureTwoForm F;
      F.grid = g;
      F.xi = {0.25};
      F.F1 = {ScalarField2::sample(g, [&](double x, double y) {
        return mean + 0.5 * std::cos(2.0 * x) * std::sin(y);
      })};
      F.d_xi_dx = {ScalarField2(g)};
      F.d_xi_dy = {ScalarField2(g)};
      GaugePotentials gp = reconstruct_potentials(F, 0, deg, period);
      double worst = 0.0;
      for (int i = 0; i < n; ++i) {
        int im = i == 0 ? n - 1 : i - 1, ip = i == n - 1 ? 0 : i + 1;
        for (int j = 0; j < n; ++j) {
          int jm = j == 0 ? n - 1 : j - 1, jp = j == n - 1 ? 0 : j + 1;
          double Yx = (gp.Y.at(ip, j) - gp.Y.at(im, j)) / (2.0 * g.hx()) + gp.linear_term;
          double Xy = (gp.X.at(i, jp) - gp.X.at(i, jm)) / (2.0 * g.hy());
          worst = std::max(worst, std::fabs(Yx - Xy - F.F1[0].at(i, j)));
        }
      }
      return worst;
    };
    double e1 = curl_error(16), e2 = curl_error(32);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.3));
  }
  SUBCASE("decoupled slice gives the bare linear term") {
    FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
    TodaSolution sol = decoupled_solution(t, 32, 8);
    CurvatureTwoForm F = curvature_two_form_from_solution(sol);
    GaugePotentials gp = reconstruct_potentials(F, 5, t.deg, t.period_p);
    CHECK(gp.linear_term ==
          doctest::Approx(t.deg * t.period_p / (4.0 * M_PI * M_PI)).epsilon(1e-12));
    for (double v : gp.X.v) CHECK(std::fabs(v) < 1e-9);
    for (double v : gp.Y.v) CHECK(std::fabs(v) < 1e-9);
  }
  SUBCASE("degree zero is fully periodic") {
    FillTuple t = canonical_tuple(0, 1, ExtendedK::parse("1/cbrt48"), 4.0 * M_PI * M_PI);
    TodaSolution sol = decoupled_solution(t, 32, 8);
    CurvatureTwoForm F = curvature_two_form_from_solution(sol);
    GaugePotentials gp = reconstruct_potentials(F, 3, 0, t.period_p);
    CHECK(gp.linear_term == 0.0);
  }
  SUBCASE("mean mismatch is rejected") {
    TorusGrid g(16, 16);
    CurvatureTwoForm F;
    F.grid = g;
    F.xi = {0.25};
    F.F1 = {ScalarField2::sample(g, [](double, double) { return 1.0; })};
    F.d_xi_dx = {ScalarField2(g)};
    F.d_xi_dy = {ScalarField2(g)};
    CHECK_THROWS_AS(reconstruct_potentials(F, 0, -1, 2.0), Error);
  }
}

TEST_CASE("degree quantization and the linear law on a generic solve") {
  FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
  TodaSolution sol = fourier_solution(t, 24, 16);
  MetricFields mf = metric_fields(sol);
  std::vector<double> degs = degree_quantization(mf);
  for (std::size_t s = 1; s + 1 < degs.size(); ++s)
    CHECK(degs[s] == doctest::Approx(-1.0).epsilon(5e-3));
  // Slicewise integral of W e^w tracks (deg p) xi + a.
  for (int s = 0; s < mf.slices(); ++s) {
    ScalarField2 f(mf.grid);
    for (int i = 0; i < mf.grid.nx; ++i)
      for (int j = 0; j < mf.grid.ny; ++j) f.at(i, j) = mf.W[s].at(i, j) * mf.e_w[s].at(i, j);
    double expect = t.deg * t.period_p * mf.xi[s] + t.area_a;
    CHECK(integrate(f) == doctest::Approx(expect).epsilon(2e-3));
  }
}

TEST_CASE("metric samplers") {
  SUBCASE("hyperbolic ball nut metric in the interior chart") {
    DecoupledProfile nut = nut_profile(ExtendedK::infinite());
    auto s = decoupled_metric_sampler(nut);
    double p = nut.tuple.period_p;
    for (double xi : {0.05, 0.2, 0.35}) {
      std::array<double, 4> pt{xi, 0.3 * p, 1.1, 2.0};
      Mat4 g = s->metric_g(pt);
      double W = 1.0 / (1.0 - 2.0 * xi);
      double We_w = 0.25 * (1.0 - 2.0 * xi);
      double F1 = nut.tuple.deg * p / nut.base.volume;
      double Y = -F1 * std::cos(pt[2]);
      CHECK(g[0][0] == doctest::Approx(W).epsilon(1e-12));
      CHECK(g[1][1] == doctest::Approx(1.0 / W).epsilon(1e-12));
      CHECK(g[1][3] == doctest::Approx(Y / W).epsilon(1e-12));
      CHECK(g[2][2] == doctest::Approx(We_w).epsilon(1e-12));
      CHECK(g[3][3] ==
            doctest::Approx(We_w * std::sin(pt[2]) * std::sin(pt[2]) + Y * Y / W).epsilon(1e-12));
      CHECK(g[0][1] == 0.0);
      // h = xi^-2 g.
      Mat4 h = s->metric_h(pt);
      CHECK(h[0][0] == doctest::Approx(W / (xi * xi)).epsilon(1e-12));
    }
  }
  SUBCASE("symmetry and positive determinant") {
    FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
    auto s = decoupled_metric_sampler(build_profile(t, BaseSurface::of_genus(1)));
    for (double xi : {0.1, 0.3, 0.45}) {
      std::array<double, 4> pt{xi, 0.2, 0.8, 1.7};
      Mat4 g = s->metric_g(pt);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(g[i][j] == g[j][i]);
      // det g = (W e^w)^2 on the flat torus.
      double We_w = t.deg * t.period_p * xi + t.area_a;
      We_w /= 4.0 * M_PI * M_PI;
      double det =
          g[0][0] * (g[1][1] * (g[2][2] * g[3][3] - g[2][3] * g[2][3]) -
                     g[1][2] * (g[1][2] * g[3][3] - g[2][3] * g[1][3]) +
                     g[1][3] * (g[1][2] * g[2][3] - g[2][2] * g[1][3]));
      CHECK(det > 0.0);
      CHECK(det == doctest::Approx(We_w * We_w).epsilon(1e-10));
    }
  }
  SUBCASE("bolt chart stays bounded where the interior chart blows up") {
    FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
    DecoupledProfile prof = build_profile(t, BaseSurface::of_genus(1));
    auto s = decoupled_metric_sampler(prof);
    double p = t.period_p;
    for (double xi : {0.49, 0.499, 0.4999}) {
      std::array<double, 4> inner{xi, 0.1 * p, 0.8, 1.7};
      CHECK(s->metric_g(inner)[0][0] > 100.0 * (xi - 0.49));  // W ~ A0/(1/2 - xi)
      double tau = std::sqrt(p / M_PI) * std::sqrt(0.5 - xi);
      std::array<double, 4> bolt{tau * std::cos(0.4), tau * std::sin(0.4), 0.8, 1.7};
      Mat4 gb = s->metric_g(bolt, MetricSampler::Chart::Bolt);
      CHECK(s->xi_of(bolt, MetricSampler::Chart::Bolt) == doctest::Approx(xi).epsilon(1e-12));
      for (int i = 0; i < 4; ++i) {
        CHECK(std::isfinite(gb[i][i]));
        CHECK(gb[i][i] > 0.0);
        CHECK(gb[i][i] < 100.0);
      }
    }
  }
  SUBCASE("grid sampler agrees with the closed form on decoupled data") {
    FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
    TodaSolution sol = decoupled_solution(t, 48, 8);
    auto grid_s = assemble_metric(metric_fields(sol));
    auto exact_s = decoupled_metric_sampler(sol.profile);
    for (double xi : {0.12, 0.25, 0.4}) {
      std::array<double, 4> pt{xi, 0.2, 5.9, 1.7};
      Mat4 a = grid_s->metric_g(pt);
      Mat4 b = exact_s->metric_g(pt);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(a[i][j] == doctest::Approx(b[i][j]).epsilon(5e-6));
    }
  }
  SUBCASE("sample dump") {
    FillTuple t = canonical_tuple(-1, 1, ExtendedK::finite(1.0));
    auto s = decoupled_metric_sampler(build_profile(t, BaseSurface::of_genus(1)));
    std::string csv =
        metric_samples_csv(*s, {{0.2, 0.1, 0.5, 0.5}}, MetricSampler::Chart::Interior);
    CHECK(csv.find("interior") != std::string::npos);
  }
}
