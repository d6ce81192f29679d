#include "ckpe/verification.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "json.hpp"

namespace ckpe {

namespace {

using Vec4 = std::array<double, 4>;

Mat4 invert(const Mat4& g) {
  Eigen::Matrix4d m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = g[i][j];
  Eigen::Matrix4d inv = m.inverse();
  Mat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) out[i][j] = inv(i, j);
  return out;
}

// Fourth-order centered first derivative of a metric-valued map.
template <class F>
Mat4 d4(F eval, const Vec4& pt, int dir, double h) {
  auto shifted = [&](double t) {
    Vec4 q = pt;
    q[dir] += t;
    return eval(q);
  };
  Mat4 p2 = shifted(2.0 * h), p1 = shifted(h), m1 = shifted(-h), m2 = shifted(-2.0 * h);
  Mat4 out{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out[i][j] = (-p2[i][j] + 8.0 * p1[i][j] - 8.0 * m1[i][j] + m2[i][j]) / (12.0 * h);
  return out;
}

using Christoffel = std::array<Mat4, 4>;  // [k][i][j] = Gamma^k_ij

template <class MetricFn>
Christoffel christoffel(MetricFn g_of, const Vec4& pt, double h) {
  Mat4 g = g_of(pt);
  Mat4 gi = invert(g);
  std::array<Mat4, 4> dg;
  for (int d = 0; d < 4; ++d) dg[d] = d4(g_of, pt, d, h);
  Christoffel G{};
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int l = 0; l < 4; ++l)
          s += gi[k][l] * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]);
        G[k][i][j] = 0.5 * s;
      }
  return G;
}

struct RiemannData {
  double R[4][4][4][4];  // R^l_{i j k}: lower indices (base, commutator pair)
  Mat4 ricci{};
  double scalar = 0.0;
  Mat4 g{}, gi{};
};

// R^rho_{sigma mu nu} = d_mu G^rho_{nu sigma} - d_nu G^rho_{mu sigma}
//                      + G^rho_{mu l} G^l_{nu sigma} - G^rho_{nu l} G^l_{mu sigma}
template <class MetricFn>
RiemannData riemann(MetricFn g_of, const Vec4& pt, double h) {
  Christoffel Gc = christoffel(g_of, pt, h);
  std::array<Christoffel, 4> dG;
  for (int d = 0; d < 4; ++d) {
    auto shifted = [&](double t) {
      Vec4 q = pt;
      q[d] += t;
      return christoffel(g_of, q, h);
    };
    Christoffel p2 = shifted(2.0 * h), p1 = shifted(h), m1 = shifted(-h), m2 = shifted(-2.0 * h);
    for (int k = 0; k < 4; ++k)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          dG[d][k][i][j] =
              (-p2[k][i][j] + 8.0 * p1[k][i][j] - 8.0 * m1[k][i][j] + m2[k][i][j]) / (12.0 * h);
  }

  RiemannData out;
  out.g = g_of(pt);
  out.gi = invert(out.g);
  for (int r = 0; r < 4; ++r)
    for (int s = 0; s < 4; ++s)
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu) {
          double v = dG[mu][r][nu][s] - dG[nu][r][mu][s];
          for (int l = 0; l < 4; ++l)
            v += Gc[r][mu][l] * Gc[l][nu][s] - Gc[r][nu][l] * Gc[l][mu][s];
          out.R[r][s][mu][nu] = v;
        }
  for (int s = 0; s < 4; ++s)
    for (int nu = 0; nu < 4; ++nu) {
      double v = 0.0;
      for (int mu = 0; mu < 4; ++mu) v += out.R[mu][s][mu][nu];
      out.ricci[s][nu] = v;
    }
  for (int s = 0; s < 4; ++s)
    for (int nu = 0; nu < 4; ++nu) out.scalar += out.gi[s][nu] * out.ricci[s][nu];
  return out;
}

// Orthonormal frame by Gram-Schmidt on the coordinate basis, ordered so the
// frame orientation matches dxi ^ eta ^ dvol_Sigma.
struct Frame {
  double E[4][4];  // E[a][i]: frame vector a, coordinate component i
  double e[4][4];  // dual covectors
};

Frame orthonormal_frame(const Mat4& g) {
  Frame f{};
  double v[4][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  auto dot = [&](const double* a, const double* b) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) s += g[i][j] * a[i] * b[j];
    return s;
  };
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < a; ++b) {
      double c = dot(v[a], f.E[b]);
      for (int i = 0; i < 4; ++i) v[a][i] -= c * f.E[b][i];
    }
    double n = std::sqrt(dot(v[a], v[a]));
    for (int i = 0; i < 4; ++i) f.E[a][i] = v[a][i] / n;
  }
  for (int a = 0; a < 4; ++a)
    for (int i = 0; i < 4; ++i) {
      double s = 0.0;
      for (int j = 0; j < 4; ++j) s += g[i][j] * f.E[a][j];
      f.e[a][i] = s;
    }
  return f;
}

// |W^+| in the frame norm: project the Weyl tensor onto the self-dual basis
// built from the oriented orthonormal frame.
double weyl_plus_norm(const RiemannData& rd) {
  const Mat4& g = rd.g;
  const Mat4& gi = rd.gi;

  // Lowered Riemann and the Weyl part.
  double Rl[4][4][4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double s = 0.0;
          for (int r = 0; r < 4; ++r) s += g[i][r] * rd.R[r][j][k][l];
          Rl[i][j][k][l] = s;
        }
  double W[4][4][4][4];
  double sc = rd.scalar;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double v = Rl[i][j][k][l];
          v -= 0.5 * (g[i][k] * rd.ricci[j][l] - g[i][l] * rd.ricci[j][k] +
                      g[j][l] * rd.ricci[i][k] - g[j][k] * rd.ricci[i][l]);
          v += (sc / 6.0) * (g[i][k] * g[j][l] - g[i][l] * g[j][k]);
          W[i][j][k][l] = v;
        }

  Frame fr = orthonormal_frame(g);
  // Self-dual basis (e0^e1 + e2^e3)/sqrt2 and cyclic.
  const int pairs[3][4] = {{0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}};
  double omega[3][4][4];
  for (int A = 0; A < 3; ++A) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        int a = pairs[A][0], b = pairs[A][1], c = pairs[A][2], d = pairs[A][3];
        double v = fr.e[a][i] * fr.e[b][j] - fr.e[a][j] * fr.e[b][i] +
                   fr.e[c][i] * fr.e[d][j] - fr.e[c][j] * fr.e[d][i];
        omega[A][i][j] = v / std::sqrt(2.0);
      }
  }
  // Raise both index pairs of omega once.
  double omega_up[3][4][4];
  for (int A = 0; A < 3; ++A)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l) s += gi[i][k] * gi[j][l] * omega[A][k][l];
        omega_up[A][i][j] = s;
      }

  double Wp[3][3];
  for (int A = 0; A < 3; ++A)
    for (int B = 0; B < 3; ++B) {
      double s = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l)
              s += W[i][j][k][l] * omega_up[A][i][j] * omega_up[B][k][l];
      Wp[A][B] = 0.25 * s;
    }
  double frob = 0.0;
  for (int A = 0; A < 3; ++A)
    for (int B = 0; B < 3; ++B) frob += Wp[A][B] * Wp[A][B];
  return std::sqrt(frob);
}

std::vector<Vec4> patch_lattice(const CurvaturePatch& p, double theta_period) {
  std::vector<Vec4> pts;
  for (int a = 0; a < p.n_xi; ++a) {
    double xi = p.n_xi == 1 ? 0.5 * (p.xi_lo + p.xi_hi)
                            : p.xi_lo + (p.xi_hi - p.xi_lo) * a / (p.n_xi - 1);
    for (int b = 0; b < p.n_angular; ++b)
      for (int c = 0; c < p.n_angular; ++c)
        for (int d = 0; d < p.n_angular; ++d) {
          double th = theta_period * (0.15 + 0.6 * b / p.n_angular);
          double x = 0.7 + 1.1 * c / p.n_angular;   // stays inside (0, pi) for the sphere chart
          double y = 0.4 + 1.9 * d / p.n_angular;
          pts.push_back({xi, th, x, y});
        }
  }
  return pts;
}

void require_interior(const CurvaturePatch& p) {
  double margin = 4.5 * p.step;
  if (!(p.xi_lo - margin > 0.0 && p.xi_hi + margin < 0.5))
    throw Error(ErrorCode::PatchTooCloseToBoundary,
                "patch plus FD stencil must stay inside (0, 1/2)");
}

}  // namespace

CurvaturePoint curvature_at(const MetricSampler& s, const Vec4& pt, double step, bool of_h) {
  auto g_of = [&](const Vec4& q) {
    return of_h ? s.metric_h(q, MetricSampler::Chart::Interior)
                : s.metric_g(q, MetricSampler::Chart::Interior);
  };
  RiemannData rd = riemann(g_of, pt, step);
  CurvaturePoint out;
  out.ricci = rd.ricci;
  out.scalar = rd.scalar;
  out.weyl_plus_norm = weyl_plus_norm(rd);
  return out;
}

double conserved_linear(const TodaSolution& sol, const FillTuple& t) {
  double worst = 0.0;
  const TorusGrid& g = sol.u.grid;
  for (int m = 0; m < sol.lift.M; ++m) {
    ScalarField2 f(g);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j)
        f.at(i, j) = sol.W_at(m, i, j) * std::exp(sol.w_at(m, i, j));
    double xi = sol.lift.xi[m];
    double expected = t.deg * t.period_p * xi + t.area_a;
    worst = std::max(worst, std::fabs(integrate(f) - expected));
  }
  return worst;
}

double conserved_quartic(const TodaSolution& sol, const FillTuple& t) {
  (void)t;
  double worst = 0.0;
  const TorusGrid& g = sol.u.grid;
  for (int m = 0; m < sol.lift.M; ++m) {
    ScalarField2 f(g);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) f.at(i, j) = std::exp(sol.w_at(m, i, j));
    double expected = sol.profile.eval_E(sol.lift.xi[m]);
    worst = std::max(worst, std::fabs(integrate(f) - expected));
  }
  return worst;
}

double einstein_residual(const MetricSampler& s, const CurvaturePatch& patch) {
  require_interior(patch);
  double worst = 0.0;
  for (const Vec4& pt : patch_lattice(patch, s.tuple().period_p)) {
    auto h_of = [&](const Vec4& q) { return s.metric_h(q, MetricSampler::Chart::Interior); };
    RiemannData rd = riemann(h_of, pt, patch.step);
    Mat4 T{};
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) T[i][j] = rd.ricci[i][j] + 3.0 * rd.g[i][j];
    double frame2 = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l)
            frame2 += T[i][j] * T[k][l] * rd.gi[i][k] * rd.gi[j][l];
    worst = std::max(worst, std::sqrt(std::fabs(frame2)));
  }
  return worst;
}

double scalar_curvature_g(const MetricSampler& s, const CurvaturePatch& patch) {
  if (s.tuple().k.is_infinite())
    throw Error(ErrorCode::InfiniteK, "s_g = xi/k^3 needs finite k; use scalar_flat_check");
  require_interior(patch);
  double k3 = s.tuple().k.cube();
  double worst = 0.0;
  for (const Vec4& pt : patch_lattice(patch, s.tuple().period_p)) {
    CurvaturePoint c = curvature_at(s, pt, patch.step, /*of_h=*/false);
    worst = std::max(worst, std::fabs(c.scalar - pt[0] / k3));
  }
  return worst;
}

double scalar_flat_check(const MetricSampler& s, const CurvaturePatch& patch) {
  require_interior(patch);
  double worst = 0.0;
  for (const Vec4& pt : patch_lattice(patch, s.tuple().period_p)) {
    CurvaturePoint c = curvature_at(s, pt, patch.step, /*of_h=*/false);
    worst = std::max(worst, std::fabs(c.scalar));
  }
  return worst;
}

double weyl_k_check(const MetricSampler& s, const CurvaturePatch& patch) {
  if (s.tuple().k.is_infinite())
    throw Error(ErrorCode::InfiniteK, "finite-k relation; use asd_weyl_check");
  require_interior(patch);
  double abs_k = std::fabs(s.tuple().k.value());
  double worst = 0.0;
  for (const Vec4& pt : patch_lattice(patch, s.tuple().period_p)) {
    CurvaturePoint c = curvature_at(s, pt, patch.step, /*of_h=*/true);
    double lhs = abs_k * std::cbrt(2.0 * std::sqrt(6.0) * c.weyl_plus_norm);
    // Pointwise law: lhs = xi. Extrapolated to the bolt it reads
    // |k| (2 sqrt6 max |W^+_h|)^{1/3} = 1/2.
    worst = std::max(worst, std::fabs(0.5 * (lhs / pt[0]) - 0.5));
  }
  return worst;
}

double asd_weyl_check(const MetricSampler& s, const CurvaturePatch& patch) {
  require_interior(patch);
  double worst = 0.0;
  for (const Vec4& pt : patch_lattice(patch, s.tuple().period_p)) {
    CurvaturePoint c = curvature_at(s, pt, patch.step, /*of_h=*/true);
    worst = std::max(worst, c.weyl_plus_norm);
  }
  return worst;
}

std::string VerificationReport::to_json() const {
  nlohmann::json j;
  j["linear_law_err"] = linear_law_err;
  j["quartic_law_err"] = quartic_law_err;
  if (einstein_residual >= 0.0) j["einstein_residual"] = einstein_residual;
  if (scalar_g_err >= 0.0) j["scalar_g_err"] = scalar_g_err;
  if (weyl_k_err >= 0.0) j["weyl_k_err"] = weyl_k_err;
  j["grid"] = {{"M", M}, {"n_x", nx}, {"n_y", ny}};
  if (fd_step > 0.0) j["patch"] = {{"xi_lo", patch_lo}, {"xi_hi", patch_hi}, {"step", fd_step}};
  return j.dump(2);
}

VerificationReport verify_solution(const TodaSolution& sol, const FillTuple& t) {
  VerificationReport r;
  r.linear_law_err = conserved_linear(sol, t);
  r.quartic_law_err = conserved_quartic(sol, t);
  r.M = sol.lift.M;
  r.nx = sol.u.grid.nx;
  r.ny = sol.u.grid.ny;
  return r;
}

VerificationReport verify_decoupled_metric(const DecoupledProfile& profile,
                                           const CurvaturePatch& patch) {
  VerificationReport r;
  auto sampler = decoupled_metric_sampler(profile);
  r.einstein_residual = einstein_residual(*sampler, patch);
  if (profile.tuple.k.is_infinite()) {
    r.scalar_g_err = scalar_flat_check(*sampler, patch);
    r.weyl_k_err = asd_weyl_check(*sampler, patch);
  } else {
    r.scalar_g_err = scalar_curvature_g(*sampler, patch);
    r.weyl_k_err = weyl_k_check(*sampler, patch);
  }
  r.patch_lo = patch.xi_lo;
  r.patch_hi = patch.xi_hi;
  r.fd_step = patch.step;
  return r;
}

}  // namespace ckpe
