#include "ckpe/decoupled.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace ckpe {

double DecoupledProfile::eval_E(double xi) const {
  // Horner, highest degree first.
  return (((E[4] * xi + E[3]) * xi + E[2]) * xi + E[1]) * xi + E[0];
}

double DecoupledProfile::eval_E_prime(double xi) const {
  return ((4.0 * E[4] * xi + 3.0 * E[3]) * xi + 2.0 * E[2]) * xi + E[1];
}

double DecoupledProfile::eval_E_second(double xi) const {
  return (12.0 * E[4] * xi + 6.0 * E[3]) * xi + 2.0 * E[2];
}

std::array<double, 4> DecoupledProfile::bolt_quotient() const {
  // Synthetic division by (xi - 1/2): E = (xi - 1/2) P + E(1/2), Q = -P.
  std::array<double, 4> p{};
  p[3] = E[4];
  p[2] = E[3] + 0.5 * p[3];
  p[1] = E[2] + 0.5 * p[2];
  p[0] = E[1] + 0.5 * p[1];
  return {-p[0], -p[1], -p[2], -p[3]};
}

double DecoupledProfile::A0() const { return -eval_F(0.5) / eval_E_prime(0.5); }

double CoefficientFunctions::a(double xi) const {
  if (k.is_infinite()) return 0.0;
  return -6.0 * xi * xi / (12.0 * k.cube() + xi * xi * xi);
}

double CoefficientFunctions::b(double xi) const {
  if (k.is_infinite()) return 0.0;
  return 12.0 * xi / (12.0 * k.cube() + xi * xi * xi);
}

double CoefficientFunctions::psi(double xi) const {
  return (((Q[3] * xi + Q[2]) * xi + Q[1]) * xi + Q[0]) / vol;
}

double CoefficientFunctions::psi_xi(double xi) const {
  return ((3.0 * Q[3] * xi + 2.0 * Q[2]) * xi + Q[1]) / vol;
}

DecoupledProfile build_profile(const FillTuple& t, const BaseSurface& base, bool force) {
  if (!force) {
    AdmissibleVerdict v = is_admissible(t, base);
    if (!v.admissible)
      throw Error(ErrorCode::NonAdmissible, "tuple fails admissibility; pass force to override");
  } else if (t.chi != base.chi()) {
    throw Error(ErrorCode::InconsistentTuple, "chi does not match 2 - 2*genus");
  }

  DecoupledProfile p;
  p.tuple = t;
  p.base = base;
  double dp = t.deg * t.period_p;
  p.F = {t.area_a, dp};
  p.E[0] = t.area_a;
  p.E[1] = 2.0 * dp;
  p.E[2] = 2.0 * M_PI * t.chi;
  if (!t.k.is_infinite()) {
    double t3 = t.k.cube();
    p.E[3] = -t.area_a / (6.0 * t3);
    p.E[4] = -dp / (12.0 * t3);
  }
  return p;
}

ProfileSample eval(const DecoupledProfile& p, double xi) {
  if (!(xi >= 0.0 && xi <= 0.5))
    throw Error(ErrorCode::OutOfRange, "xi outside [0, 1/2]");
  ProfileSample s;
  double vol = p.base.volume;
  double E = p.eval_E(xi);
  double F = p.eval_F(xi);
  s.e_w = E / vol;
  s.We_w = F / vol;
  auto Q = p.bolt_quotient();
  s.psi = (((Q[3] * xi + Q[2]) * xi + Q[1]) * xi + Q[0]) / vol;
  if (xi == 0.5) {
    s.W = std::numeric_limits<double>::infinity();
    s.wbar_xi = -std::numeric_limits<double>::infinity();
  } else {
    s.W = F / E;
    s.wbar_xi = p.eval_E_prime(xi) / E;
  }
  return s;
}

double toda_ode_residual(const DecoupledProfile& p, double xi) {
  double second = p.eval_E_second(xi);
  double twist = p.tuple.k.is_infinite() ? 0.0 : (xi / p.tuple.k.cube()) * p.eval_F(xi);
  return (second + twist) / p.base.volume - 2.0 * p.base.curvature_sign;
}

SmoothnessReport check_smoothness_conditions(const DecoupledProfile& p) {
  SmoothnessReport r;
  r.C1 = p.tuple.period_p > 0.0 && p.tuple.area_a > 0.0;

  // F is linear: positivity on [0,1/2] is positivity at the endpoints.
  r.C2 = p.eval_F(0.0) > 0.0 && p.eval_F(0.5) > 0.0;

  const int n = 2048;
  bool positive = true;
  for (int i = 0; i < n; ++i) {
    double xi = 0.5 * i / n;
    if (!(p.eval_E(xi) > 0.0)) { positive = false; break; }
  }
  double e_half = p.eval_E(0.5);
  double e_prime_half = p.eval_E_prime(0.5);
  double scale = std::fabs(p.E[0]) + std::fabs(p.E[1]) + std::fabs(p.E[2]) +
                 std::fabs(p.E[3]) + std::fabs(p.E[4]);
  bool zero_at_half = std::fabs(e_half) <= 1e-10 * std::max(1.0, scale);
  bool simple = std::fabs(e_prime_half) > 1e-10 * std::max(1.0, scale);
  r.nut_degenerate = positive && zero_at_half && !simple;
  r.C3 = positive && zero_at_half && simple;

  if (r.C3) {
    r.A0 = p.A0();
    r.cone_check = std::fabs(p.tuple.period_p / (2.0 * r.A0) - 2.0 * M_PI);
  }
  return r;
}

DecoupledProfile nut_profile(const ExtendedK& k) {
  AdmissibleVerdict v = nut_admissible(k);
  if (!v.admissible)
    throw Error(ErrorCode::NotNutAdmissible, "k outside the nut range");
  FillTuple t;
  t.deg = -1;
  t.chi = 2;
  t.k = k;
  t.area_a = v.canonical_area;
  t.period_p = v.canonical_period;
  DecoupledProfile p = build_profile(t, BaseSurface::of_genus(0), /*force=*/true);
  p.is_nut = true;
  p.beta = v.beta;
  return p;
}

CoefficientFunctions coefficient_functions(const DecoupledProfile& p) {
  CoefficientFunctions c;
  c.k = p.tuple.k;
  c.Q = p.bolt_quotient();
  c.vol = p.base.volume;
  return c;
}

std::string profile_to_json(const DecoupledProfile& p) {
  nlohmann::json j;
  j["tuple"] = {{"deg", p.tuple.deg},
                {"chi", p.tuple.chi},
                {"k", p.tuple.k.str()},
                {"k_cube", p.tuple.k.is_infinite()
                               ? nlohmann::json(p.tuple.k.sign() > 0 ? "inf" : "-inf")
                               : nlohmann::json(p.tuple.k.cube())},
                {"a", p.tuple.area_a},
                {"p", p.tuple.period_p}};
  j["base"] = {{"genus", p.base.genus},
               {"curvature_sign", p.base.curvature_sign},
               {"volume", p.base.volume}};
  j["E_coeffs"] = p.E;
  j["F_coeffs"] = p.F;
  j["A0"] = p.A0();
  if (p.is_nut) j["beta"] = p.beta;
  return j.dump(2);
}

std::string profile_to_csv(const DecoupledProfile& p, int n_samples) {
  std::ostringstream os;
  os.precision(17);
  os << "xi,e_w,W,We_w,psi\n";
  for (int i = 0; i < n_samples; ++i) {
    double xi = 0.5 * i / (n_samples - 1);
    ProfileSample s = eval(p, xi);
    os << xi << "," << s.e_w << "," << s.W << "," << s.We_w << "," << s.psi << "\n";
  }
  return os.str();
}

}  // namespace ckpe
