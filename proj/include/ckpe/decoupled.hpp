#pragma once

#include <array>
#include <string>

#include "ckpe/admissibility.hpp"
#include "ckpe/base_surface.hpp"

namespace ckpe {

// Closed-form cohomogeneity-one solution profile. Everything is carried by
// two polynomials in the moment map xi over [0, 1/2]:
//   E(xi) = Vol_Sigma * e^{wbar}  (quartic; the xi^3, xi^4 terms drop at k=+-inf)
//   F(xi) = Vol_Sigma * W e^{wbar} = (deg*p) xi + a  (linear)
struct DecoupledProfile {
  FillTuple tuple;
  BaseSurface base;
  std::array<double, 5> E{};  // E[i] multiplies xi^i
  std::array<double, 2> F{};  // F[0] + F[1] xi

  double eval_E(double xi) const;
  double eval_E_prime(double xi) const;
  double eval_E_second(double xi) const;
  double eval_F(double xi) const { return F[0] + F[1] * xi; }

  // Cubic Q with E(xi) = (1/2 - xi) Q(xi); exact once E(1/2) = 0.
  std::array<double, 4> bolt_quotient() const;

  // Leading coefficient of W ~ A0 / (1/2 - xi) at the bolt.
  double A0() const;

  bool is_nut = false;    // double zero of E at 1/2 (isolated fixed point)
  double beta = 0.0;      // nut only
};

// Pointwise values of the profile.
struct ProfileSample {
  double e_w = 0.0;     // e^{wbar}
  double W = 0.0;       // +inf at the bolt
  double We_w = 0.0;    // W e^{wbar} = F/Vol
  double wbar_xi = 0.0; // d(wbar)/dxi = E'/E; -inf at the bolt
  double psi = 0.0;     // e^{wbar}/(1/2 - xi), extended through the bolt
};

// a(xi), b(xi) of the lifted equation plus psi and its xi-derivative.
struct CoefficientFunctions {
  ExtendedK k = ExtendedK::infinite();
  std::array<double, 4> Q{};  // psi = Q/Vol
  double vol = 1.0;

  double a(double xi) const;     // -6 xi^2/(12 k^3 + xi^3); 0 at k = +-inf
  double b(double xi) const;     // 12 xi/(12 k^3 + xi^3); 0 at k = +-inf
  double psi(double xi) const;
  double psi_xi(double xi) const;
};

struct SmoothnessReport {
  bool C1 = false;  // p > 0 and a > 0
  bool C2 = false;  // F > 0 on [0, 1/2]
  bool C3 = false;  // E > 0 on [0, 1/2), simple zero at 1/2
  bool nut_degenerate = false;  // E'(1/2) = 0 too: valid nut, not a bolt
  double A0 = 0.0;
  double cone_check = 0.0;  // |p/(2 A0) - 2 pi|
};

// Builds the profile for a tuple. Throws NonAdmissible unless the tuple
// passes is_admissible (or force is set for exploratory use).
DecoupledProfile build_profile(const FillTuple& t, const BaseSurface& base, bool force = false);

ProfileSample eval(const DecoupledProfile& p, double xi);

// (E'' + (xi/k^3) F)/Vol - 2 K_Sigma; identically zero for every profile.
double toda_ode_residual(const DecoupledProfile& p, double xi);

SmoothnessReport check_smoothness_conditions(const DecoupledProfile& p);

// S^2 nut profile; throws NotNutAdmissible outside Prop-3.4 range.
DecoupledProfile nut_profile(const ExtendedK& k);

CoefficientFunctions coefficient_functions(const DecoupledProfile& p);

// {tuple, base, E_coeffs[5], F_coeffs[2], A0, beta?} as JSON text.
std::string profile_to_json(const DecoupledProfile& p);

// CSV with header xi,e_w,W,We_w,psi at n uniform samples of [0, 1/2].
std::string profile_to_csv(const DecoupledProfile& p, int n_samples);

}  // namespace ckpe
