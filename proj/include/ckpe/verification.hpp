#pragma once

#include <string>
#include <vector>

#include "ckpe/geometry.hpp"
#include "ckpe/toda_bvp.hpp"

namespace ckpe {

struct VerificationReport {
  double linear_law_err = 0.0;
  double quartic_law_err = 0.0;
  double einstein_residual = -1.0;  // negative: not run
  double scalar_g_err = -1.0;
  double weyl_k_err = -1.0;
  int M = 0, nx = 0, ny = 0;
  double patch_lo = 0.0, patch_hi = 0.0, fd_step = 0.0;

  std::string to_json() const;
};

// sup over slices of | int_Sigma W e^w - ((deg p) xi + a) |.
double conserved_linear(const TodaSolution& sol, const FillTuple& t);

// sup over slices of | int_Sigma e^w - E(xi) | with E the profile quartic.
double conserved_quartic(const TodaSolution& sol, const FillTuple& t);

// Where the curvature lattice lives inside the patch.
struct CurvaturePatch {
  double xi_lo = 0.1;
  double xi_hi = 0.4;
  double step = 1e-3;   // FD step, all four coordinate directions
  int n_xi = 3;
  int n_angular = 2;    // samples per remaining coordinate
};

// Pointwise curvature of a sampled metric by nested fourth-order differences.
struct CurvaturePoint {
  Mat4 ricci{};
  double scalar = 0.0;
  double weyl_plus_norm = 0.0;  // |W^+| in the frame norm, oriented by the Kahler form
};
CurvaturePoint curvature_at(const MetricSampler& s, const std::array<double, 4>& pt,
                            double step, bool of_h);

// sup over the lattice of the frame norm of Ric(h) + 3h.
double einstein_residual(const MetricSampler& s, const CurvaturePatch& patch);

// Finite k: sup |s_g - xi/k^3|. Infinite k: throws InfiniteK; use
// scalar_flat_check instead.
double scalar_curvature_g(const MetricSampler& s, const CurvaturePatch& patch);
double scalar_flat_check(const MetricSampler& s, const CurvaturePatch& patch);  // sup |s_g|

// Finite k: sup | |k| (2 sqrt6 |W^+_h|)^{1/3} / xi - 1 | * 1/2, i.e. the error
// in the bolt-extrapolated k-relation. Infinite k: throws InfiniteK; use
// asd_weyl_check (sup |W^+_h|) instead.
double weyl_k_check(const MetricSampler& s, const CurvaturePatch& patch);
double asd_weyl_check(const MetricSampler& s, const CurvaturePatch& patch);

VerificationReport verify_solution(const TodaSolution& sol, const FillTuple& t);
VerificationReport verify_decoupled_metric(const DecoupledProfile& profile,
                                           const CurvaturePatch& patch);

}  // namespace ckpe
