#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ckpe/decoupled.hpp"
#include "ckpe/surface.hpp"

namespace ckpe {

// Cell-centered radial grid for the lift xi = 1/2 - r^2/4 on r in (0, sqrt(2)).
// Nodes r_m = (m + 1/2) dr avoid both the r = 0 axis and the xi = 0 face.
struct RadialLift {
  int M = 0;
  double dr = 0.0;
  std::vector<double> r;       // node radii
  std::vector<double> xi;      // 1/2 - r^2/4, decreasing in m
  std::vector<double> psi;     // e^{wbar}/(1/2 - xi) sampled at nodes
  std::vector<double> psi_xi;
  std::vector<double> a;       // -6 xi^2/(12 k^3 + xi^3)
  std::vector<double> drift;   // (2 psi_xi + a psi), the z.grad coefficient
  double wbar0 = 0.0;          // wbar at the xi = 0 face
  CoefficientFunctions coeffs;
};

// u(r_m, x_i, y_j) with the Dirichlet slice phi - wbar(0) carried separately.
// Even symmetry across r = 0 is a ghost rule, not storage.
struct LiftedField {
  int M = 0;
  TorusGrid grid;
  std::vector<double> v;  // ((m*nx)+i)*ny + j
  ScalarField2 boundary;  // value at the r = sqrt(2) face

  LiftedField() = default;
  LiftedField(int M_, const TorusGrid& g)
      : M(M_), grid(g), v(static_cast<std::size_t>(M_) * g.size(), 0.0), boundary(g) {}

  std::size_t idx(int m, int i, int j) const {
    return (static_cast<std::size_t>(m) * grid.nx + i) * grid.ny + j;
  }
  double& at(int m, int i, int j) { return v[idx(m, i, j)]; }
  double at(int m, int i, int j) const { return v[idx(m, i, j)]; }
  std::size_t size() const { return v.size(); }
  double sup_norm() const;
};

enum class LinearSolverKind { DirectSparse, IterativeFixedBudget };

struct SolverConfig {
  double newton_tol = 1e-10;  // sup-norm of the discrete residual
  int max_newton = 25;
  int continuation_steps = 4;
  double backtrack_factor = 0.5;
  int max_backtracks = 20;
  LinearSolverKind linear_solver = LinearSolverKind::DirectSparse;
  int iterative_budget = 400;      // fixed iteration cap for the iterative path
  double iterative_tol = 1e-13;
};

struct NewtonIterate {
  double residual_norm = 0.0;
  double step_scale = 1.0;      // accepted backtracking factor
  double linear_residual = 0.0; // achieved relative linear-solve residual
};

struct ContinuationRecord {
  double s = 0.0;
  double area_shift = 0.0;  // renormalization constant applied at this step
  std::vector<NewtonIterate> iterates;
  double final_residual = 0.0;
};

struct SolveDiagnostics {
  std::vector<ContinuationRecord> continuation;
  int total_newton = 0;
  double final_residual = 0.0;
  double margin_sup = 0.0;
  double margin_inf = 0.0;
  double min_W = 0.0;
  std::string linear_solver;
};

struct TodaSolution {
  FillTuple tuple;
  BaseSurface base;
  DecoupledProfile profile;
  RadialLift lift;
  LiftedField u;
  SolveDiagnostics diagnostics;

  // Restriction back to (xi, Sigma): slice m lives at xi = lift.xi[m].
  // w = u + wbar(xi); W from the exact chain rule w_xi = wbar_xi - (2/r) u_r.
  std::vector<double> xi_nodes() const { return lift.xi; }
  double w_at(int m, int i, int j) const;
  // Pointwise W; throws nothing, caller checks positivity.
  double W_at(int m, int i, int j) const;
  double u_r_at(int m, int i, int j) const;
};

RadialLift lift_coefficients(const DecoupledProfile& p, int M);

// Discrete residual of the lifted equation. All z-direction stencils act on
// e^u so that the assembled Jacobian is the exact derivative.
LiftedField residual(const LiftedField& u, const RadialLift& lift, int K_sigma);

// Sparse Jacobian in triplet form (row, col, value).
struct SparseTriplets {
  std::size_t n = 0;
  std::vector<int> row, col;
  std::vector<double> val;
};
SparseTriplets linearize(const LiftedField& u, const RadialLift& lift, int K_sigma);

// Applies the Jacobian without assembling it (used by tests).
LiftedField apply_linearized(const LiftedField& u, const RadialLift& lift, int K_sigma,
                             const LiftedField& v);

TodaSolution solve(const BoundaryDatum& phi, const FillTuple& t, const BaseSurface& base,
                   int M, const SolverConfig& cfg);

// (sup boundary u+ - sup interior u, inf analogue); >= -10*tol when converged.
std::pair<double, double> max_principle_check(const TodaSolution& sol);
std::pair<double, double> max_principle_margins(const LiftedField& u);

// The lift is a reparametrization for radial fields: values carry over
// unchanged onto the decreasing node set xi_m = 1/2 - r_m^2/4.
struct XiField {
  std::vector<double> xi;
  TorusGrid grid;
  std::vector<double> v;  // same layout as LiftedField
};
XiField restrict_to_xi(const LiftedField& u, const RadialLift& lift);

// Solution dump: CSV "xi,i,j,u,w,W" ordered by slice then row-major torus.
std::string solution_to_csv(const TodaSolution& sol);
std::string diagnostics_to_json(const TodaSolution& sol);

// Rebuilds a solution object (fields only, no solver diagnostics) from a dump
// produced by solution_to_csv together with its tuple and grid shape.
TodaSolution solution_from_csv(const std::string& csv, const FillTuple& t,
                               const BaseSurface& base, int M, const TorusGrid& g);

}  // namespace ckpe
