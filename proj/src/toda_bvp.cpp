#include "ckpe/toda_bvp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "json.hpp"

namespace ckpe {

double LiftedField::sup_norm() const {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

RadialLift lift_coefficients(const DecoupledProfile& p, int M) {
  if (M < 16) throw Error(ErrorCode::BadConfig, "radial grid needs M >= 16");
  SmoothnessReport rep = check_smoothness_conditions(p);
  if (rep.nut_degenerate)
    throw Error(ErrorCode::NutDegenerate, "psi vanishes at the bolt; nut profiles cannot be lifted");

  RadialLift lift;
  lift.M = M;
  lift.dr = std::sqrt(2.0) / M;
  lift.coeffs = coefficient_functions(p);
  lift.r.resize(M);
  lift.xi.resize(M);
  lift.psi.resize(M);
  lift.psi_xi.resize(M);
  lift.a.resize(M);
  lift.drift.resize(M);
  for (int m = 0; m < M; ++m) {
    double r = (m + 0.5) * lift.dr;
    double xi = 0.5 - 0.25 * r * r;
    lift.r[m] = r;
    lift.xi[m] = xi;
    lift.psi[m] = lift.coeffs.psi(xi);
    lift.psi_xi[m] = lift.coeffs.psi_xi(xi);
    lift.a[m] = lift.coeffs.a(xi);
    lift.drift[m] = 2.0 * lift.psi_xi[m] + lift.a[m] * lift.psi[m];
    if (!(lift.psi[m] > 0.0))
      throw Error(ErrorCode::NutDegenerate, "psi not positive at a lift node");
  }
  lift.wbar0 = std::log(p.eval_E(0.0) / p.base.volume);
  return lift;
}

namespace {

struct RadialStencil {
  // Couplings acting on the exponentiated field e^u.
  std::vector<double> cm, cd, cp;
};

RadialStencil radial_stencil(const RadialLift& lift) {
  RadialStencil s;
  int M = lift.M;
  s.cm.resize(M);
  s.cd.resize(M);
  s.cp.resize(M);
  double dr = lift.dr;
  for (int m = 0; m < M; ++m) {
    double r = lift.r[m];
    double lap = 1.0 / (dr * dr);
    double first = 3.0 / (2.0 * r * dr);           // (3/r) D_r part of the 4D Laplacian
    double adv = 0.5 * lift.drift[m] * r / (2.0 * dr);  // -(1/2) drift * r D_r
    s.cp[m] = lift.psi[m] * (lap + first) - adv;
    s.cm[m] = lift.psi[m] * (lap - first) + adv;
    s.cd[m] = -2.0 * lift.psi[m] * lap;
  }
  return s;
}

// e^u at the Dirichlet ghost behind the r = sqrt(2) face.
inline double ghost_exp(double u_last, double bc) { return std::exp(2.0 * bc - u_last); }

void check_shapes(const LiftedField& u, const RadialLift& lift) {
  if (u.M != lift.M || u.boundary.grid.nx != u.grid.nx || u.boundary.grid.ny != u.grid.ny)
    throw Error(ErrorCode::ShapeMismatch, "field and lift shapes disagree");
}

}  // namespace

LiftedField residual(const LiftedField& u, const RadialLift& lift, int K_sigma) {
  check_shapes(u, lift);
  const TorusGrid& g = u.grid;
  const int M = lift.M, nx = g.nx, ny = g.ny;
  RadialStencil st = radial_stencil(lift);
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());

  std::vector<double> eu(u.v.size());
  for (std::size_t n = 0; n < u.v.size(); ++n) eu[n] = std::exp(u.v[n]);

  LiftedField out(M, g);
  out.boundary = u.boundary;
  for (int m = 0; m < M; ++m) {
    for (int i = 0; i < nx; ++i) {
      int im = i == 0 ? nx - 1 : i - 1;
      int ip = i == nx - 1 ? 0 : i + 1;
      for (int j = 0; j < ny; ++j) {
        int jm = j == 0 ? ny - 1 : j - 1;
        int jp = j == ny - 1 ? 0 : j + 1;
        std::size_t n = u.idx(m, i, j);
        double lap_x = (u.v[u.idx(m, ip, j)] - 2.0 * u.v[n] + u.v[u.idx(m, im, j)]) * ihx2 +
                       (u.v[u.idx(m, i, jp)] - 2.0 * u.v[n] + u.v[u.idx(m, i, jm)]) * ihy2;
        double g_m = eu[n];
        double g_minus = m == 0 ? eu[n] : eu[u.idx(m - 1, i, j)];
        double g_plus = m == M - 1 ? ghost_exp(u.v[n], u.boundary.at(i, j))
                                   : eu[u.idx(m + 1, i, j)];
        double radial = st.cp[m] * g_plus + st.cd[m] * g_m + st.cm[m] * g_minus;
        out.v[n] = lap_x + radial + 2.0 * K_sigma * (g_m - 1.0);
      }
    }
  }
  return out;
}

SparseTriplets linearize(const LiftedField& u, const RadialLift& lift, int K_sigma) {
  check_shapes(u, lift);
  const TorusGrid& g = u.grid;
  const int M = lift.M, nx = g.nx, ny = g.ny;
  RadialStencil st = radial_stencil(lift);
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());

  SparseTriplets T;
  T.n = u.size();
  T.row.reserve(7 * T.n);
  T.col.reserve(7 * T.n);
  T.val.reserve(7 * T.n);
  auto push = [&T](std::size_t r, std::size_t c, double v) {
    T.row.push_back(static_cast<int>(r));
    T.col.push_back(static_cast<int>(c));
    T.val.push_back(v);
  };

  for (int m = 0; m < M; ++m) {
    for (int i = 0; i < nx; ++i) {
      int im = i == 0 ? nx - 1 : i - 1;
      int ip = i == nx - 1 ? 0 : i + 1;
      for (int j = 0; j < ny; ++j) {
        int jm = j == 0 ? ny - 1 : j - 1;
        int jp = j == ny - 1 ? 0 : j + 1;
        std::size_t n = u.idx(m, i, j);
        double e_here = std::exp(u.v[n]);

        double diag = -2.0 * ihx2 - 2.0 * ihy2;
        diag += (st.cd[m] + 2.0 * K_sigma) * e_here;
        if (m == 0) diag += st.cm[0] * e_here;  // even reflection across r = 0
        if (m == M - 1) diag += st.cp[M - 1] * (-ghost_exp(u.v[n], u.boundary.at(i, j)));

        push(n, n, diag);
        push(n, u.idx(m, ip, j), ihx2);
        push(n, u.idx(m, im, j), ihx2);
        push(n, u.idx(m, i, jp), ihy2);
        push(n, u.idx(m, i, jm), ihy2);
        if (m > 0) push(n, u.idx(m - 1, i, j), st.cm[m] * std::exp(u.v[u.idx(m - 1, i, j)]));
        if (m < M - 1) push(n, u.idx(m + 1, i, j), st.cp[m] * std::exp(u.v[u.idx(m + 1, i, j)]));
      }
    }
  }
  return T;
}

LiftedField apply_linearized(const LiftedField& u, const RadialLift& lift, int K_sigma,
                             const LiftedField& v) {
  check_shapes(u, lift);
  if (v.size() != u.size()) throw Error(ErrorCode::ShapeMismatch, "direction size mismatch");
  SparseTriplets T = linearize(u, lift, K_sigma);
  LiftedField out(u.M, u.grid);
  for (std::size_t t = 0; t < T.val.size(); ++t)
    out.v[T.row[t]] += T.val[t] * v.v[T.col[t]];
  return out;
}

double TodaSolution::u_r_at(int m, int i, int j) const {
  double dr = lift.dr;
  double up = m == lift.M - 1 ? 2.0 * u.boundary.at(i, j) - u.at(m, i, j) : u.at(m + 1, i, j);
  double um = m == 0 ? u.at(0, i, j) : u.at(m - 1, i, j);
  return (up - um) / (2.0 * dr);
}

double TodaSolution::w_at(int m, int i, int j) const {
  return u.at(m, i, j) + std::log(profile.eval_E(lift.xi[m]) / base.volume);
}

double TodaSolution::W_at(int m, int i, int j) const {
  double xi = lift.xi[m];
  double E = profile.eval_E(xi);
  double wbar_xi = profile.eval_E_prime(xi) / E;
  double u_xi = -(2.0 / lift.r[m]) * u_r_at(m, i, j);
  double num = 12.0 - 6.0 * xi * (wbar_xi + u_xi);
  double den = tuple.k.is_infinite() ? 12.0 : 12.0 + xi * xi * xi / tuple.k.cube();
  return num / den;
}

std::pair<double, double> max_principle_margins(const LiftedField& u) {
  double sup_int = -1e300, inf_int = 1e300;
  for (double x : u.v) {
    sup_int = std::max(sup_int, x);
    inf_int = std::min(inf_int, x);
  }
  double sup_b = -1e300, inf_b = 1e300;
  for (double x : u.boundary.v) {
    sup_b = std::max(sup_b, x);
    inf_b = std::min(inf_b, x);
  }
  double margin_sup = std::max(0.0, sup_b) - sup_int;
  double margin_inf = inf_int - std::min(0.0, inf_b);
  return {margin_sup, margin_inf};
}

std::pair<double, double> max_principle_check(const TodaSolution& sol) {
  return max_principle_margins(sol.u);
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

SpMat to_eigen(const SparseTriplets& T) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(T.val.size());
  for (std::size_t t = 0; t < T.val.size(); ++t)
    trip.emplace_back(T.row[t], T.col[t], T.val[t]);
  SpMat A(static_cast<int>(T.n), static_cast<int>(T.n));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

struct LinearSolveResult {
  Eigen::VectorXd x;
  double rel_residual = 0.0;
};

LinearSolveResult solve_linear(const SpMat& A, const Eigen::VectorXd& b, const SolverConfig& cfg) {
  LinearSolveResult out;
  if (cfg.linear_solver == LinearSolverKind::DirectSparse) {
    Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      throw Error(ErrorCode::NewtonDiverged, "sparse factorization failed");
    out.x = lu.solve(b);
  } else {
    Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-5);
    it.preconditioner().setFillfactor(12);
    it.setMaxIterations(cfg.iterative_budget);
    it.setTolerance(cfg.iterative_tol);
    it.compute(A);
    out.x = it.solve(b);
  }
  double bn = b.norm();
  out.rel_residual = bn > 0.0 ? (A * out.x - b).norm() / bn : 0.0;
  return out;
}

// One Newton run at fixed boundary data, warm-started from u.
void newton_solve(LiftedField& u, const RadialLift& lift, const SolverConfig& cfg,
                  ContinuationRecord& rec) {
  LiftedField res = residual(u, lift, 0);
  double rn = res.sup_norm();
  int iter = 0;
  while (rn >= cfg.newton_tol) {
    if (iter >= cfg.max_newton)
      throw Error(ErrorCode::NewtonDiverged, "Newton did not reach tolerance in max_newton steps");
    SpMat A = to_eigen(linearize(u, lift, 0));
    Eigen::VectorXd b(static_cast<int>(u.size()));
    for (std::size_t n = 0; n < u.size(); ++n) b[static_cast<int>(n)] = -res.v[n];
    LinearSolveResult lin = solve_linear(A, b, cfg);

    double lambda = 1.0;
    LiftedField trial = u;
    LiftedField trial_res;
    double trial_norm = 0.0;
    int backtracks = 0;
    for (;;) {
      for (std::size_t n = 0; n < u.size(); ++n)
        trial.v[n] = u.v[n] + lambda * lin.x[static_cast<int>(n)];
      trial_res = residual(trial, lift, 0);
      trial_norm = trial_res.sup_norm();
      if (trial_norm < rn) break;
      if (++backtracks > cfg.max_backtracks)
        throw Error(ErrorCode::NewtonDiverged, "line search stalled");
      lambda *= cfg.backtrack_factor;
    }
    u = trial;
    res = trial_res;
    rn = trial_norm;
    ++iter;
    rec.iterates.push_back({rn, lambda, lin.rel_residual});
  }
  rec.final_residual = rn;
}

}  // namespace

TodaSolution solve(const BoundaryDatum& phi, const FillTuple& t, const BaseSurface& base,
                   int M, const SolverConfig& cfg) {
  if (base.genus != 1)
    throw Error(ErrorCode::NonAdmissibleTuple, "the PDE solver covers the torus base only");
  if (phi.phi.grid.nx < 8 || phi.phi.grid.ny < 8)
    throw Error(ErrorCode::BadConfig, "solver grids need n_x, n_y >= 8");
  AdmissibleVerdict verdict = is_admissible(t, base);
  if (!verdict.admissible)
    throw Error(ErrorCode::NonAdmissibleTuple, "tuple is not admissible");
  {
    ScalarField2 ephi(phi.phi.grid);
    for (std::size_t n = 0; n < ephi.v.size(); ++n) ephi.v[n] = std::exp(phi.phi.v[n]);
    double mass = integrate(ephi);
    if (std::fabs(mass - t.area_a) > 1e-8 * std::max(1.0, t.area_a))
      throw Error(ErrorCode::NormalizationFailed, "boundary datum is not normalized to area a");
  }

  TodaSolution sol;
  sol.tuple = t;
  sol.base = base;
  sol.profile = build_profile(t, base);
  sol.lift = lift_coefficients(sol.profile, M);
  sol.u = LiftedField(M, phi.phi.grid);

  const double wbar0 = sol.lift.wbar0;
  const int N = std::max(1, cfg.continuation_steps);
  for (int step = 1; step <= N; ++step) {
    double s = static_cast<double>(step) / N;
    ScalarField2 phi_s(phi.phi.grid);
    for (std::size_t n = 0; n < phi_s.v.size(); ++n)
      phi_s.v[n] = wbar0 + s * (phi.phi.v[n] - wbar0);
    BoundaryDatum renorm = normalize_boundary(phi_s, t.area_a);
    double shift = renorm.phi.v[0] - phi_s.v[0];

    ContinuationRecord rec;
    rec.s = s;
    rec.area_shift = shift;
    for (int i = 0; i < phi.phi.grid.nx; ++i)
      for (int j = 0; j < phi.phi.grid.ny; ++j)
        sol.u.boundary.at(i, j) = renorm.phi.at(i, j) - wbar0;
    newton_solve(sol.u, sol.lift, cfg, rec);
    sol.diagnostics.total_newton += static_cast<int>(rec.iterates.size());
    sol.diagnostics.final_residual = rec.final_residual;
    sol.diagnostics.continuation.push_back(std::move(rec));
  }

  auto margins = max_principle_check(sol);
  sol.diagnostics.margin_sup = margins.first;
  sol.diagnostics.margin_inf = margins.second;
  sol.diagnostics.linear_solver =
      cfg.linear_solver == LinearSolverKind::DirectSparse ? "direct-sparse" : "iterative";

  double min_W = 1e300;
  for (int m = 0; m < M; ++m)
    for (int i = 0; i < phi.phi.grid.nx; ++i)
      for (int j = 0; j < phi.phi.grid.ny; ++j) min_W = std::min(min_W, sol.W_at(m, i, j));
  sol.diagnostics.min_W = min_W;
  if (!(min_W > 0.0))
    throw Error(ErrorCode::NonPositiveW, "converged field has non-positive W; solver failure");
  return sol;
}

XiField restrict_to_xi(const LiftedField& u, const RadialLift& lift) {
  check_shapes(u, lift);
  XiField out;
  out.xi = lift.xi;
  out.grid = u.grid;
  out.v = u.v;
  return out;
}

std::string solution_to_csv(const TodaSolution& sol) {
  std::ostringstream os;
  os.precision(17);
  os << "xi,i,j,u,w,W\n";
  for (int m = 0; m < sol.lift.M; ++m)
    for (int i = 0; i < sol.u.grid.nx; ++i)
      for (int j = 0; j < sol.u.grid.ny; ++j)
        os << sol.lift.xi[m] << "," << i << "," << j << "," << sol.u.at(m, i, j) << ","
           << sol.w_at(m, i, j) << "," << sol.W_at(m, i, j) << "\n";
  return os.str();
}

TodaSolution solution_from_csv(const std::string& csv, const FillTuple& t,
                               const BaseSurface& base, int M, const TorusGrid& g) {
  TodaSolution sol;
  sol.tuple = t;
  sol.base = base;
  sol.profile = build_profile(t, base, /*force=*/true);
  sol.lift = lift_coefficients(sol.profile, M);
  sol.u = LiftedField(M, g);

  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::IoError, "empty solution file");
  std::size_t rows = 0;
  int m = 0;
  double current_xi = 0.0;
  bool have_xi = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    double xi, uval, wval, Wval;
    int i, j;
    if (std::sscanf(line.c_str(), "%lf,%d,%d,%lf,%lf,%lf", &xi, &i, &j, &uval, &wval, &Wval) != 6)
      throw Error(ErrorCode::IoError, "bad solution row: " + line);
    if (!have_xi || xi != current_xi) {
      m = static_cast<int>(rows / g.size());
      current_xi = xi;
      have_xi = true;
      if (m >= M || std::fabs(xi - sol.lift.xi[m]) > 1e-9)
        throw Error(ErrorCode::IoError, "solution slices do not match the stated grid");
    }
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny)
      throw Error(ErrorCode::IoError, "solution index out of range");
    sol.u.at(m, i, j) = uval;
    ++rows;
  }
  if (rows != sol.u.size())
    throw Error(ErrorCode::IoError, "solution row count does not match grid");
  // Boundary slice is the analytic one the dump was produced with only in the
  // normalized case; reconstruct it from the outermost slices by extrapolation.
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny; ++j)
      sol.u.boundary.at(i, j) =
          0.5 * (3.0 * sol.u.at(M - 1, i, j) - sol.u.at(M - 2, i, j));
  return sol;
}

std::string diagnostics_to_json(const TodaSolution& sol) {
  nlohmann::json j;
  j["tuple"] = {{"deg", sol.tuple.deg},
                {"chi", sol.tuple.chi},
                {"k", sol.tuple.k.str()},
                {"a", sol.tuple.area_a},
                {"p", sol.tuple.period_p}};
  j["grid"] = {{"M", sol.lift.M}, {"n_x", sol.u.grid.nx}, {"n_y", sol.u.grid.ny}};
  j["total_newton"] = sol.diagnostics.total_newton;
  j["final_residual"] = sol.diagnostics.final_residual;
  j["margin_sup"] = sol.diagnostics.margin_sup;
  j["margin_inf"] = sol.diagnostics.margin_inf;
  j["min_W"] = sol.diagnostics.min_W;
  j["linear_solver"] = sol.diagnostics.linear_solver;
  nlohmann::json path = nlohmann::json::array();
  for (const auto& rec : sol.diagnostics.continuation) {
    nlohmann::json r{{"s", rec.s},
                     {"area_shift", rec.area_shift},
                     {"final_residual", rec.final_residual}};
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : rec.iterates)
      iters.push_back({{"residual", it.residual_norm},
                       {"step_scale", it.step_scale},
                       {"linear_residual", it.linear_residual}});
    r["iterates"] = iters;
    path.push_back(r);
  }
  j["continuation"] = path;
  return j.dump(2);
}

}  // namespace ckpe
