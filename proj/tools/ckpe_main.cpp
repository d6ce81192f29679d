// ckpe: admissibility decisions, decoupled profiles, the lifted Dirichlet
// solver for the twisted Toda equation, and geometric verification.
//
// Exit codes: 0 success / affirmative verdict, 2 well-formed negative
// verdict, 1 error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "ckpe/decoupled.hpp"
#include "ckpe/geometry.hpp"
#include "ckpe/toda_bvp.hpp"
#include "ckpe/verification.hpp"

using namespace ckpe;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 2;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

json verdict_json(const AdmissibleVerdict& v) {
  json j;
  j["admissible"] = v.admissible;
  j["branch"] = branch_name(v.branch);
  j["violated_conditions"] = v.violated_conditions;
  j["boundary_warning"] = v.boundary_warning;
  if (v.decoupled_only) j["decoupled_only"] = true;
  json can;
  can["p"] = v.canonical_period;
  if (v.area_free)
    can["area_free"] = true;
  else
    can["a"] = v.canonical_area;
  j["canonical"] = can;
  if (v.branch == AdmissibleBranch::Nut) j["beta"] = v.beta;
  return j;
}

struct TupleArgs {
  int genus = 1;
  int deg = 0;
  std::string k_token = "1";
  double a_flag = 0.0;
  double p_flag = 0.0;
  bool has_a = false;
  bool has_p = false;

  FillTuple tuple() const {
    ExtendedK k = ExtendedK::parse(k_token);
    FillTuple t;
    t.deg = deg;
    t.chi = 2 - 2 * genus;
    t.k = k;
    PeriodArea pa = canonical_period_area(t.deg, t.chi, k);
    t.period_p = has_p ? p_flag : pa.period;
    if (has_a)
      t.area_a = a_flag;
    else if (pa.area_free)
      throw Error(ErrorCode::BadConfig, "this k makes the area a free parameter; pass --a");
    else
      t.area_a = pa.area;
    return t;
  }
};

void add_tuple_flags(CLI::App* cmd, TupleArgs& args) {
  cmd->add_option("--genus", args.genus, "genus of the base surface")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--deg", args.deg, "degree of the line bundle");
  cmd->add_option("--k", args.k_token,
                  "k value: decimal, inf, -inf, or (-)1/cbrt48 | 1/cbrt96 | 1/cbrt192");
  auto* ao = cmd->add_option("--a", args.a_flag,
                             "area of the 2-dimensional infinity (default: canonical)");
  auto* po = cmd->add_option("--p", args.p_flag, "S^1 fiber period (default: canonical)");
  cmd->callback([&args, ao, po]() {
    args.has_a = ao->count() > 0;
    args.has_p = po->count() > 0;
  });
}

// "const" or "fourier:(kx,ky,amp)[;...]"; a fourth entry adds a sine term:
// (kx,ky,amp_cos,amp_sin).
ScalarField2 boundary_from_preset(const std::string& preset, const TorusGrid& g, double wbar0) {
  if (preset == "const") return ScalarField2::sample(g, [&](double, double) { return wbar0; });
  const std::string tag = "fourier:";
  if (preset.rfind(tag, 0) != 0)
    throw Error(ErrorCode::BadConfig, "boundary preset must be 'const' or 'fourier:...'");
  struct Mode {
    double kx, ky, amp_cos, amp_sin;
  };
  std::vector<Mode> modes;
  std::string body = preset.substr(tag.size());
  std::size_t pos = 0;
  while ((pos = body.find('(', pos)) != std::string::npos) {
    std::size_t close = body.find(')', pos);
    if (close == std::string::npos)
      throw Error(ErrorCode::BadConfig, "malformed fourier mode list");
    std::string entry = body.substr(pos + 1, close - pos - 1);
    std::vector<double> nums;
    std::istringstream is(entry);
    std::string tok;
    while (std::getline(is, tok, ',')) nums.push_back(std::stod(tok));
    if (nums.size() != 3 && nums.size() != 4)
      throw Error(ErrorCode::BadConfig, "fourier mode needs (kx,ky,amp) or (kx,ky,amp_c,amp_s)");
    modes.push_back({nums[0], nums[1], nums[2], nums.size() == 4 ? nums[3] : 0.0});
    pos = close + 1;
  }
  if (modes.empty()) throw Error(ErrorCode::BadConfig, "empty fourier mode list");
  return ScalarField2::sample(g, [&](double x, double y) {
    double v = wbar0;
    for (const Mode& m : modes) {
      double ph = m.kx * x + m.ky * y;
      v += m.amp_cos * std::cos(ph) + m.amp_sin * std::sin(ph);
    }
    return v;
  });
}

SolverConfig config_from_json(const json& j) {
  SolverConfig cfg;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "newton_tol") cfg.newton_tol = it.value().get<double>();
    else if (key == "max_newton") cfg.max_newton = it.value().get<int>();
    else if (key == "continuation_steps") cfg.continuation_steps = it.value().get<int>();
    else if (key == "backtrack_factor") cfg.backtrack_factor = it.value().get<double>();
    else if (key == "max_backtracks") cfg.max_backtracks = it.value().get<int>();
    else if (key == "iterative_budget") cfg.iterative_budget = it.value().get<int>();
    else if (key == "iterative_tol") cfg.iterative_tol = it.value().get<double>();
    else if (key == "linear_solver") {
      std::string v = it.value().get<std::string>();
      if (v == "direct-sparse") cfg.linear_solver = LinearSolverKind::DirectSparse;
      else if (v == "iterative") cfg.linear_solver = LinearSolverKind::IterativeFixedBudget;
      else throw Error(ErrorCode::BadConfig, "linear_solver must be direct-sparse or iterative");
    } else {
      throw Error(ErrorCode::BadConfig, "unknown config key '" + key + "'");
    }
  }
  return cfg;
}

struct GridArg {
  int M = 48;
  int nx = 24;
  int ny = 24;
};

GridArg parse_grid(const std::string& s) {
  GridArg g;
  if (std::sscanf(s.c_str(), "%d,%d,%d", &g.M, &g.nx, &g.ny) != 3)
    throw Error(ErrorCode::BadConfig, "--grid wants M,NX,NY");
  return g;
}

int cmd_admissible(const TupleArgs& targs, bool nut, const std::string& out) {
  AdmissibleVerdict v;
  if (nut) {
    v = nut_admissible(ExtendedK::parse(targs.k_token));
  } else {
    FillTuple t = targs.tuple();
    v = is_admissible(t, BaseSurface::of_genus(targs.genus));
  }
  std::string text = verdict_json(v).dump(2);
  std::cout << text << "\n";
  if (!out.empty()) write_file(out, text);
  return v.admissible ? kExitOk : kExitNegative;
}

int cmd_decoupled(const TupleArgs& targs, bool nut, bool force, int samples,
                  const std::string& out_profile, const std::string& out_csv) {
  DecoupledProfile p;
  if (nut) {
    p = nut_profile(ExtendedK::parse(targs.k_token));
  } else {
    FillTuple t = targs.tuple();
    BaseSurface base = BaseSurface::of_genus(targs.genus);
    if (!force && !is_admissible(t, base).admissible) {
      std::cerr << "tuple is not admissible (use --force to build anyway)\n";
      return kExitNegative;
    }
    p = build_profile(t, base, force);
  }
  std::string profile_text = profile_to_json(p);
  std::cout << profile_text << "\n";
  if (!out_profile.empty()) write_file(out_profile, profile_text);
  if (!out_csv.empty()) write_file(out_csv, profile_to_csv(p, samples));
  return kExitOk;
}

int cmd_solve(const TupleArgs& targs, const std::string& grid_spec, const std::string& preset,
              const std::string& boundary_file, const std::string& config_path, bool iterative,
              const std::string& out_solution, const std::string& out_diagnostics) {
  FillTuple t = targs.tuple();
  BaseSurface base = BaseSurface::of_genus(targs.genus);
  GridArg grid = parse_grid(grid_spec);
  TorusGrid g(grid.nx, grid.ny);

  SolverConfig cfg;
  if (!config_path.empty()) cfg = config_from_json(json::parse(read_file(config_path)));
  if (iterative) cfg.linear_solver = LinearSolverKind::IterativeFixedBudget;

  DecoupledProfile prof = build_profile(t, base);
  double wbar0 = std::log(prof.eval_E(0.0) / base.volume);
  ScalarField2 raw = boundary_file.empty()
                         ? boundary_from_preset(preset, g, wbar0)
                         : field_from_csv(read_file(boundary_file), g);
  BoundaryDatum phi = normalize_boundary(raw, t.area_a);

  TodaSolution sol = solve(phi, t, base, grid.M, cfg);
  if (!out_solution.empty()) write_file(out_solution, solution_to_csv(sol));
  std::string diag = diagnostics_to_json(sol);
  std::cout << diag << "\n";
  if (!out_diagnostics.empty()) write_file(out_diagnostics, diag);
  return kExitOk;
}

int cmd_verify(const TupleArgs& targs, bool nut, const std::string& solution_path,
               const std::string& grid_spec, const std::string& boundary_file,
               bool decoupled_metric, const std::string& patch_spec, double step,
               double tol_conserved, double tol_einstein, double tol_scalar, double tol_weyl,
               const std::string& out) {
  VerificationReport report;
  bool pass = true;

  if (!solution_path.empty()) {
    FillTuple t = targs.tuple();
    BaseSurface base = BaseSurface::of_genus(targs.genus);
    GridArg grid = parse_grid(grid_spec);
    TorusGrid g(grid.nx, grid.ny);
    TodaSolution sol = solution_from_csv(read_file(solution_path), t, base, grid.M, g);
    if (!boundary_file.empty()) {
      ScalarField2 phi = field_from_csv(read_file(boundary_file), g);
      double wbar0 = std::log(sol.profile.eval_E(0.0) / base.volume);
      for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) sol.u.boundary.at(i, j) = phi.at(i, j) - wbar0;
    }
    report = verify_solution(sol, t);
    pass = report.linear_law_err < tol_conserved && report.quartic_law_err < tol_conserved;
  } else if (decoupled_metric) {
    CurvaturePatch patch;
    if (!patch_spec.empty()) {
      if (std::sscanf(patch_spec.c_str(), "%lf,%lf", &patch.xi_lo, &patch.xi_hi) != 2)
        throw Error(ErrorCode::BadConfig, "--patch wants lo,hi");
    }
    patch.step = step;
    DecoupledProfile p;
    if (nut) {
      p = nut_profile(ExtendedK::parse(targs.k_token));
    } else {
      p = build_profile(targs.tuple(), BaseSurface::of_genus(targs.genus));
    }
    report = verify_decoupled_metric(p, patch);
    pass = report.einstein_residual < tol_einstein && report.scalar_g_err < tol_scalar &&
           report.weyl_k_err < tol_weyl;
  } else {
    throw Error(ErrorCode::BadConfig, "verify needs --solution or --decoupled");
  }

  std::string text = report.to_json();
  std::cout << text << "\n";
  if (!out.empty()) write_file(out, text);
  return pass ? kExitOk : kExitNegative;
}

int cmd_sweep(int genus, int deg, double k3_lo, double k3_hi, int n, bool random_sample,
              unsigned seed, const std::string& out) {
  int chi = 2 - 2 * genus;
  BaseSurface base = BaseSurface::of_genus(genus);
  json header;
  header["intervals"] = json::array();
  auto cube_json = [](double c) {
    if (std::isinf(c)) return json(c > 0 ? "inf" : "-inf");
    return json(c);
  };
  for (const KInterval& iv : k_range_for(deg, chi, genus)) {
    header["intervals"].push_back({{"lo_cube", cube_json(iv.lo_cube)},
                                   {"hi_cube", cube_json(iv.hi_cube)},
                                   {"lo_closed", iv.lo_closed},
                                   {"hi_closed", iv.hi_closed}});
  }
  json lines = json::array();
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> uni(k3_lo, k3_hi);
  for (int i = 0; i < n; ++i) {
    double t3 = random_sample ? uni(rng)
                              : k3_lo + (k3_hi - k3_lo) * (n == 1 ? 0.5 : double(i) / (n - 1));
    json row;
    row["k_cube"] = t3;
    try {
      ExtendedK k = ExtendedK::from_cube(t3);
      PeriodArea pa = canonical_period_area(deg, chi, k);
      FillTuple t{deg, chi, k, pa.area_free ? 1.0 : pa.area, pa.period};
      AdmissibleVerdict v = is_admissible(t, base);
      row["k"] = k.value();
      row["admissible"] = v.admissible;
      row["branch"] = branch_name(v.branch);
      row["p"] = t.period_p;
      row["a"] = t.area_a;
    } catch (const Error& e) {
      row["admissible"] = false;
      row["error"] = e.what();
    }
    lines.push_back(row);
  }
  json doc{{"header", header}, {"samples", lines}};
  std::string text = doc.dump(2);
  std::cout << text << "\n";
  if (!out.empty()) write_file(out, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conformally Kahler Poincare-Einstein fill-ins: admissibility, decoupled "
               "profiles, the lifted Toda solver, and curvature verification"};
  app.require_subcommand(1);

  TupleArgs targs;
  bool nut = false;
  std::string out, out_profile, out_csv, out_solution, out_diagnostics;

  auto* adm = app.add_subcommand("admissible", "decide admissibility of a tuple");
  add_tuple_flags(adm, targs);
  adm->add_flag("--nut", nut, "decide the S^2 nut case instead of the bolt case");
  adm->add_option("--out", out, "also write the verdict JSON here");

  auto* dec = app.add_subcommand("decoupled", "emit a closed-form profile");
  add_tuple_flags(dec, targs);
  bool force = false;
  int samples = 101;
  dec->add_flag("--nut", nut, "build the S^2 nut profile");
  dec->add_flag("--force", force, "build even when the tuple is not admissible");
  dec->add_option("--samples", samples, "rows in the field CSV");
  dec->add_option("--out-profile", out_profile, "profile JSON path");
  dec->add_option("--out-csv", out_csv, "field CSV path (xi,e_w,W,We_w,psi)");

  auto* slv = app.add_subcommand("solve", "solve the Dirichlet problem on the torus");
  add_tuple_flags(slv, targs);
  std::string grid_spec = "48,24,24", preset = "const", boundary_file, config_path;
  bool iterative = false;
  slv->add_option("--grid", grid_spec, "M,NX,NY (radial cells, torus nodes)");
  slv->add_option("--boundary", preset,
                  "'const' or 'fourier:(kx,ky,amp[,amp_sin])[,...]' added to wbar(0)");
  slv->add_option("--boundary-file", boundary_file, "surface CSV with the raw boundary datum");
  slv->add_option("--config", config_path, "solver config JSON (flags win)");
  slv->add_flag("--iterative", iterative, "use the fixed-budget iterative linear solver");
  slv->add_option("--out-solution", out_solution, "solution dump CSV (xi,i,j,u,w,W)");
  slv->add_option("--out-diagnostics", out_diagnostics, "diagnostics JSON");

  auto* ver = app.add_subcommand("verify", "conserved integrals / curvature checks");
  add_tuple_flags(ver, targs);
  std::string solution_path, vgrid = "48,24,24", vboundary, patch_spec;
  bool decoupled_metric = false;
  double step = 1e-3;
  double tol_conserved = 1e-2, tol_einstein = 1e-4, tol_scalar = 1e-4, tol_weyl = 1e-2;
  ver->add_flag("--nut", nut, "verify the S^2 nut metric");
  ver->add_option("--solution", solution_path, "solution dump to check conserved laws on");
  ver->add_option("--grid", vgrid, "M,NX,NY of the dump");
  ver->add_option("--boundary-file", vboundary, "boundary datum used for the solve");
  ver->add_flag("--decoupled", decoupled_metric, "FD curvature checks on the closed-form metric");
  ver->add_option("--patch", patch_spec, "xi_lo,xi_hi for curvature sampling");
  ver->add_option("--step", step, "FD step for curvature");
  ver->add_option("--tol-conserved", tol_conserved, "pass threshold for conserved laws");
  ver->add_option("--tol-einstein", tol_einstein, "pass threshold for the Einstein residual");
  ver->add_option("--tol-scalar", tol_scalar, "pass threshold for the scalar-curvature law");
  ver->add_option("--tol-weyl", tol_weyl, "pass threshold for the k-Weyl relation");
  ver->add_option("--out", out, "report JSON path");

  auto* swp = app.add_subcommand("sweep", "scan k^3 values for admissibility");
  int sgenus = 1, sdeg = -1, sn = 50;
  double k3_lo = -1.0, k3_hi = 1.0;
  bool random_sample = false;
  unsigned seed = 0;
  swp->add_option("--genus", sgenus);
  swp->add_option("--deg", sdeg);
  swp->add_option("--k3-min", k3_lo, "lower end of the scanned k^3 range");
  swp->add_option("--k3-max", k3_hi, "upper end of the scanned k^3 range");
  swp->add_option("--n", sn, "number of samples");
  swp->add_flag("--random", random_sample, "sample k^3 uniformly at random");
  swp->add_option("--seed", seed, "RNG seed for --random");
  swp->add_option("--out", out, "sweep JSON path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (adm->parsed()) return cmd_admissible(targs, nut, out);
    if (dec->parsed()) return cmd_decoupled(targs, nut, force, samples, out_profile, out_csv);
    if (slv->parsed())
      return cmd_solve(targs, grid_spec, preset, boundary_file, config_path, iterative,
                       out_solution, out_diagnostics);
    if (ver->parsed())
      return cmd_verify(targs, nut, solution_path, vgrid, vboundary, decoupled_metric,
                        patch_spec, step, tol_conserved, tol_einstein, tol_scalar, tol_weyl,
                        out);
    if (swp->parsed())
      return cmd_sweep(sgenus, sdeg, k3_lo, k3_hi, sn, random_sample, seed, out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
