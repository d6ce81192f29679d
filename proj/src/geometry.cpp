#include "ckpe/geometry.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ckpe {

namespace {

// Quadratic-extrapolation ghost through the Dirichlet face; exact for fields
// quadratic in r, which keeps post-processed xi-derivatives second order.
inline double face_ghost(double face, double t1, double t2) {
  return (8.0 / 3.0) * face - 2.0 * t1 + (1.0 / 3.0) * t2;
}

// d/dxi of a node field given values along r (xi = 1/2 - r^2/4).
// face_value is the field at r = sqrt(2); values indexed by m as in LiftedField.
double xi_derivative(const std::vector<double>& t, int m, int M, double dr, double r,
                     double face_value) {
  double plus = m == M - 1 ? face_ghost(face_value, t[M - 1], t[M - 2]) : t[m + 1];
  double minus = m == 0 ? t[0] : t[m - 1];
  double ddr = (plus - minus) / (2.0 * dr);
  return -(2.0 / r) * ddr;
}

}  // namespace

std::vector<ScalarField2> compute_W(const TodaSolution& sol, const ExtendedK& k) {
  if (!(k == sol.tuple.k))
    throw Error(ErrorCode::ShapeMismatch, "k does not match the solution's tuple");
  std::vector<ScalarField2> out;
  const TorusGrid& g = sol.u.grid;
  for (int m = 0; m < sol.lift.M; ++m) {
    ScalarField2 f(g);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) {
        double W = sol.W_at(m, i, j);
        if (!(W > 0.0))
          throw Error(ErrorCode::NonPositiveW, "W <= 0 at a node; solution is not geometric");
        f.at(i, j) = W;
      }
    out.push_back(std::move(f));
  }
  return out;
}

MetricFields metric_fields(const TodaSolution& sol) {
  MetricFields mf;
  mf.tuple = sol.tuple;
  mf.base = sol.base;
  mf.grid = sol.u.grid;
  const int M = sol.lift.M;
  std::vector<ScalarField2> W = compute_W(sol, sol.tuple.k);

  // Store slices with xi increasing (reverse of the radial ordering).
  mf.xi.resize(M);
  mf.W.resize(M);
  mf.e_w.resize(M);
  for (int m = 0; m < M; ++m) {
    int s = M - 1 - m;
    mf.xi[s] = sol.lift.xi[m];
    mf.W[s] = W[m];
    ScalarField2 ew(mf.grid);
    for (int i = 0; i < mf.grid.nx; ++i)
      for (int j = 0; j < mf.grid.ny; ++j) ew.at(i, j) = std::exp(sol.w_at(m, i, j));
    mf.e_w[s] = std::move(ew);
  }

  CurvatureTwoForm F = curvature_two_form_from_solution(sol);
  mf.X.resize(M);
  mf.Y.resize(M);
  for (int s = 0; s < M; ++s) {
    GaugePotentials gp = reconstruct_potentials(F, s, sol.tuple.deg, sol.tuple.period_p);
    mf.X[s] = std::move(gp.X);
    mf.Y[s] = std::move(gp.Y);
    mf.linear_term = gp.linear_term;
  }
  return mf;
}

CurvatureTwoForm curvature_two_form_from_solution(const TodaSolution& sol) {
  const TorusGrid& g = sol.u.grid;
  const int M = sol.lift.M;
  CurvatureTwoForm F;
  F.grid = g;
  F.xi.resize(M);
  F.F1.assign(M, ScalarField2(g));
  F.d_xi_dx.assign(M, ScalarField2(g));
  F.d_xi_dy.assign(M, ScalarField2(g));

  // W e^w along r for each torus node, then the chain rule for d/dxi.
  const double E0 = sol.profile.eval_E(0.0) / sol.base.volume;
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      std::vector<double> t(M);
      for (int m = 0; m < M; ++m)
        t[m] = sol.W_at(m, i, j) * std::exp(sol.w_at(m, i, j));
      double face = std::exp(sol.u.boundary.at(i, j)) * E0;  // W = 1 at xi = 0
      for (int m = 0; m < M; ++m) {
        int s = M - 1 - m;
        F.xi[s] = sol.lift.xi[m];
        F.F1[s].at(i, j) = xi_derivative(t, m, M, sol.lift.dr, sol.lift.r[m], face);
      }
    }
  }
  // dxi-part: (-W_y, W_x) by centered torus differences slicewise.
  std::vector<ScalarField2> W = compute_W(sol, sol.tuple.k);
  for (int m = 0; m < M; ++m) {
    int s = M - 1 - m;
    const ScalarField2& w = W[m];
    for (int i = 0; i < g.nx; ++i) {
      int im = i == 0 ? g.nx - 1 : i - 1;
      int ip = i == g.nx - 1 ? 0 : i + 1;
      for (int j = 0; j < g.ny; ++j) {
        int jm = j == 0 ? g.ny - 1 : j - 1;
        int jp = j == g.ny - 1 ? 0 : j + 1;
        double Wx = (w.at(ip, j) - w.at(im, j)) / (2.0 * g.hx());
        double Wy = (w.at(i, jp) - w.at(i, jm)) / (2.0 * g.hy());
        F.d_xi_dx[s].at(i, j) = -Wy;
        F.d_xi_dy[s].at(i, j) = Wx;
      }
    }
  }
  return F;
}

CurvatureTwoForm curvature_two_form(const MetricFields& fields) {
  // Fields already carry slicewise W, e^w; differentiate their product in xi
  // by nonuniform centered differences on the stored slices.
  const TorusGrid& g = fields.grid;
  const int S = fields.slices();
  CurvatureTwoForm F;
  F.grid = g;
  F.xi = fields.xi;
  F.F1.assign(S, ScalarField2(g));
  F.d_xi_dx.assign(S, ScalarField2(g));
  F.d_xi_dy.assign(S, ScalarField2(g));
  for (int s = 0; s < S; ++s) {
    int sm = std::max(0, s - 1), sp = std::min(S - 1, s + 1);
    double dxi = fields.xi[sp] - fields.xi[sm];
    for (int i = 0; i < g.nx; ++i) {
      int im = i == 0 ? g.nx - 1 : i - 1;
      int ip = i == g.nx - 1 ? 0 : i + 1;
      for (int j = 0; j < g.ny; ++j) {
        int jm = j == 0 ? g.ny - 1 : j - 1;
        int jp = j == g.ny - 1 ? 0 : j + 1;
        double tp = fields.W[sp].at(i, j) * fields.e_w[sp].at(i, j);
        double tm = fields.W[sm].at(i, j) * fields.e_w[sm].at(i, j);
        F.F1[s].at(i, j) = (tp - tm) / dxi;
        const ScalarField2& w = fields.W[s];
        double Wx = (w.at(ip, j) - w.at(im, j)) / (2.0 * g.hx());
        double Wy = (w.at(i, jp) - w.at(i, jm)) / (2.0 * g.hy());
        F.d_xi_dx[s].at(i, j) = -Wy;
        F.d_xi_dy[s].at(i, j) = Wx;
      }
    }
  }
  return F;
}

GaugePotentials reconstruct_potentials(const CurvatureTwoForm& F, int slice, int deg,
                                       double period) {
  const TorusGrid& g = F.grid;
  const ScalarField2& F1 = F.F1.at(slice);
  const double vol = 4.0 * M_PI * M_PI;
  double mean = integrate(F1) / vol;
  double target = deg * period / vol;
  if (std::fabs(mean - target) > 1e-2 * std::max(1.0, std::fabs(target)))
    throw Error(ErrorCode::MeanMismatch, "slice mean of (W e^w)_xi is off deg*p/Vol");

  // Periodic Poisson solve for the oscillatory part, pinned at node (0,0).
  const int n = static_cast<int>(g.size());
  double sum = 0.0;
  for (double x : F1.v) sum += x;
  double node_mean = sum / n;

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs(n);
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  for (int i = 0; i < g.nx; ++i) {
    int im = i == 0 ? g.nx - 1 : i - 1;
    int ip = i == g.nx - 1 ? 0 : i + 1;
    for (int j = 0; j < g.ny; ++j) {
      int jm = j == 0 ? g.ny - 1 : j - 1;
      int jp = j == g.ny - 1 ? 0 : j + 1;
      int row = i * g.ny + j;
      if (row == 0) {
        trip.emplace_back(0, 0, 1.0);
        rhs[0] = 0.0;
        continue;
      }
      trip.emplace_back(row, row, -2.0 * ihx2 - 2.0 * ihy2);
      trip.emplace_back(row, ip * g.ny + j, ihx2);
      trip.emplace_back(row, im * g.ny + j, ihx2);
      trip.emplace_back(row, i * g.ny + jp, ihy2);
      trip.emplace_back(row, i * g.ny + jm, ihy2);
      rhs[row] = F1.at(i, j) - node_mean;
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(A);
  Eigen::VectorXd chi = lu.solve(rhs);

  GaugePotentials out;
  out.X = ScalarField2(g);
  out.Y = ScalarField2(g);
  out.linear_term = target;
  for (int i = 0; i < g.nx; ++i) {
    int im = i == 0 ? g.nx - 1 : i - 1;
    int ip = i == g.nx - 1 ? 0 : i + 1;
    for (int j = 0; j < g.ny; ++j) {
      int jm = j == 0 ? g.ny - 1 : j - 1;
      int jp = j == g.ny - 1 ? 0 : j + 1;
      double chi_x = (chi[ip * g.ny + j] - chi[im * g.ny + j]) / (2.0 * g.hx());
      double chi_y = (chi[i * g.ny + jp] - chi[i * g.ny + jm]) / (2.0 * g.hy());
      out.X.at(i, j) = -chi_y;
      out.Y.at(i, j) = chi_x;
    }
  }
  return out;
}

Mat4 MetricSampler::metric_h(const std::array<double, 4>& pt, Chart chart) const {
  double xi = xi_of(pt, chart);
  if (!(xi > 0.0)) throw Error(ErrorCode::OutOfRange, "h = xi^-2 g needs xi > 0");
  Mat4 g = metric_g(pt, chart);
  double f = 1.0 / (xi * xi);
  for (auto& row : g)
    for (double& v : row) v *= f;
  return g;
}

double MetricSampler::xi_of(const std::array<double, 4>& pt, Chart chart) const {
  if (chart == Chart::Interior) return pt[0];
  double tau2 = pt[0] * pt[0] + pt[1] * pt[1];
  return 0.5 - (M_PI / tuple().period_p) * tau2;
}

namespace {

// Sigma-block components of the constant-curvature base in the chart used by
// the sampler: flat torus uses (x, y); the round sphere uses (theta, phi).
void sigma_block(const BaseSurface& base, double x, double& sxx, double& sxy, double& syy) {
  if (base.genus == 1) {
    sxx = 1.0;
    sxy = 0.0;
    syy = 1.0;
  } else if (base.genus == 0) {
    sxx = 1.0;
    sxy = 0.0;
    double s = std::sin(x);
    syy = s * s;
  } else {
    throw Error(ErrorCode::BadConfig, "metric sampling covers torus and sphere bases");
  }
}

Mat4 interior_metric(double W, double e_w, double X, double Y, const BaseSurface& base,
                     double x) {
  double sxx, sxy, syy;
  sigma_block(base, x, sxx, sxy, syy);
  double iW = 1.0 / W;
  Mat4 g{};
  g[0][0] = W;
  g[1][1] = iW;
  g[1][2] = g[2][1] = iW * X;
  g[1][3] = g[3][1] = iW * Y;
  g[2][2] = W * e_w * sxx + iW * X * X;
  g[2][3] = g[3][2] = W * e_w * sxy + iW * X * Y;
  g[3][3] = W * e_w * syy + iW * Y * Y;
  return g;
}

// Pull a metric in (xi, theta, x, y) back through the bolt coordinates
// x1 = tau cos theta, x2 = tau sin theta, tau^2 = (p/pi)(1/2 - xi).
Mat4 bolt_pullback(const Mat4& gi, const std::array<double, 4>& pt, double period) {
  double x1 = pt[0], x2 = pt[1];
  double tau2 = x1 * x1 + x2 * x2;
  if (tau2 <= 0.0) throw Error(ErrorCode::OutOfRange, "bolt chart needs tau > 0");
  double c = M_PI / period;
  double J[4][4] = {};  // J[i][a] = d(interior_i)/d(bolt_a)
  J[0][0] = -2.0 * c * x1;
  J[0][1] = -2.0 * c * x2;
  J[1][0] = -x2 / tau2;
  J[1][1] = x1 / tau2;
  J[2][2] = 1.0;
  J[3][3] = 1.0;
  Mat4 out{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double s = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) s += J[i][a] * J[j][b] * gi[i][j];
      out[a][b] = s;
    }
  return out;
}

class DecoupledSampler : public MetricSampler {
 public:
  explicit DecoupledSampler(const DecoupledProfile& p) : p_(p) {}

  Mat4 metric_g(const std::array<double, 4>& pt, Chart chart) const override {
    double xi = xi_of(pt, chart);
    if (!(xi >= 0.0 && xi < 0.5)) throw Error(ErrorCode::OutOfRange, "xi outside [0, 1/2)");
    double E = p_.eval_E(xi);
    double F = p_.eval_F(xi);
    double W = F / E;
    double e_w = E / p_.base.volume;
    double x = chart == Chart::Interior ? pt[2] : pt[2];
    double Y = gauge_Y(x);
    Mat4 gi = interior_metric(W, e_w, 0.0, Y, p_.base, x);
    if (chart == Chart::Interior) return gi;
    return bolt_pullback(gi, pt, p_.tuple.period_p);
  }

  const FillTuple& tuple() const override { return p_.tuple; }
  const BaseSurface& base() const override { return p_.base; }

 private:
  double gauge_Y(double x) const {
    double f1 = p_.tuple.deg * p_.tuple.period_p / p_.base.volume;
    if (p_.base.genus == 1) return f1 * x;       // d(f1 x) ^ dy = f1 dx^dy
    if (p_.base.genus == 0) return -f1 * std::cos(x);  // d(-f1 cos th) ^ dphi = f1 dvol
    throw Error(ErrorCode::BadConfig, "metric sampling covers torus and sphere bases");
  }

  DecoupledProfile p_;
};

// Natural cubic spline on increasing, possibly nonuniform nodes.
class Spline1D {
 public:
  Spline1D() = default;
  Spline1D(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    int n = static_cast<int>(x_.size());
    y2_.assign(n, 0.0);
    std::vector<double> u(n, 0.0);
    for (int i = 1; i < n - 1; ++i) {
      double sig = (x_[i] - x_[i - 1]) / (x_[i + 1] - x_[i - 1]);
      double p = sig * y2_[i - 1] + 2.0;
      y2_[i] = (sig - 1.0) / p;
      u[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]) - (y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]);
      u[i] = (6.0 * u[i] / (x_[i + 1] - x_[i - 1]) - sig * u[i - 1]) / p;
    }
    for (int i = n - 2; i >= 0; --i) y2_[i] = y2_[i] * y2_[i + 1] + u[i];
  }

  double eval(double x) const {
    int n = static_cast<int>(x_.size());
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      if (x_[mid] > x) hi = mid; else lo = mid;
    }
    double h = x_[hi] - x_[lo];
    double A = (x_[hi] - x) / h, B = (x - x_[lo]) / h;
    return A * y_[lo] + B * y_[hi] +
           ((A * A * A - A) * y2_[lo] + (B * B * B - B) * y2_[hi]) * h * h / 6.0;
  }

 private:
  std::vector<double> x_, y_, y2_;
};

// Periodic cubic spline on a uniform grid covering [0, n*h).
class PeriodicSpline1D {
 public:
  PeriodicSpline1D() = default;
  PeriodicSpline1D(std::vector<double> y, double h) : y_(std::move(y)), h_(h) {
    int n = static_cast<int>(y_.size());
    // Cyclic tridiagonal (1, 4, 1) * y2 * h^2/6 = second differences.
    std::vector<double> rhs(n);
    for (int i = 0; i < n; ++i) {
      int im = i == 0 ? n - 1 : i - 1;
      int ip = i == n - 1 ? 0 : i + 1;
      rhs[i] = 6.0 * (y_[ip] - 2.0 * y_[i] + y_[im]) / (h * h);
    }
    y2_ = solve_cyclic(n, rhs);
  }

  double eval(double x) const {
    int n = static_cast<int>(y_.size());
    double L = n * h_;
    x -= L * std::floor(x / L);
    int lo = static_cast<int>(x / h_);
    if (lo >= n) lo = n - 1;
    int hi = lo + 1 == n ? 0 : lo + 1;
    double A = ((lo + 1) * h_ - x) / h_, B = (x - lo * h_) / h_;
    return A * y_[lo] + B * y_[hi] +
           ((A * A * A - A) * y2_[lo] + (B * B * B - B) * y2_[hi]) * h_ * h_ / 6.0;
  }

 private:
  // Sherman-Morrison split of the cyclic (1, 4, 1) system.
  static std::vector<double> solve_cyclic(int n, const std::vector<double>& r) {
    const double a = 1.0, b = 4.0, c = 1.0;
    const double alpha = c, beta = a, gamma = -b;
    auto solve_mod = [&](const std::vector<double>& rhs) {
      std::vector<double> out(n), gam(n);
      double bet = b - gamma;
      out[0] = rhs[0] / bet;
      for (int i = 1; i < n; ++i) {
        gam[i] = c / bet;
        double bi = i == n - 1 ? b - alpha * beta / gamma : b;
        bet = bi - a * gam[i];
        out[i] = (rhs[i] - a * out[i - 1]) / bet;
      }
      for (int i = n - 2; i >= 0; --i) out[i] -= gam[i + 1] * out[i + 1];
      return out;
    };
    std::vector<double> x1 = solve_mod(r);
    std::vector<double> z(n, 0.0);
    z[0] = gamma;
    z[n - 1] = alpha;
    std::vector<double> x2 = solve_mod(z);
    double fact = (x1[0] + beta * x1[n - 1] / gamma) / (1.0 + x2[0] + beta * x2[n - 1] / gamma);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = x1[i] - fact * x2[i];
    return out;
  }

  std::vector<double> y_;
  double h_ = 1.0;
  std::vector<double> y2_;
};

// Tensor spline on a field stack: periodic bicubic on the torus per slice,
// natural cubic across slices in xi.
class FieldSpline {
 public:
  FieldSpline() = default;
  FieldSpline(const std::vector<double>& xi, const std::vector<ScalarField2>& slices) {
    xi_ = xi;
    grid_ = slices.front().grid;
    rows_.resize(slices.size());
    for (std::size_t s = 0; s < slices.size(); ++s) {
      rows_[s].reserve(grid_.ny);
      for (int j = 0; j < grid_.ny; ++j) {
        std::vector<double> col(grid_.nx);
        for (int i = 0; i < grid_.nx; ++i) col[i] = slices[s].at(i, j);
        rows_[s].emplace_back(std::move(col), grid_.hx());
      }
    }
  }

  double eval(double xi, double x, double y) const {
    std::vector<double> per_slice(xi_.size());
    for (std::size_t s = 0; s < xi_.size(); ++s) per_slice[s] = eval2d(s, x, y);
    Spline1D sp(xi_, per_slice);
    return sp.eval(xi);
  }

  double xi_min() const { return xi_.front(); }
  double xi_max() const { return xi_.back(); }

 private:
  double eval2d(std::size_t s, double x, double y) const {
    std::vector<double> tmp(grid_.ny);
    for (int j = 0; j < grid_.ny; ++j) tmp[j] = rows_[s][j].eval(x);
    PeriodicSpline1D sy(tmp, grid_.hy());
    return sy.eval(y);
  }

  std::vector<double> xi_;
  TorusGrid grid_;
  std::vector<std::vector<PeriodicSpline1D>> rows_;  // [slice][j] spline along x
};

class GridSampler : public MetricSampler {
 public:
  explicit GridSampler(const MetricFields& f)
      : tuple_(f.tuple), base_(f.base), linear_term_(f.linear_term),
        W_(f.xi, f.W), e_w_(f.xi, f.e_w), X_(f.xi, f.X), Y_(f.xi, f.Y) {}

  Mat4 metric_g(const std::array<double, 4>& pt, Chart chart) const override {
    double xi = xi_of(pt, chart);
    if (!(xi >= W_.xi_min() && xi <= W_.xi_max()))
      throw Error(ErrorCode::OutOfRange, "xi outside the stored slice range");
    double x = pt[2], y = pt[3];
    double W = W_.eval(xi, x, y);
    if (!(W > 0.0)) throw Error(ErrorCode::NonPositiveW, "interpolated W not positive");
    double e_w = e_w_.eval(xi, x, y);
    double X = X_.eval(xi, x, y);
    double Y = Y_.eval(xi, x, y) + linear_term_ * x;
    Mat4 gi = interior_metric(W, e_w, X, Y, base_, x);
    if (chart == Chart::Interior) return gi;
    return bolt_pullback(gi, pt, tuple_.period_p);
  }

  const FillTuple& tuple() const override { return tuple_; }
  const BaseSurface& base() const override { return base_; }

 private:
  FillTuple tuple_;
  BaseSurface base_;
  double linear_term_;
  FieldSpline W_, e_w_, X_, Y_;
};

}  // namespace

std::shared_ptr<MetricSampler> assemble_metric(const MetricFields& fields) {
  for (const auto& slice : fields.W)
    for (double w : slice.v)
      if (!(w > 0.0)) throw Error(ErrorCode::NonPositiveW, "W must be positive on every slice");
  return std::make_shared<GridSampler>(fields);
}

std::shared_ptr<MetricSampler> decoupled_metric_sampler(const DecoupledProfile& profile) {
  return std::make_shared<DecoupledSampler>(profile);
}

std::vector<double> degree_quantization(const MetricFields& fields) {
  CurvatureTwoForm F = curvature_two_form(fields);
  std::vector<double> out(F.F1.size());
  for (std::size_t s = 0; s < F.F1.size(); ++s)
    out[s] = integrate(F.F1[s]) / fields.tuple.period_p;
  return out;
}

std::string metric_samples_csv(const MetricSampler& s,
                               const std::vector<std::array<double, 4>>& pts,
                               MetricSampler::Chart chart) {
  std::ostringstream os;
  os.precision(17);
  os << "chart,c0,c1,c2,c3,g00,g01,g02,g03,g11,g12,g13,g22,g23,g33\n";
  const char* name = chart == MetricSampler::Chart::Interior ? "interior" : "bolt";
  for (const auto& pt : pts) {
    Mat4 g = s.metric_g(pt, chart);
    os << name << "," << pt[0] << "," << pt[1] << "," << pt[2] << "," << pt[3];
    for (int i = 0; i < 4; ++i)
      for (int j = i; j < 4; ++j) os << "," << g[i][j];
    os << "\n";
  }
  return os.str();
}

}  // namespace ckpe
