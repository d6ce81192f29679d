#include "ckpe/surface.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace ckpe {

ScalarField2 laplacian(const ScalarField2& f) {
  const TorusGrid& g = f.grid;
  ScalarField2 out(g);
  const double ihx2 = 1.0 / (g.hx() * g.hx());
  const double ihy2 = 1.0 / (g.hy() * g.hy());
  for (int i = 0; i < g.nx; ++i) {
    int im = i == 0 ? g.nx - 1 : i - 1;
    int ip = i == g.nx - 1 ? 0 : i + 1;
    for (int j = 0; j < g.ny; ++j) {
      int jm = j == 0 ? g.ny - 1 : j - 1;
      int jp = j == g.ny - 1 ? 0 : j + 1;
      out.at(i, j) = (f.at(ip, j) - 2.0 * f.at(i, j) + f.at(im, j)) * ihx2 +
                     (f.at(i, jp) - 2.0 * f.at(i, j) + f.at(i, jm)) * ihy2;
    }
  }
  return out;
}

double integrate(const ScalarField2& f) {
  double s = 0.0;
  for (double x : f.v) s += x;
  return s * f.grid.hx() * f.grid.hy();
}

BoundaryDatum normalize_boundary(const ScalarField2& phi_raw, double a) {
  if (!(a > 0.0)) throw Error(ErrorCode::NormalizationFailed, "target area must be positive");
  for (double x : phi_raw.v)
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFiniteInput, "boundary field not finite");
  ScalarField2 ef(phi_raw.grid);
  for (std::size_t n = 0; n < phi_raw.v.size(); ++n) ef.v[n] = std::exp(phi_raw.v[n]);
  double mass = integrate(ef);
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw Error(ErrorCode::NormalizationFailed, "e^phi integral not positive finite");
  double c = std::log(a / mass);
  BoundaryDatum out;
  out.phi = phi_raw;
  for (double& x : out.phi.v) x += c;
  out.target_area = a;
  return out;
}

std::string field_to_csv(const ScalarField2& f) {
  std::ostringstream os;
  os.precision(17);
  os << "i,j,value\n";
  for (int i = 0; i < f.grid.nx; ++i)
    for (int j = 0; j < f.grid.ny; ++j) os << i << "," << j << "," << f.at(i, j) << "\n";
  return os.str();
}

std::string grid_sidecar_json(const TorusGrid& g) {
  nlohmann::json j{{"n_x", g.nx}, {"n_y", g.ny}};
  return j.dump();
}

ScalarField2 field_from_csv(const std::string& csv, const TorusGrid& g) {
  ScalarField2 out(g);
  std::istringstream is(csv);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::IoError, "empty field file");
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int i, j;
    double v;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &i, &j, &v) != 3)
      throw Error(ErrorCode::IoError, "bad field row: " + line);
    if (i < 0 || i >= g.nx || j < 0 || j >= g.ny)
      throw Error(ErrorCode::IoError, "field index out of range");
    out.at(i, j) = v;
    ++rows;
  }
  if (rows != g.size()) throw Error(ErrorCode::IoError, "field row count does not match grid");
  return out;
}

TorusGrid grid_from_sidecar_json(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  return TorusGrid(j.at("n_x").get<int>(), j.at("n_y").get<int>());
}

}  // namespace ckpe
