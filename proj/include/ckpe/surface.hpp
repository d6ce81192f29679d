#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ckpe/errors.hpp"

namespace ckpe {

// Node-centered grid on the flat torus [0,2pi)^2, area 4 pi^2.
struct TorusGrid {
  int nx = 0;
  int ny = 0;

  TorusGrid() = default;
  TorusGrid(int nx_, int ny_) : nx(nx_), ny(ny_) {
    if (nx < 1 || ny < 1) throw Error(ErrorCode::BadConfig, "grid counts must be positive");
  }

  double hx() const { return 2.0 * M_PI / nx; }
  double hy() const { return 2.0 * M_PI / ny; }
  double x(int i) const { return i * hx(); }
  double y(int j) const { return j * hy(); }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  bool operator==(const TorusGrid& o) const { return nx == o.nx && ny == o.ny; }
};

struct ScalarField2 {
  TorusGrid grid;
  std::vector<double> v;  // row-major: v[i*ny + j]

  ScalarField2() = default;
  explicit ScalarField2(const TorusGrid& g) : grid(g), v(g.size(), 0.0) {}

  double& at(int i, int j) { return v[static_cast<std::size_t>(i) * grid.ny + j]; }
  double at(int i, int j) const { return v[static_cast<std::size_t>(i) * grid.ny + j]; }

  template <class F>
  static ScalarField2 sample(const TorusGrid& g, F f) {
    ScalarField2 out(g);
    for (int i = 0; i < g.nx; ++i)
      for (int j = 0; j < g.ny; ++j) out.at(i, j) = f(g.x(i), g.y(j));
    return out;
  }
};

struct BoundaryDatum {
  ScalarField2 phi;       // w restricted to xi = 0
  double target_area = 0; // integral of e^phi
};

// Second-order 5-point periodic stencil.
ScalarField2 laplacian(const ScalarField2& f);

// Periodic trapezoid rule: sum * hx * hy (spectral for smooth fields).
double integrate(const ScalarField2& f);

// Shifts phi_raw by the constant making the e^phi integral equal a.
BoundaryDatum normalize_boundary(const ScalarField2& phi_raw, double a);

// CSV "i,j,value" row-major; the sidecar {n_x, n_y} travels as JSON.
std::string field_to_csv(const ScalarField2& f);
std::string grid_sidecar_json(const TorusGrid& g);
ScalarField2 field_from_csv(const std::string& csv, const TorusGrid& g);
TorusGrid grid_from_sidecar_json(const std::string& json_text);

}  // namespace ckpe
