#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ckpe/toda_bvp.hpp"

namespace ckpe {

using Mat4 = std::array<std::array<double, 4>, 4>;

// Per-slice metric data in the fixed local gauge eta = dtheta + X dx + Y dy.
// The topological mean of the curvature lives in the non-periodic linear term
// Y_lin = (deg p / 4 pi^2) x, valid on a single coordinate patch.
struct MetricFields {
  FillTuple tuple;
  BaseSurface base;
  TorusGrid grid;
  std::vector<double> xi;           // slice locations
  std::vector<ScalarField2> W;      // per slice
  std::vector<ScalarField2> e_w;
  std::vector<ScalarField2> X;      // periodic parts of the gauge potentials
  std::vector<ScalarField2> Y;
  double linear_term = 0.0;         // coefficient of x in Y

  int slices() const { return static_cast<int>(xi.size()); }
};

struct CurvatureTwoForm {
  TorusGrid grid;
  std::vector<double> xi;
  std::vector<ScalarField2> F1;       // (W e^w)_xi, coefficient of dvol_Sigma
  std::vector<ScalarField2> d_xi_dx;  // coefficient of dx^dxi
  std::vector<ScalarField2> d_xi_dy;  // coefficient of dy^dxi
};

// Pointwise 4x4 metric evaluator. Interior chart coordinates are
// (xi, theta, x, y); the bolt chart replaces (xi, theta) by
// x1 = tau cos theta, x2 = tau sin theta with tau = sqrt(p/pi) sqrt(1/2 - xi).
class MetricSampler {
 public:
  enum class Chart { Interior, Bolt };

  virtual ~MetricSampler() = default;

  virtual Mat4 metric_g(const std::array<double, 4>& pt, Chart chart = Chart::Interior) const = 0;
  Mat4 metric_h(const std::array<double, 4>& pt, Chart chart = Chart::Interior) const;

  virtual const FillTuple& tuple() const = 0;
  virtual const BaseSurface& base() const = 0;

  double xi_of(const std::array<double, 4>& pt, Chart chart) const;
};

// W = (12 - 6 xi w_xi)/(12 + xi^3/k^3) slicewise from a solution field.
// Throws NonPositiveW when any node fails the positivity the paper guarantees.
std::vector<ScalarField2> compute_W(const TodaSolution& sol, const ExtendedK& k);

MetricFields metric_fields(const TodaSolution& sol);

CurvatureTwoForm curvature_two_form(const MetricFields& fields);

// Same data computed straight from the lifted solution, using the exact
// chain rule for xi-derivatives instead of slice differences.
CurvatureTwoForm curvature_two_form_from_solution(const TodaSolution& sol);

// Local gauge for one slice: solves the periodic Poisson problem for the
// oscillatory part of F1 and leaves the mean to the linear term. Throws
// MeanMismatch when the slice mean is not deg*p/Vol within tolerance.
struct GaugePotentials {
  ScalarField2 X;
  ScalarField2 Y;
  double linear_term = 0.0;
};
GaugePotentials reconstruct_potentials(const CurvatureTwoForm& F, int slice, int deg,
                                       double period);

// Samplers.
std::shared_ptr<MetricSampler> assemble_metric(const MetricFields& fields);
std::shared_ptr<MetricSampler> decoupled_metric_sampler(const DecoupledProfile& profile);

// Slicewise (1/p) * integral of F1 over Sigma; equals deg for true solutions.
std::vector<double> degree_quantization(const MetricFields& fields);

// CSV dump "chart,c0,c1,c2,c3,g00,g01,...,g33" (upper triangle).
std::string metric_samples_csv(const MetricSampler& s,
                               const std::vector<std::array<double, 4>>& pts,
                               MetricSampler::Chart chart);

}  // namespace ckpe
