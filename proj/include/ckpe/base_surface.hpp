#pragma once

#include <cmath>

#include "ckpe/errors.hpp"

namespace ckpe {

// Constant-curvature reference surface under the paper's normalization:
// genus 0 is the unit round sphere (area 4pi), genus 1 the flat torus of
// area 4pi^2, genus >= 2 the hyperbolic surface of area -2*pi*chi.
struct BaseSurface {
  int genus = 1;
  int curvature_sign = 0;  // K_Sigma in {-1, 0, +1}
  double volume = 0.0;

  int chi() const { return 2 - 2 * genus; }

  static BaseSurface of_genus(int g) {
    if (g < 0) throw Error(ErrorCode::InconsistentTuple, "genus must be nonnegative");
    BaseSurface s;
    s.genus = g;
    if (g == 0) {
      s.curvature_sign = +1;
      s.volume = 4.0 * M_PI;
    } else if (g == 1) {
      s.curvature_sign = 0;
      s.volume = 4.0 * M_PI * M_PI;
    } else {
      s.curvature_sign = -1;
      s.volume = -2.0 * M_PI * s.chi();
    }
    return s;
  }
};

}  // namespace ckpe
