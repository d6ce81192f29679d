#pragma once

#include <string>

#include "ckpe/errors.hpp"

namespace ckpe {

// k^3 thresholds separating the admissibility branches. Comparisons are done
// on k^3, never on cube roots, so exact tokens land exactly on the boundary.
inline constexpr double k3_area_free = 1.0 / 48.0;     // deg = -chi branch, area a is free
inline constexpr double k3_positive_min = 1.0 / 192.0; // lower edge of the positive-k window
inline constexpr double k3_period_pole = -1.0 / 96.0;  // 96 k^3 + 1 = 0, period formula blows up

// The scaling constant k of the canonical conformal change. Finite nonzero,
// or +/-infinity for the anti-self-dual case. The cube is the authoritative
// value; all branch formulas are rational in k^3.
class ExtendedK {
 public:
  static ExtendedK finite(double k);
  static ExtendedK from_cube(double k3);
  static ExtendedK infinite(int sign = +1);

  // Accepts "inf", "-inf", "1/cbrt48", "1/cbrt96", "1/cbrt192" (optionally
  // with leading '-') or a decimal literal.
  static ExtendedK parse(const std::string& token);

  bool is_infinite() const { return infinite_; }
  int sign() const;
  double value() const;  // cbrt(k3) for finite, +/-inf otherwise
  double cube() const;   // k^3; +/-inf for the infinite case

  std::string str() const;

  bool operator==(const ExtendedK& o) const;

 private:
  ExtendedK() = default;
  bool infinite_ = false;
  int inf_sign_ = +1;
  double k3_ = 0.0;
};

}  // namespace ckpe
