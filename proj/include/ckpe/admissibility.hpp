#pragma once

#include <string>
#include <vector>

#include "ckpe/base_surface.hpp"
#include "ckpe/extended_k.hpp"

namespace ckpe {

// The five-tuple (deg, chi, k, a, p) deciding whether a smooth
// Poincare-Einstein fill-in over the given base exists.
struct FillTuple {
  int deg = 0;
  int chi = 0;
  ExtendedK k = ExtendedK::infinite();
  double area_a = 0.0;    // area of the 2-dimensional infinity
  double period_p = 0.0;  // S^1 fiber length over the boundary
};

enum class AdmissibleBranch { GenericK, SpecialK48, ASD, Nut };

const char* branch_name(AdmissibleBranch b);

struct AdmissibleVerdict {
  bool admissible = false;
  AdmissibleBranch branch = AdmissibleBranch::GenericK;
  std::vector<std::string> violated_conditions;
  // Set when some compared quantity sits within 1e-12 relative of a branch
  // boundary; the verdict itself is still decided by strict comparison.
  bool boundary_warning = false;
  // Genus-0 verdicts rest on the decoupled classification only; the Dirichlet
  // solver theory covers genus >= 1.
  bool decoupled_only = false;
  // Canonical data echoed back (NaN when not defined for the branch).
  double canonical_period = 0.0;
  double canonical_area = 0.0;
  bool area_free = false;
  double beta = 0.0;  // nut case only: fiber-squash parameter p / (2 pi)
};

struct PeriodArea {
  double period = 0.0;
  double area = 0.0;      // NaN when area_free
  bool area_free = false; // k^3 = 1/48: any a > 0 (genus >= 1) works
};

// Canonical (p, a) forced by smoothness at the bolt. Throws
// SpecialKDegreeMismatch when k^3 = 1/48 but deg != -chi.
PeriodArea canonical_period_area(int deg, int chi, const ExtendedK& k);

// Bolt admissibility per the genus >= 1 and genus 0 definitions.
AdmissibleVerdict is_admissible(const FillTuple& t, const BaseSurface& base);

// Nut case: isolated fixed point over S^2, deg = -1, base round sphere.
AdmissibleVerdict nut_admissible(const ExtendedK& k);

// One maximal range of k for which the tuple with canonical (p, a) is
// admissible. Endpoints are stored as k^3 (+-inf allowed).
struct KInterval {
  double lo_cube = 0.0;
  double hi_cube = 0.0;
  bool lo_closed = false;
  bool hi_closed = false;

  bool contains_cube(double t3) const;
  bool contains(const ExtendedK& k) const;
  double lo_k() const { return std::cbrt(lo_cube); }
  double hi_k() const { return std::cbrt(hi_cube); }
};

// Union of k-intervals admitting a smooth fill-in for fixed (deg, chi), with
// canonical (p, a). Empty when no k works.
std::vector<KInterval> k_range_for(int deg, int chi, int genus);

}  // namespace ckpe
