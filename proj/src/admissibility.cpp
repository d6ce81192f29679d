#include "ckpe/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ckpe {

namespace {

constexpr double kBoundaryRelTol = 1e-12;  // boundary-warning band
constexpr double kMatchRelTol = 1e-9;      // accepted deviation of (p, a) from canonical

double nan_v() { return std::numeric_limits<double>::quiet_NaN(); }

bool near_rel(double x, double y, double rel) {
  if (x == y) return true;
  double scale = std::max({1.0, std::fabs(x), std::fabs(y)});
  return std::fabs(x - y) <= rel * scale;
}

// The branch thresholds are simultaneously zeros/poles of the canonical
// data, so everything that decides a branch is evaluated as a linear form
// in t = k^3 with integer coefficients under a single fma rounding. That
// keeps verdicts correct one ulp away from every threshold.
double lin_96(double t) { return std::fma(96.0, t, 1.0); }     // 96 t + 1
double lin_48(double t) { return std::fma(48.0, t, -1.0); }    // 48 t - 1
double lin_192(double t) { return std::fma(192.0, t, -1.0); }  // 192 t - 1

// chi (96t + 1) + deg (192t - 1): its sign against lin_192 encodes the
// degree inequality deg <> -chi (96t+1)/(192t-1), and its zero is where the
// canonical area changes sign.
double degree_form(int deg, int chi, double t) {
  return std::fma(96.0 * chi + 192.0 * deg, t, static_cast<double>(chi - deg));
}

// deg < bound at this t (the genus >= 1 inequality, cross-multiplied).
bool degree_below_bound(int deg, int chi, double t) {
  double L = degree_form(deg, chi, t);
  return lin_192(t) > 0.0 ? L < 0.0 : L > 0.0;
}

// k^3 where the degree bound equals deg; only meaningful when 2 deg + chi != 0.
double degree_bound_inverse(int deg, int chi) {
  return (static_cast<double>(deg) - chi) / (96.0 * (chi + 2.0 * deg));
}

void add_violation(AdmissibleVerdict& v, const char* label) {
  if (std::find(v.violated_conditions.begin(), v.violated_conditions.end(), label) ==
      v.violated_conditions.end())
    v.violated_conditions.emplace_back(label);
}

void flag_if_near(AdmissibleVerdict& v, double x, double boundary) {
  if (near_rel(x, boundary, kBoundaryRelTol)) v.boundary_warning = true;
}

}  // namespace

const char* branch_name(AdmissibleBranch b) {
  switch (b) {
    case AdmissibleBranch::GenericK: return "GenericK";
    case AdmissibleBranch::SpecialK48: return "SpecialK48";
    case AdmissibleBranch::ASD: return "ASD";
    case AdmissibleBranch::Nut: return "Nut";
  }
  return "?";
}

PeriodArea canonical_period_area(int deg, int chi, const ExtendedK& k) {
  PeriodArea out;
  if (k.is_infinite()) {
    out.period = M_PI;
    out.area = -M_PI * (deg + 0.5 * chi);
    return out;
  }
  double t = k.cube();
  if (t == k3_area_free) {
    if (deg != -chi)
      throw Error(ErrorCode::SpecialKDegreeMismatch, "k^3 = 1/48 requires deg = -chi");
    out.period = 2.0 * M_PI / 3.0;
    out.area = nan_v();
    out.area_free = true;
    return out;
  }
  out.period = 96.0 * M_PI * t / lin_96(t);
  // -pi (chi+deg)/(2 (1 - 1/48t)) - pi deg/(2 + 1/48t), cleared of the
  // inner divisions so the threshold zeros stay sign-exact.
  out.area = -M_PI * 48.0 * t * degree_form(deg, chi, t) / (2.0 * lin_48(t) * lin_96(t));
  return out;
}

AdmissibleVerdict is_admissible(const FillTuple& t, const BaseSurface& base) {
  if (t.chi != base.chi())
    throw Error(ErrorCode::InconsistentTuple, "chi does not match 2 - 2*genus");

  AdmissibleVerdict v;
  v.decoupled_only = (base.genus == 0);

  if (!(t.period_p > 0.0)) add_violation(v, "C1");
  if (!(t.area_a > 0.0)) add_violation(v, "C1");

  const bool special = !t.k.is_infinite() && t.k.cube() == k3_area_free;
  const double chi = t.chi;

  if (special) {
    v.branch = AdmissibleBranch::SpecialK48;
    v.canonical_period = 2.0 * M_PI / 3.0;
    v.canonical_area = nan_v();
    v.area_free = true;
    if (t.deg != -t.chi) add_violation(v, "degree-range");
    if (!near_rel(t.period_p, v.canonical_period, kMatchRelTol)) add_violation(v, "period-mismatch");
    if (base.genus == 0 && !(t.area_a > M_PI * chi / 3.0)) add_violation(v, "C2");
  } else {
    v.branch = t.k.is_infinite() ? AdmissibleBranch::ASD : AdmissibleBranch::GenericK;
    if (t.deg == -t.chi) add_violation(v, "degree-range");

    // Which k-window are we in?
    bool big = t.k.is_infinite();
    bool mid = false;
    bool small_band = false;
    if (!t.k.is_infinite()) {
      double t3 = t.k.cube();
      big = t3 > k3_area_free || t3 < k3_period_pole;
      mid = base.genus >= 1 ? (t3 > k3_positive_min && t3 < k3_area_free)
                            : (t3 >= k3_positive_min && t3 < k3_area_free);
      small_band = base.genus == 0 && t3 > 0.0 && t3 < k3_positive_min;
      flag_if_near(v, t3, k3_area_free);
      flag_if_near(v, t3, k3_positive_min);
      flag_if_near(v, t3, k3_period_pole);
    }
    if (!(big || mid || small_band)) add_violation(v, "k-range");

    if (t.k.is_infinite()) {
      // Limit of the bound is -chi/2 for genus >= 1, -chi for genus 0.
      bool ok = base.genus >= 1 ? 2 * t.deg + t.chi < 0 : t.deg < -t.chi;
      if (!ok) add_violation(v, "degree-range");
    } else {
      double t3 = t.k.cube();
      double L = degree_form(t.deg, t.chi, t3);
      flag_if_near(v, L / std::max(1.0, std::fabs(96.0 * t.chi + 192.0 * t.deg)), 0.0);
      bool below = degree_below_bound(t.deg, t.chi, t3);
      if (base.genus >= 1) {
        if (big && !below) add_violation(v, "degree-range");
        if (mid && below) add_violation(v, "degree-range");
        if (mid && L == 0.0) add_violation(v, "degree-range");
      } else {
        if (big && !(t.deg < -chi)) add_violation(v, "degree-range");
        if (mid && !(t.deg > -chi)) add_violation(v, "degree-range");
        if (small_band && !(t.deg > -chi && below)) add_violation(v, "degree-range");
      }
    }

    PeriodArea can = canonical_period_area(t.deg, t.chi, t.k);
    v.canonical_period = can.period;
    v.canonical_area = can.area;
    if (!near_rel(t.period_p, can.period, kMatchRelTol)) add_violation(v, "period-mismatch");
    if (!near_rel(t.area_a, can.area, kMatchRelTol)) add_violation(v, "area-mismatch");
  }

  v.admissible = v.violated_conditions.empty();
  return v;
}

AdmissibleVerdict nut_admissible(const ExtendedK& k) {
  AdmissibleVerdict v;
  v.branch = AdmissibleBranch::Nut;
  bool in_range = k.is_infinite() || k.cube() < k3_period_pole || k.cube() > 0.0;
  if (!k.is_infinite()) {
    flag_if_near(v, k.cube(), k3_period_pole);
    flag_if_near(v, k.cube(), 0.0);
  }
  if (!in_range) {
    add_violation(v, "k-range");
    v.admissible = false;
    return v;
  }
  double beta = k.is_infinite() ? 1.0 : 96.0 * k.cube() / lin_96(k.cube());
  v.beta = beta;
  v.canonical_period = 2.0 * M_PI * beta;
  v.canonical_area = M_PI * beta;
  v.admissible = true;
  return v;
}

bool KInterval::contains_cube(double t3) const {
  if (t3 < lo_cube || (t3 == lo_cube && !lo_closed)) return false;
  if (t3 > hi_cube || (t3 == hi_cube && !hi_closed)) return false;
  return true;
}

bool KInterval::contains(const ExtendedK& k) const { return contains_cube(k.cube()); }

std::vector<KInterval> k_range_for(int deg, int chi, int genus) {
  if (genus < 0) throw Error(ErrorCode::InconsistentTuple, "genus must be nonnegative");
  if (chi != 2 - 2 * genus)
    throw Error(ErrorCode::InconsistentTuple, "chi does not match 2 - 2*genus");

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<KInterval> out;

  if (deg == -chi) {
    out.push_back({k3_area_free, k3_area_free, true, true});
    return out;
  }

  if (genus == 0) {
    if (deg < -chi) {
      out.push_back({-inf, k3_period_pole, true, false});
      out.push_back({k3_area_free, inf, false, true});
    } else {  // deg > -chi
      double lo = 0.0;
      if (deg > chi) lo = degree_bound_inverse(deg, chi);  // band narrows once deg exceeds chi
      out.push_back({lo, k3_area_free, false, false});
    }
    return out;
  }

  // genus >= 1
  const double half_line = -0.5 * chi;  // degree bound at k = +-inf
  if (chi == 0) {
    if (deg < 0) {
      out.push_back({-inf, k3_period_pole, true, false});
      out.push_back({k3_area_free, inf, false, true});
    } else if (deg > 0) {
      out.push_back({k3_positive_min, k3_area_free, false, false});
    }
    return out;
  }

  // chi < 0: the degree bound is strictly decreasing in k^3 on each window.
  // Negative window [-inf, -1/96): bound runs from -chi/2 down to 0.
  if (deg < half_line) {
    if (deg <= 0) {
      out.push_back({-inf, k3_period_pole, true, false});
    } else {
      out.push_back({-inf, degree_bound_inverse(deg, chi), true, false});
    }
  }
  // Positive large window (1/48, +inf]: bound runs from -chi down to -chi/2.
  if (deg < half_line) {
    out.push_back({k3_area_free, inf, false, true});
  } else if (2 * deg + chi == 0) {
    out.push_back({k3_area_free, inf, false, false});
  } else if (deg < -chi) {
    out.push_back({k3_area_free, degree_bound_inverse(deg, chi), false, false});
  }
  // Middle window (1/192, 1/48): bound runs from +inf down to -chi.
  if (deg > -chi) {
    out.push_back({degree_bound_inverse(deg, chi), k3_area_free, false, false});
  }
  return out;
}

}  // namespace ckpe
