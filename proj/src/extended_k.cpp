#include "ckpe/extended_k.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace ckpe {

const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ZeroK: return "ZeroK";
    case ErrorCode::KIsMinusCubeRoot96: return "KIsMinusCubeRoot96";
    case ErrorCode::SpecialKDegreeMismatch: return "SpecialKDegreeMismatch";
    case ErrorCode::InconsistentTuple: return "InconsistentTuple";
    case ErrorCode::NonAdmissible: return "NonAdmissible";
    case ErrorCode::NotNutAdmissible: return "NotNutAdmissible";
    case ErrorCode::NutDegenerate: return "NutDegenerate";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::NonAdmissibleTuple: return "NonAdmissibleTuple";
    case ErrorCode::NormalizationFailed: return "NormalizationFailed";
    case ErrorCode::NonPositiveW: return "NonPositiveW";
    case ErrorCode::MeanMismatch: return "MeanMismatch";
    case ErrorCode::PatchTooCloseToBoundary: return "PatchTooCloseToBoundary";
    case ErrorCode::InfiniteK: return "InfiniteK";
    case ErrorCode::BadConfig: return "BadConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "UnknownError";
}

ExtendedK ExtendedK::finite(double k) {
  if (!std::isfinite(k)) throw Error(ErrorCode::NonFiniteInput, "finite k expected");
  return from_cube(k * k * k);
}

ExtendedK ExtendedK::from_cube(double k3) {
  if (!std::isfinite(k3)) throw Error(ErrorCode::NonFiniteInput, "finite k^3 expected");
  if (k3 == 0.0) throw Error(ErrorCode::ZeroK, "k must be nonzero");
  if (k3 == k3_period_pole)
    throw Error(ErrorCode::KIsMinusCubeRoot96, "96 k^3 + 1 vanishes; no admissible period");
  ExtendedK k;
  k.k3_ = k3;
  return k;
}

ExtendedK ExtendedK::infinite(int sign) {
  ExtendedK k;
  k.infinite_ = true;
  k.inf_sign_ = sign >= 0 ? +1 : -1;
  return k;
}

int ExtendedK::sign() const {
  if (infinite_) return inf_sign_;
  return k3_ > 0.0 ? +1 : -1;
}

double ExtendedK::value() const {
  if (infinite_) return inf_sign_ * std::numeric_limits<double>::infinity();
  return std::cbrt(k3_);
}

double ExtendedK::cube() const {
  if (infinite_) return inf_sign_ * std::numeric_limits<double>::infinity();
  return k3_;
}

ExtendedK ExtendedK::parse(const std::string& token) {
  std::string s = token;
  int sgn = +1;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    if (s[0] == '-') sgn = -1;
    s = s.substr(1);
  }
  if (s == "inf" || s == "Inf" || s == "INF") return infinite(sgn);
  if (s == "1/cbrt48") return from_cube(sgn / 48.0);
  if (s == "1/cbrt96") return from_cube(sgn / 96.0);
  if (s == "1/cbrt192") return from_cube(sgn / 192.0);
  char* end = nullptr;
  double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw Error(ErrorCode::BadConfig, "cannot parse k token '" + token + "'");
  return finite(v);
}

std::string ExtendedK::str() const {
  if (infinite_) return inf_sign_ > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << value();
  return os.str();
}

bool ExtendedK::operator==(const ExtendedK& o) const {
  if (infinite_ != o.infinite_) return false;
  if (infinite_) return inf_sign_ == o.inf_sign_;
  return k3_ == o.k3_;
}

}  // namespace ckpe
