#include "mnn/positivity.hpp"

#include <algorithm>
#include <cmath>

#include "mnn/error.hpp"

namespace mnn {

double PositivityMap::value(double y) const noexcept {
  if (kind == PositivityKind::Exp) return std::exp(std::clamp(y, -kExpClamp, kExpClamp));
  // softplus, stable for large |y|
  return y > 0.0 ? y + std::log1p(std::exp(-y)) : std::log1p(std::exp(y));
}

double PositivityMap::derivative(double y) const noexcept {
  if (kind == PositivityKind::Exp) {
    if (y < -kExpClamp || y > kExpClamp) return 0.0;
    return std::exp(y);
  }
  if (y >= 0.0) return 1.0 / (1.0 + std::exp(-y));
  const double e = std::exp(y);
  return e / (1.0 + e);
}

const char* positivity_name(PositivityKind kind) noexcept {
  return kind == PositivityKind::Exp ? "exp" : "softplus";
}

PositivityKind parse_positivity(const std::string& name) {
  if (name == "exp") return PositivityKind::Exp;
  if (name == "softplus") return PositivityKind::Softplus;
  fail(ErrorKind::Config, "unknown positivity map '" + name + "'");
}

}  // namespace mnn
