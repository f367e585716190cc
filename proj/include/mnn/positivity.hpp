#pragma once

#include <string>

namespace mnn {

enum class PositivityKind { Exp, Softplus };

/// Strictly positive, nondecreasing map h(y) applied to network outputs.
/// exp clamps its input to [-30, 30]; the derivative is zero outside.
struct PositivityMap {
  PositivityKind kind = PositivityKind::Exp;

  double value(double y) const noexcept;
  double derivative(double y) const noexcept;

  bool operator==(const PositivityMap&) const = default;
};

inline constexpr double kExpClamp = 30.0;

const char* positivity_name(PositivityKind kind) noexcept;
PositivityKind parse_positivity(const std::string& name);

}  // namespace mnn
