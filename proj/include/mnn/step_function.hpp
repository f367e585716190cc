#pragma once

#include <span>
#include <vector>

namespace mnn {

/// Right-continuous step function: `initial` before the first time, then
/// values[i] on [times[i], times[i+1]). Values may be +inf (absorbing).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(double initial, std::vector<double> times, std::vector<double> values);

  /// Cumulative sums of `jumps` starting from zero.
  static StepFunction from_jumps(std::vector<double> times, std::span<const double> jumps);

  double operator()(double t) const noexcept;

  double initial() const noexcept { return initial_; }
  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> values() const noexcept { return values_; }
  bool empty() const noexcept { return times_.empty(); }

  bool is_nondecreasing() const noexcept;
  bool is_nonincreasing() const noexcept;

  bool operator==(const StepFunction&) const = default;

 private:
  double initial_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

}  // namespace mnn
