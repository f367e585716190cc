#include "mnn/step_function.hpp"

#include <algorithm>

#include "mnn/error.hpp"

namespace mnn {

StepFunction::StepFunction(double initial, std::vector<double> times, std::vector<double> values)
    : initial_(initial), times_(std::move(times)), values_(std::move(values)) {
  if (times_.size() != values_.size()) fail(ErrorKind::Usage, "step function size mismatch");
  for (std::size_t i = 1; i < times_.size(); ++i) {
    if (!(times_[i] > times_[i - 1])) fail(ErrorKind::Usage, "step times must be increasing");
  }
}

StepFunction StepFunction::from_jumps(std::vector<double> times, std::span<const double> jumps) {
  std::vector<double> values(jumps.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < jumps.size(); ++i) {
    acc += jumps[i];
    values[i] = acc;
  }
  return StepFunction(0.0, std::move(times), std::move(values));
}

double StepFunction::operator()(double t) const noexcept {
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

bool StepFunction::is_nondecreasing() const noexcept {
  double prev = initial_;
  for (double v : values_) {
    if (v < prev) return false;
    prev = v;
  }
  return true;
}

bool StepFunction::is_nonincreasing() const noexcept {
  double prev = initial_;
  for (double v : values_) {
    if (v > prev) return false;
    prev = v;
  }
  return true;
}

}  // namespace mnn
