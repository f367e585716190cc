#pragma once

#include <cstddef>
#include <vector>

namespace mnn {

/// Covariates of one subject, split the way the network consumes them.
struct Covariates {
  std::vector<double> numeric;
  std::vector<double> boolean;  // 0 or 1
  std::vector<int> categorical;  // dense level indices

  bool operator==(const Covariates&) const = default;
};

/// One observed subject. `event_type` is 0-based and only meaningful when
/// `event` is true.
struct SurvivalRecord {
  Covariates x;
  double time = 0.0;
  int event_type = 0;
  bool event = false;

  bool operator==(const SurvivalRecord&) const = default;
};

using Dataset = std::vector<SurvivalRecord>;

std::size_t count_events(const Dataset& data) noexcept;

}  // namespace mnn
