#include <algorithm>
#include <numeric>

#include "mnn/error.hpp"
#include "mnn/estimation.hpp"

namespace mnn {

StepFunction kaplan_meier(const Dataset& data, std::optional<int> event_type) {
  if (data.empty()) fail(ErrorKind::Estimation, "Kaplan-Meier needs at least one record");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data[a].time < data[b].time; });

  std::vector<double> times;
  std::vector<double> values;
  double s = 1.0;
  std::size_t at_risk = data.size();
  for (std::size_t g = 0; g < order.size();) {
    const double t = data[order[g]].time;
    std::size_t deaths = 0;
    std::size_t end = g;
    for (; end < order.size() && data[order[end]].time == t; ++end) {
      const auto& r = data[order[end]];
      if (r.event && (!event_type || r.event_type == *event_type)) ++deaths;
    }
    if (deaths > 0) {
      s *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
      times.push_back(t);
      values.push_back(s);
    }
    at_risk -= end - g;
    g = end;
  }
  return StepFunction(1.0, std::move(times), std::move(values));
}

}  // namespace mnn
