#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/roots.hpp>

#include "mnn/error.hpp"
#include "mnn/estimation.hpp"

namespace mnn {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Jump -log(alpha) for the tied events `omega` at one time, where alpha solves
//   sum_i omega_i / (1 - alpha^omega_i) = risk.
// One event reduces to -log(1 - omega / risk) / omega.
double tied_jump(std::span<const double> omega, double risk) {
  if (omega.size() == 1) return -std::log1p(-omega[0] / risk) / omega[0];

  auto excess = [&](double beta) {
    double s = 0.0;
    for (double w : omega) s += w / -std::expm1(-beta * w);
    return s - risk;
  };
  double hi = 1e-3;
  while (excess(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) return kInf;
  }
  double lo = hi / 2.0;
  while (excess(lo) <= 0.0) lo /= 2.0;
  std::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      excess, lo, hi, boost::math::tools::eps_tolerance<double>(52), max_iter);
  return 0.5 * (a + b);
}

}  // namespace

std::vector<PhBaseline> kalbfleisch_prentice_baseline(const PhModel& model, const Dataset& data) {
  const MnnCore& core = model.core;
  if (data.empty()) fail(ErrorKind::Estimation, "baseline estimation needs data");

  std::vector<Coefficients> coef;
  coef.reserve(data.size());
  for (const auto& r : data) coef.push_back(coefficients(core, r.x));

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return data[a].time > data[b].time; });

  std::vector<PhBaseline> out;
  for (int j = 0; j < core.event_count(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const BasisSet& basis = core.bases[ju];
    std::vector<double> suffix(basis.size(), 0.0);
    std::size_t at_risk = 0;
    std::vector<double> times;
    std::vector<double> jumps;
    std::vector<double> omega;

    for (std::size_t g = 0; g < order.size();) {
      const double t = data[order[g]].time;
      std::size_t end = g;
      while (end < order.size() && data[order[end]].time == t) {
        const auto& c = coef[order[end]][ju];
        for (std::size_t k = 0; k < c.size(); ++k) suffix[k] += c[k];
        ++end;
      }
      at_risk += end - g;
      omega.clear();
      for (std::size_t q = g; q < end; ++q) {
        const auto& r = data[order[q]];
        if (r.event && r.event_type == j) omega.push_back(weighted_basis_value(basis, coef[order[q]][ju], t));
      }
      if (!omega.empty()) {
        const auto nu = basis.evaluate_sparse(t);
        double risk = 0.0;
        for (std::size_t i = 0; i < nu.count; ++i) risk += suffix[nu.first + i] * nu.value[i];
        times.push_back(t);
        jumps.push_back(omega.size() == at_risk ? kInf : tied_jump(omega, risk));
      }
      g = end;
    }
    std::reverse(times.begin(), times.end());
    std::reverse(jumps.begin(), jumps.end());
    out.emplace_back(basis, std::move(times), std::move(jumps));
  }
  return out;
}

}  // namespace mnn
