#pragma once

// Two-covariate, two-risk benchmark with time-switching covariate effects:
//
//   lambda_1 = 0.03 (1 + 0.5 cos(2 pi t / 10)) exp(atan(2 x0) [t < 5] + atan(2 x1) [t > 5])
//   lambda_2 = 0.03 (1 + 0.5 sin(2 pi t / 10)) exp(sin(x1) [t < 5] + sin(x0) [t > 5])
//
// with x0, x1 independent standard normal. At t = 5 both indicators are false.

#include <array>
#include <cstdint>
#include <span>

#include "mnn/data.hpp"
#include "mnn/network.hpp"

namespace mnn::synthetic {

struct SyntheticSpec {
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  double horizon = 10.0;
  bool uniform_censoring = false;  // extra independent U[0, horizon] censoring

  void validate() const;
};

inline constexpr int kEventTypes = 2;

/// Dominating rate used for thinning, per risk: 0.045 e^{pi/2}.
double hazard_bound() noexcept;

std::array<double, 2> true_hazards(double t, double x0, double x1) noexcept;

/// Per-risk cumulative hazards int_0^t lambda_j, by adaptive quadrature.
std::array<double, 2> true_cumulative_hazards(double t, double x0, double x1);

double true_survival(double t, double x0, double x1);
double true_survival(double t, const Covariates& x);

/// True S on every grid time (increasing), integrating interval by interval.
std::vector<double> true_survival_curve(const Covariates& x, std::span<const double> times);

/// One subject's event by thinning; `horizon` is the administrative cutoff.
SurvivalRecord sample_subject(double x0, double x1, double horizon, Rng& rng);

Dataset sample_dataset(const SyntheticSpec& spec);

}  // namespace mnn::synthetic
