#include "mnn/synthetic.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mnn/error.hpp"

namespace mnn::synthetic {
namespace {

constexpr double kSwitch = 5.0;
// Relative; every integral here is below 10, so the absolute error stays under 1e-9.
constexpr double kQuadTolerance = 1e-10;

// Smooth pieces never straddle the switch time.
double integrate_piece(double a, double b, int risk, double x0, double x1) {
  if (!(b > a)) return 0.0;
  auto f = [&](double t) { return true_hazards(t, x0, x1)[static_cast<std::size_t>(risk)]; };
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, kQuadTolerance);
}

double integrate_hazard(double a, double b, int risk, double x0, double x1) {
  if (a < kSwitch && b > kSwitch) {
    return integrate_piece(a, kSwitch, risk, x0, x1) + integrate_piece(kSwitch, b, risk, x0, x1);
  }
  return integrate_piece(a, b, risk, x0, x1);
}

}  // namespace

void SyntheticSpec::validate() const {
  if (!(horizon > 0.0)) fail(ErrorKind::Config, "horizon must be > 0");
}

double hazard_bound() noexcept { return 0.045 * std::exp(std::numbers::pi / 2.0); }

std::array<double, 2> true_hazards(double t, double x0, double x1) noexcept {
  const double phase = 2.0 * std::numbers::pi * t / 10.0;
  const bool early = t < kSwitch;
  const bool late = t > kSwitch;
  const double e1 = (early ? std::atan(2.0 * x0) : 0.0) + (late ? std::atan(2.0 * x1) : 0.0);
  const double e2 = (early ? std::sin(x1) : 0.0) + (late ? std::sin(x0) : 0.0);
  return {0.03 * (1.0 + 0.5 * std::cos(phase)) * std::exp(e1),
          0.03 * (1.0 + 0.5 * std::sin(phase)) * std::exp(e2)};
}

std::array<double, 2> true_cumulative_hazards(double t, double x0, double x1) {
  if (!(t >= 0.0)) fail(ErrorKind::Usage, "time must be >= 0");
  return {integrate_hazard(0.0, t, 0, x0, x1), integrate_hazard(0.0, t, 1, x0, x1)};
}

double true_survival(double t, double x0, double x1) {
  const auto h = true_cumulative_hazards(t, x0, x1);
  return std::exp(-(h[0] + h[1]));
}

double true_survival(double t, const Covariates& x) {
  if (x.numeric.size() != 2) fail(ErrorKind::Usage, "synthetic oracle expects two numeric covariates");
  return true_survival(t, x.numeric[0], x.numeric[1]);
}

std::vector<double> true_survival_curve(const Covariates& x, std::span<const double> times) {
  if (x.numeric.size() != 2) fail(ErrorKind::Usage, "synthetic oracle expects two numeric covariates");
  const double x0 = x.numeric[0];
  const double x1 = x.numeric[1];
  std::vector<double> s(times.size());
  double total = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double t = times[i];
    if (!(t >= prev)) fail(ErrorKind::Usage, "grid times must be nondecreasing and >= 0");
    total += integrate_hazard(prev, t, 0, x0, x1) + integrate_hazard(prev, t, 1, x0, x1);
    prev = t;
    s[i] = std::exp(-total);
  }
  return s;
}

SurvivalRecord sample_subject(double x0, double x1, double horizon, Rng& rng) {
  const double bound = hazard_bound();
  std::exponential_distribution<double> gap(2.0 * bound);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SurvivalRecord rec;
  rec.x.numeric = {x0, x1};
  double t = 0.0;
  while (true) {
    t += gap(rng);
    if (t > horizon) break;
    // Each risk proposes at the same rate; accept with lambda_j / bound.
    const int risk = unit(rng) < 0.5 ? 0 : 1;
    const double accept = true_hazards(t, x0, x1)[static_cast<std::size_t>(risk)] / bound;
    if (unit(rng) < accept) {
      rec.time = t;
      rec.event = true;
      rec.event_type = risk;
      return rec;
    }
  }
  rec.time = horizon;
  rec.event = false;
  rec.event_type = 0;
  return rec;
}

Dataset sample_dataset(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> censor(0.0, spec.horizon);
  Dataset data;
  data.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const double x0 = normal(rng);
    const double x1 = normal(rng);
    SurvivalRecord rec = sample_subject(x0, x1, spec.horizon, rng);
    if (spec.uniform_censoring) {
      const double c = censor(rng);
      if (c < rec.time) {
        rec.time = c;
        rec.event = false;
        rec.event_type = 0;
      }
    }
    data.push_back(std::move(rec));
  }
  return data;
}

}  // namespace mnn::synthetic
