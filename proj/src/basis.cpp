#include "mnn/basis.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mnn/error.hpp"

namespace mnn {

const char* basis_kind_name(BasisKind kind) noexcept {
  return kind == BasisKind::PiecewiseConstant ? "constant" : "linear";
}

BasisKind parse_basis_kind(const std::string& name) {
  if (name == "constant" || name == "piecewise-constant") return BasisKind::PiecewiseConstant;
  if (name == "linear" || name == "piecewise-linear") return BasisKind::PiecewiseLinear;
  fail(ErrorKind::Config, "unknown basis kind '" + name + "'");
}

KnotGrid::KnotGrid(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) fail(ErrorKind::Config, "knot grid needs at least two knots");
  if (!(knots_.front() >= 0.0)) fail(ErrorKind::Config, "first knot must be >= 0");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || !(knots_[i] > knots_[i - 1])) {
      fail(ErrorKind::Config, "knots must be finite and strictly increasing");
    }
  }
}

std::size_t KnotGrid::interval(double t) const noexcept {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return 0;
  const auto idx = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return std::min(idx, knots_.size() - 2);
}

BasisSet::BasisSet(KnotGrid grid, BasisKind kind) : grid_(std::move(grid)), kind_(kind) {}

std::size_t BasisSet::size() const noexcept {
  return kind_ == BasisKind::PiecewiseConstant ? grid_.size() - 1 : grid_.size();
}

SparseBasisValues BasisSet::evaluate_sparse(double t) const {
  if (!(t >= 0.0)) fail(ErrorKind::Usage, fmt::format("basis evaluated at negative time {}", t));
  SparseBasisValues out;
  const auto knots = grid_.knots();
  const std::size_t last_knot = knots.size() - 1;
  if (kind_ == BasisKind::PiecewiseConstant) {
    out.first = grid_.interval(t);
    out.value[0] = 1.0;
    out.count = 1;
    return out;
  }
  if (t < knots.front()) {
    out.first = 0;
    out.value[0] = 1.0;
    out.count = 1;
    return out;
  }
  if (t >= knots.back()) {
    out.first = last_knot;
    out.value[0] = 1.0;
    out.count = 1;
    return out;
  }
  const std::size_t i = grid_.interval(t);
  const double h = knots[i + 1] - knots[i];
  const double right = (t - knots[i]) / h;
  out.first = i;
  out.value[0] = 1.0 - right;
  out.value[1] = right;
  out.count = 2;
  return out;
}

std::vector<double> BasisSet::evaluate(double t) const {
  std::vector<double> values(size(), 0.0);
  const auto s = evaluate_sparse(t);
  for (std::size_t c = 0; c < s.count; ++c) values[s.first + c] = s.value[c];
  return values;
}

std::vector<double> BasisSet::derivative(double t) const {
  if (!(t >= 0.0)) fail(ErrorKind::Usage, "basis derivative at negative time");
  std::vector<double> d(size(), 0.0);
  const auto knots = grid_.knots();
  if (kind_ == BasisKind::PiecewiseLinear && t >= knots.front() && t < knots.back()) {
    const std::size_t i = grid_.interval(t);
    const double h = knots[i + 1] - knots[i];
    d[i] = -1.0 / h;
    d[i + 1] = 1.0 / h;
  }
  return d;
}

std::vector<double> BasisSet::integrate(double t) const {
  if (!(t >= 0.0)) fail(ErrorKind::Usage, fmt::format("basis integrated to negative time {}", t));
  std::vector<double> out(size(), 0.0);
  const auto knots = grid_.knots();
  const std::size_t intervals = knots.size() - 1;

  // Region below the grid accrues to the first function.
  out[0] += std::min(t, knots.front());
  for (std::size_t i = 0; i < intervals && t > knots[i]; ++i) {
    const double h = knots[i + 1] - knots[i];
    const double s = std::min(t, knots[i + 1]) - knots[i];
    if (kind_ == BasisKind::PiecewiseConstant) {
      out[i] += s;
    } else {
      const double tri = s * s / (2.0 * h);
      out[i] += s - tri;
      out[i + 1] += tri;
    }
  }
  if (t > knots.back()) out.back() += t - knots.back();
  return out;
}

double BasisSet::inverse_weighted_integral(std::span<const double> weights, double target) const {
  if (weights.size() != size()) fail(ErrorKind::Usage, "weight count does not match basis size");
  for (double w : weights) {
    if (!(w >= 0.0)) fail(ErrorKind::Usage, "weights must be nonnegative");
  }
  if (!(target >= 0.0)) fail(ErrorKind::Usage, "target must be nonnegative");
  if (target == 0.0) return 0.0;

  const auto knots = grid_.knots();
  double acc = 0.0;

  // Constant-rate segment [start, start + length).
  auto linear_segment = [&](double start, double length, double rate, double& result) {
    const double mass = rate * length;
    if (target <= acc + mass) {
      result = rate > 0.0 ? start + std::min(length, (target - acc) / rate) : start;
      return true;
    }
    acc += mass;
    return false;
  };

  double result = 0.0;
  if (knots.front() > 0.0 && linear_segment(0.0, knots.front(), weights[0], result)) return result;

  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double h = knots[i + 1] - knots[i];
    if (kind_ == BasisKind::PiecewiseConstant) {
      if (linear_segment(knots[i], h, weights[i], result)) return result;
      continue;
    }
    // Rate runs linearly from a at knots[i] to b at knots[i+1].
    const double a = weights[i];
    const double b = weights[i + 1];
    const double mass = 0.5 * (a + b) * h;
    if (target <= acc + mass) {
      const double y = target - acc;
      if (y <= 0.0) return knots[i];
      const double c2 = (b - a) / (2.0 * h);
      const double disc = std::max(0.0, a * a + 4.0 * c2 * y);
      const double s = 2.0 * y / (a + std::sqrt(disc));
      return knots[i] + std::clamp(s, 0.0, h);
    }
    acc += mass;
  }

  const double tail = weights.back();
  if (tail > 0.0) return knots.back() + (target - acc) / tail;
  fail(ErrorKind::Domain,
       fmt::format("target {} unreachable; weighted integral is bounded by {}", target, acc));
}

std::vector<double> uniform_knots(double start, double end, double spacing) {
  if (!(spacing > 0.0) || !(end > start)) fail(ErrorKind::Config, "invalid uniform knot range");
  std::vector<double> knots;
  const auto steps = static_cast<long>(std::llround((end - start) / spacing));
  for (long i = 0; i <= steps; ++i) knots.push_back(start + spacing * static_cast<double>(i));
  return knots;
}

}  // namespace mnn
