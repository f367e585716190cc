#pragma once

// Time-localized basis sets over a knot grid.
//
// Piecewise-constant: K indicator functions, one per interval.
// Piecewise-linear: K + 1 hat functions, one per knot, with half-hats at the
// ends; they sum to one on the grid.
//
// Outside the grid every set extrapolates by a constant: below the first knot
// the first function holds 1, beyond the last knot the last function holds 1.
// Cumulative hazards therefore grow without bound and every quantile exists.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mnn {

enum class BasisKind { PiecewiseConstant, PiecewiseLinear };

const char* basis_kind_name(BasisKind kind) noexcept;
BasisKind parse_basis_kind(const std::string& name);

/// Strictly increasing knots starting at or after 0.
class KnotGrid {
 public:
  explicit KnotGrid(std::vector<double> knots);

  std::span<const double> knots() const noexcept { return knots_; }
  std::size_t size() const noexcept { return knots_.size(); }
  double front() const noexcept { return knots_.front(); }
  double back() const noexcept { return knots_.back(); }

  /// Index i of the interval [k_i, k_{i+1}) holding t, clamped to the grid:
  /// 0 below the grid, size() - 2 at or beyond the last interval's start.
  std::size_t interval(double t) const noexcept;

  bool operator==(const KnotGrid&) const = default;

 private:
  std::vector<double> knots_;
};

/// At most two functions are nonzero at any t.
struct SparseBasisValues {
  std::size_t first = 0;
  double value[2] = {0.0, 0.0};
  std::size_t count = 0;
};

class BasisSet {
 public:
  BasisSet(KnotGrid grid, BasisKind kind);

  const KnotGrid& grid() const noexcept { return grid_; }
  BasisKind kind() const noexcept { return kind_; }
  std::size_t size() const noexcept;

  SparseBasisValues evaluate_sparse(double t) const;
  std::vector<double> evaluate(double t) const;
  /// Right derivative of each function at t.
  std::vector<double> derivative(double t) const;
  /// Closed-form int_0^t nu_k(u) du for every k.
  std::vector<double> integrate(double t) const;

  /// Smallest t with sum_k weights_k * int_0^t nu_k = target.
  /// Throws ErrorKind::Domain when the target exceeds what the weights reach.
  double inverse_weighted_integral(std::span<const double> weights, double target) const;

  bool operator==(const BasisSet&) const = default;

 private:
  KnotGrid grid_;
  BasisKind kind_;
};

/// Knots every `spacing` units on [start, end].
std::vector<double> uniform_knots(double start, double end, double spacing);

}  // namespace mnn
