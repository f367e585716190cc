#pragma once

// The three model families. Each binds the network psi(x) to one basis set per
// event type through the positivity map, in the "h inside the sum" form:
//
//   PH:  lambda_j(t,x) = lambda0_j(t) * sum_k h(psi_kj(x)) nu_k(t)
//   QR:  Q_j(tau,x)    = sum_k h(psi_kj(x)) int_0^{-log tau} nu_k(u) du
//   DH:  lambda_j(t,x) = sum_k h(psi_kj(x)) nu_k(t)
//
// Network outputs are laid out event by event: event j owns the K_j outputs
// starting at output_offset(j).

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mnn/basis.hpp"
#include "mnn/data.hpp"
#include "mnn/network.hpp"
#include "mnn/positivity.hpp"
#include "mnn/step_function.hpp"

namespace mnn {

enum class ModelKind { Ph, Qr, Dh };

const char* model_kind_name(ModelKind kind) noexcept;
ModelKind parse_model_kind(const std::string& name);

struct MnnCore {
  NetworkParams net;
  std::vector<BasisSet> bases;  // one per event type
  PositivityMap h;

  int event_count() const noexcept { return static_cast<int>(bases.size()); }
  std::size_t output_offset(int event) const;
  /// Throws ErrorKind::Config when output_count != sum_j K_j.
  void validate() const;
};

/// c_kj = h(psi_kj(x)), grouped by event.
using Coefficients = std::vector<std::vector<double>>;

Coefficients coefficients_from_outputs(const MnnCore& core, std::span<const double> outputs);
Coefficients coefficients(const MnnCore& core, const Covariates& x);

// Closed-form pieces shared by the models and the objectives.
double weighted_basis_value(const BasisSet& basis, std::span<const double> c, double t);
double weighted_basis_integral(const BasisSet& basis, std::span<const double> c, double t);

/// Baseline cumulative hazard of one event type, with per-basis prefix sums
/// so that Lambda_j(t,x) = sum_k c_k A_k(t) costs one binary search.
class PhBaseline {
 public:
  PhBaseline() = default;
  /// `jumps` may end in +inf (absorbing terminal event).
  PhBaseline(const BasisSet& basis, std::vector<double> times, std::vector<double> jumps);

  std::span<const double> times() const noexcept { return times_; }
  std::span<const double> jumps() const noexcept { return jumps_; }
  const StepFunction& cumulative() const noexcept { return cumulative_; }
  std::optional<double> terminal_time() const noexcept { return terminal_; }

  /// Fast path: prefix sums per basis function.
  double cumulative_hazard(std::span<const double> c, double t) const;
  /// Reference path: direct Stieltjes sum of jumps times omega(s, x).
  double cumulative_hazard_direct(const BasisSet& basis, std::span<const double> c, double t) const;

  bool operator==(const PhBaseline& o) const { return times_ == o.times_ && jumps_ == o.jumps_; }

 private:
  std::vector<double> times_;
  std::vector<double> jumps_;
  StepFunction cumulative_;
  std::size_t basis_size_ = 0;
  std::vector<double> prefix_;  // times_.size() x basis_size_
  std::optional<double> terminal_;
};

struct PhModel {
  MnnCore core;
  std::vector<PhBaseline> baseline;  // empty until estimated
};

struct QrModel {
  MnnCore core;
};

struct DhModel {
  MnnCore core;
};

using MnnModel = std::variant<PhModel, QrModel, DhModel>;

ModelKind kind_of(const MnnModel& model) noexcept;
const MnnCore& core_of(const MnnModel& model) noexcept;
MnnCore& core_of(MnnModel& model) noexcept;

// --- PH --------------------------------------------------------------------
std::vector<double> ph_hazard_ratio(const PhModel& model, const Covariates& x, double t);
std::vector<double> ph_hazard_ratio(const PhModel& model, const Covariates& x, double t,
                                    Mode mode, Rng& rng);
std::vector<double> ph_cumulative_hazard(const PhModel& model, const Covariates& x, double t);

// --- QR --------------------------------------------------------------------
double qr_quantile(const QrModel& model, const Covariates& x, double tau, int event);
double qr_cumulative_hazard(const QrModel& model, const Covariates& x, double t, int event);
double qr_hazard(const QrModel& model, const Covariates& x, double t, int event);

/// Coefficient-level QR inversion: u* with sum_k c_k int_0^u* nu_k = t.
double qr_cumulative_hazard_from(const BasisSet& basis, std::span<const double> c, double t);
/// 1 / (dQ/du) at u*, using the right derivative at knots.
double qr_hazard_from(const BasisSet& basis, std::span<const double> c, double t);

// --- DH --------------------------------------------------------------------
std::vector<double> dh_hazard(const DhModel& model, const Covariates& x, double t);
std::vector<double> dh_cumulative_hazard(const DhModel& model, const Covariates& x, double t);

// --- any model -------------------------------------------------------------
/// Per-event cumulative hazards at t from precomputed coefficients.
std::vector<double> cumulative_hazards_from(const MnnModel& model, const Coefficients& c, double t);
std::vector<double> cumulative_hazards(const MnnModel& model, const Covariates& x, double t);

double survival(const MnnModel& model, const Covariates& x, double t);
/// S(t,x) on every entry of `times`, sharing one network evaluation.
std::vector<double> survival_curve(const MnnModel& model, const Covariates& x,
                                   std::span<const double> times);

}  // namespace mnn
