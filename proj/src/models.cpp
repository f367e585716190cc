#include "mnn/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "mnn/error.hpp"

namespace mnn {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* model_kind_name(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::Ph: return "ph";
    case ModelKind::Qr: return "qr";
    case ModelKind::Dh: return "dh";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  if (name == "ph") return ModelKind::Ph;
  if (name == "qr") return ModelKind::Qr;
  if (name == "dh") return ModelKind::Dh;
  fail(ErrorKind::Config, "unknown model kind '" + name + "'");
}

std::size_t MnnCore::output_offset(int event) const {
  if (event < 0 || event >= event_count()) fail(ErrorKind::Usage, fmt::format("event {} out of range", event));
  std::size_t off = 0;
  for (int j = 0; j < event; ++j) off += bases[static_cast<std::size_t>(j)].size();
  return off;
}

void MnnCore::validate() const {
  if (bases.empty()) fail(ErrorKind::Config, "model needs at least one event type");
  std::size_t total = 0;
  for (const auto& b : bases) total += b.size();
  if (static_cast<std::size_t>(net.spec.output_count) != total) {
    fail(ErrorKind::Config, fmt::format("network output_count {} does not match total basis size {}",
                                        net.spec.output_count, total));
  }
}

Coefficients coefficients_from_outputs(const MnnCore& core, std::span<const double> outputs) {
  Coefficients c(core.bases.size());
  std::size_t off = 0;
  for (std::size_t j = 0; j < core.bases.size(); ++j) {
    const std::size_t k = core.bases[j].size();
    c[j].resize(k);
    for (std::size_t i = 0; i < k; ++i) c[j][i] = core.h.value(outputs[off + i]);
    off += k;
  }
  return c;
}

Coefficients coefficients(const MnnCore& core, const Covariates& x) {
  return coefficients_from_outputs(core, predict(core.net, x));
}

double weighted_basis_value(const BasisSet& basis, std::span<const double> c, double t) {
  const auto s = basis.evaluate_sparse(t);
  double v = 0.0;
  for (std::size_t i = 0; i < s.count; ++i) v += c[s.first + i] * s.value[i];
  return v;
}

double weighted_basis_integral(const BasisSet& basis, std::span<const double> c, double t) {
  const auto integrals = basis.integrate(t);
  double v = 0.0;
  for (std::size_t k = 0; k < integrals.size(); ++k) v += c[k] * integrals[k];
  return v;
}

// --- PhBaseline -------------------------------------------------------------

PhBaseline::PhBaseline(const BasisSet& basis, std::vector<double> times, std::vector<double> jumps)
    : times_(std::move(times)), jumps_(std::move(jumps)), basis_size_(basis.size()) {
  if (times_.size() != jumps_.size()) fail(ErrorKind::Usage, "baseline size mismatch");
  cumulative_ = StepFunction::from_jumps(times_, jumps_);
  prefix_.assign(times_.size() * basis_size_, 0.0);
  std::vector<double> acc(basis_size_, 0.0);
  for (std::size_t l = 0; l < times_.size(); ++l) {
    if (!(jumps_[l] >= 0.0)) fail(ErrorKind::Usage, "baseline jumps must be nonnegative");
    if (std::isinf(jumps_[l])) {
      if (!terminal_) terminal_ = times_[l];
    } else {
      const auto s = basis.evaluate_sparse(times_[l]);
      for (std::size_t i = 0; i < s.count; ++i) acc[s.first + i] += jumps_[l] * s.value[i];
    }
    std::copy(acc.begin(), acc.end(), prefix_.begin() + static_cast<std::ptrdiff_t>(l * basis_size_));
  }
}

double PhBaseline::cumulative_hazard(std::span<const double> c, double t) const {
  if (terminal_ && t >= *terminal_) return kInf;
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  if (it == times_.begin()) return 0.0;
  const auto l = static_cast<std::size_t>(it - times_.begin()) - 1;
  const double* a = prefix_.data() + l * basis_size_;
  double v = 0.0;
  for (std::size_t k = 0; k < basis_size_; ++k) v += c[k] * a[k];
  return v;
}

double PhBaseline::cumulative_hazard_direct(const BasisSet& basis, std::span<const double> c,
                                            double t) const {
  double v = 0.0;
  for (std::size_t l = 0; l < times_.size() && times_[l] <= t; ++l) {
    if (std::isinf(jumps_[l])) return kInf;
    v += jumps_[l] * weighted_basis_value(basis, c, times_[l]);
  }
  return v;
}

// --- variant helpers --------------------------------------------------------

ModelKind kind_of(const MnnModel& model) noexcept {
  switch (model.index()) {
    case 0: return ModelKind::Ph;
    case 1: return ModelKind::Qr;
    default: return ModelKind::Dh;
  }
}

const MnnCore& core_of(const MnnModel& model) noexcept {
  return std::visit([](const auto& m) -> const MnnCore& { return m.core; }, model);
}

MnnCore& core_of(MnnModel& model) noexcept {
  return std::visit([](auto& m) -> MnnCore& { return m.core; }, model);
}

// --- PH ----------------------------------------------------------------------

namespace {

std::vector<double> hazard_ratio_from(const MnnCore& core, const Coefficients& c, double t) {
  std::vector<double> omega(core.bases.size());
  for (std::size_t j = 0; j < core.bases.size(); ++j) {
    omega[j] = weighted_basis_value(core.bases[j], c[j], t);
  }
  return omega;
}

void check_time(double t) {
  if (!(t >= 0.0)) fail(ErrorKind::Usage, fmt::format("time must be >= 0, got {}", t));
}

void check_event(const MnnCore& core, int event) {
  if (event < 0 || event >= core.event_count()) {
    fail(ErrorKind::Usage, fmt::format("event {} out of range", event));
  }
}

}  // namespace

std::vector<double> ph_hazard_ratio(const PhModel& model, const Covariates& x, double t) {
  check_time(t);
  return hazard_ratio_from(model.core, coefficients(model.core, x), t);
}

std::vector<double> ph_hazard_ratio(const PhModel& model, const Covariates& x, double t, Mode mode,
                                    Rng& rng) {
  check_time(t);
  const auto out = forward(model.core.net, x, mode, rng).outputs;
  return hazard_ratio_from(model.core, coefficients_from_outputs(model.core, out), t);
}

// --- QR ----------------------------------------------------------------------

double qr_cumulative_hazard_from(const BasisSet& basis, std::span<const double> c, double t) {
  check_time(t);
  return basis.inverse_weighted_integral(c, t);
}

double qr_hazard_from(const BasisSet& basis, std::span<const double> c, double t) {
  const double u = qr_cumulative_hazard_from(basis, c, t);
  const double slope = weighted_basis_value(basis, c, u);
  return 1.0 / slope;
}

double qr_quantile(const QrModel& model, const Covariates& x, double tau, int event) {
  if (!(tau > 0.0 && tau < 1.0)) fail(ErrorKind::Usage, fmt::format("tau must lie in (0,1), got {}", tau));
  check_event(model.core, event);
  const auto c = coefficients(model.core, x);
  const auto j = static_cast<std::size_t>(event);
  return weighted_basis_integral(model.core.bases[j], c[j], -std::log(tau));
}

double qr_cumulative_hazard(const QrModel& model, const Covariates& x, double t, int event) {
  check_event(model.core, event);
  const auto c = coefficients(model.core, x);
  const auto j = static_cast<std::size_t>(event);
  return qr_cumulative_hazard_from(model.core.bases[j], c[j], t);
}

double qr_hazard(const QrModel& model, const Covariates& x, double t, int event) {
  check_event(model.core, event);
  const auto c = coefficients(model.core, x);
  const auto j = static_cast<std::size_t>(event);
  return qr_hazard_from(model.core.bases[j], c[j], t);
}

// --- DH ----------------------------------------------------------------------

std::vector<double> dh_hazard(const DhModel& model, const Covariates& x, double t) {
  check_time(t);
  return hazard_ratio_from(model.core, coefficients(model.core, x), t);
}

// --- any model ---------------------------------------------------------------

namespace {

std::vector<double> cumulative_from(const PhModel& m, const Coefficients& c, double t) {
  if (m.baseline.size() != m.core.bases.size()) {
    fail(ErrorKind::State, "PH model has no estimated baseline hazard");
  }
  std::vector<double> out(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) out[j] = m.baseline[j].cumulative_hazard(c[j], t);
  return out;
}

std::vector<double> cumulative_from(const QrModel& m, const Coefficients& c, double t) {
  std::vector<double> out(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) out[j] = qr_cumulative_hazard_from(m.core.bases[j], c[j], t);
  return out;
}

std::vector<double> cumulative_from(const DhModel& m, const Coefficients& c, double t) {
  std::vector<double> out(c.size());
  for (std::size_t j = 0; j < c.size(); ++j) out[j] = weighted_basis_integral(m.core.bases[j], c[j], t);
  return out;
}

}  // namespace

std::vector<double> ph_cumulative_hazard(const PhModel& model, const Covariates& x, double t) {
  check_time(t);
  return cumulative_from(model, coefficients(model.core, x), t);
}

std::vector<double> dh_cumulative_hazard(const DhModel& model, const Covariates& x, double t) {
  check_time(t);
  return cumulative_from(model, coefficients(model.core, x), t);
}

std::vector<double> cumulative_hazards_from(const MnnModel& model, const Coefficients& c, double t) {
  check_time(t);
  return std::visit([&](const auto& m) { return cumulative_from(m, c, t); }, model);
}

std::vector<double> cumulative_hazards(const MnnModel& model, const Covariates& x, double t) {
  return cumulative_hazards_from(model, coefficients(core_of(model), x), t);
}

double survival(const MnnModel& model, const Covariates& x, double t) {
  const double times[1] = {t};
  return survival_curve(model, x, times)[0];
}

std::vector<double> survival_curve(const MnnModel& model, const Covariates& x,
                                   std::span<const double> times) {
  const auto c = coefficients(core_of(model), x);
  std::vector<double> s(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double total = 0.0;
    for (double v : cumulative_hazards_from(model, c, times[i])) total += v;
    s[i] = std::exp(-total);
  }
  return s;
}

}  // namespace mnn
