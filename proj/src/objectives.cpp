#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "mnn/error.hpp"
#include "mnn/estimation.hpp"

namespace mnn {
namespace {

// Forward passes for a set of subjects, kept for the reverse sweep.
struct BatchEval {
  std::vector<std::size_t> rows;
  std::vector<ForwardResult> passes;
  std::vector<Coefficients> coef;
  std::vector<Coefficients> coef_grad;  // dObjective / dc, same shape as coef
};

BatchEval evaluate_batch(const MnnCore& core, const Dataset& data,
                         std::span<const std::size_t> rows, Mode mode, Rng& rng) {
  BatchEval b;
  b.rows.assign(rows.begin(), rows.end());
  b.passes.reserve(rows.size());
  b.coef.reserve(rows.size());
  b.coef_grad.reserve(rows.size());
  for (std::size_t r : rows) {
    b.passes.push_back(forward(core.net, data[r].x, mode, rng));
    b.coef.push_back(coefficients_from_outputs(core, b.passes.back().outputs));
    Coefficients zero = b.coef.back();
    for (auto& v : zero) std::fill(v.begin(), v.end(), 0.0);
    b.coef_grad.push_back(std::move(zero));
  }
  return b;
}

// Chain dObjective/dc through h and the network.
GradientBuffer backpropagate(const MnnCore& core, const BatchEval& b) {
  GradientBuffer grad(core.net.values.size());
  std::vector<double> cot(static_cast<std::size_t>(core.net.spec.output_count));
  for (std::size_t i = 0; i < b.passes.size(); ++i) {
    const auto& out = b.passes[i].outputs;
    bool any = false;
    std::size_t off = 0;
    for (const auto& g : b.coef_grad[i]) {
      for (std::size_t k = 0; k < g.size(); ++k, ++off) {
        cot[off] = g[k] * core.h.derivative(out[off]);
        any = any || cot[off] != 0.0;
      }
    }
    if (any) accumulate_gradient(core.net, b.passes[i].tape, cot, grad);
  }
  return grad;
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

void check_records(const MnnCore& core, const Dataset& data) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    if (!(r.time >= 0.0) || !std::isfinite(r.time)) {
      fail(ErrorKind::Data, fmt::format("record {} has invalid time {}", i, r.time));
    }
    if (r.event && (r.event_type < 0 || r.event_type >= core.event_count())) {
      fail(ErrorKind::Data, fmt::format("record {} has event type {} out of range", i, r.event_type));
    }
  }
}

// Full-data Cox objective through per-basis suffix sums of c over the risk set.
ObjectiveValue cox_full(const PhModel& model, const Dataset& data, bool with_gradient) {
  const MnnCore& core = model.core;
  check_records(core, data);
  const std::size_t events = count_events(data);
  if (data.empty() || events == 0) {
    fail(ErrorKind::Estimation, "partial likelihood needs at least one uncensored subject");
  }
  Rng unused(0);
  const auto rows = all_rows(data.size());
  BatchEval b = evaluate_batch(core, data, rows, Mode::Eval, unused);

  // Descending by time; ties form one group.
  std::vector<std::size_t> order = rows;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t c) { return data[a].time > data[c].time; });

  double total = 0.0;
  for (int j = 0; j < core.event_count(); ++j) {
    const auto ju = static_cast<std::size_t>(j);
    const BasisSet& basis = core.bases[ju];
    std::vector<double> suffix(basis.size(), 0.0);
    // (row, 1 / S_n) for each event of type j, in descending time order.
    std::vector<std::pair<std::size_t, double>> inv_risk;

    for (std::size_t g = 0; g < order.size();) {
      const double t = data[order[g]].time;
      std::size_t end = g;
      while (end < order.size() && data[order[end]].time == t) {
        const auto& c = b.coef[order[end]][ju];
        for (std::size_t k = 0; k < c.size(); ++k) suffix[k] += c[k];
        ++end;
      }
      const auto nu = basis.evaluate_sparse(t);
      double risk = 0.0;
      for (std::size_t i = 0; i < nu.count; ++i) risk += suffix[nu.first + i] * nu.value[i];
      for (std::size_t q = g; q < end; ++q) {
        const std::size_t n = order[q];
        if (!data[n].event || data[n].event_type != j) continue;
        const double omega = weighted_basis_value(basis, b.coef[n][ju], t);
        total += std::log(omega) - std::log(risk);
        inv_risk.emplace_back(n, 1.0 / risk);
        if (with_gradient) {
          for (std::size_t i = 0; i < nu.count; ++i) {
            b.coef_grad[n][ju][nu.first + i] += nu.value[i] / omega;
          }
        }
      }
      g = end;
    }
    if (!with_gradient) continue;

    // Ascending sweep: subject m collects -nu_k(T_n) / S_n from every event
    // n with T_n <= T_m.
    std::vector<double> prefix(basis.size(), 0.0);
    std::size_t e = inv_risk.size();
    for (std::size_t g = order.size(); g > 0;) {
      const double t = data[order[g - 1]].time;
      while (e > 0 && data[inv_risk[e - 1].first].time <= t) {
        const auto nu = basis.evaluate_sparse(data[inv_risk[e - 1].first].time);
        for (std::size_t i = 0; i < nu.count; ++i) {
          prefix[nu.first + i] += nu.value[i] * inv_risk[e - 1].second;
        }
        --e;
      }
      while (g > 0 && data[order[g - 1]].time == t) {
        auto& dc = b.coef_grad[order[g - 1]][ju];
        for (std::size_t k = 0; k < dc.size(); ++k) dc[k] -= prefix[k];
        --g;
      }
    }
  }

  const double norm = 1.0 / static_cast<double>(events);
  ObjectiveValue result;
  result.value = total * norm;
  result.terms = events;
  if (with_gradient) {
    for (auto& subject : b.coef_grad) {
      for (auto& v : subject) {
        for (double& d : v) d *= norm;
      }
    }
    result.grad = backpropagate(core, b);
  }
  return result;
}

}  // namespace

double cox_partial_loglik(const PhModel& model, const Dataset& data) {
  return cox_full(model, data, false).value;
}

ObjectiveValue cox_partial_loglik_with_gradient(const PhModel& model, const Dataset& data) {
  return cox_full(model, data, true);
}

CoxRiskIndex::CoxRiskIndex(const Dataset& data) {
  sorted_times_.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    sorted_times_.push_back(data[i].time);
    if (data[i].event) uncensored_.push_back(i);
  }
  std::sort(sorted_times_.begin(), sorted_times_.end());
}

std::size_t CoxRiskIndex::risk_set_size(double t) const noexcept {
  const auto it = std::lower_bound(sorted_times_.begin(), sorted_times_.end(), t);
  return static_cast<std::size_t>(sorted_times_.end() - it);
}

ObjectiveValue cox_minibatch_objective(const PhModel& model, const Dataset& data,
                                       const CoxRiskIndex& index,
                                       std::span<const std::size_t> general_batch,
                                       std::span<const std::size_t> event_batch, Mode mode,
                                       Rng& rng) {
  const MnnCore& core = model.core;
  BatchEval general = evaluate_batch(core, data, general_batch, mode, rng);
  BatchEval events = evaluate_batch(core, data, event_batch, mode, rng);

  ObjectiveValue result;
  double total = 0.0;
  std::vector<std::size_t> members;
  // Per event subject: (event-batch slot, 1 / S_n, members) are consumed right away.
  for (std::size_t q = 0; q < event_batch.size(); ++q) {
    const auto& rec = data[event_batch[q]];
    if (!rec.event) continue;
    const auto ju = static_cast<std::size_t>(rec.event_type);
    const BasisSet& basis = core.bases[ju];
    const double t = rec.time;
    const auto nu = basis.evaluate_sparse(t);

    members.clear();
    double risk = 0.0;
    for (std::size_t p = 0; p < general_batch.size(); ++p) {
      if (data[general_batch[p]].time < t) continue;
      members.push_back(p);
      const auto& c = general.coef[p][ju];
      for (std::size_t i = 0; i < nu.count; ++i) risk += c[nu.first + i] * nu.value[i];
    }
    if (members.empty()) {
      ++result.skipped_terms;
      continue;
    }
    const double omega = weighted_basis_value(basis, events.coef[q][ju], t);
    const double scale =
        static_cast<double>(index.risk_set_size(t)) / static_cast<double>(members.size());
    total += std::log(omega) - std::log(scale * risk);
    ++result.terms;

    for (std::size_t i = 0; i < nu.count; ++i) {
      events.coef_grad[q][ju][nu.first + i] += nu.value[i] / omega;
      for (std::size_t p : members) general.coef_grad[p][ju][nu.first + i] -= nu.value[i] / risk;
    }
  }

  if (result.terms == 0) {
    result.grad = GradientBuffer(core.net.values.size());
    return result;
  }
  const double norm = 1.0 / static_cast<double>(result.terms);
  result.value = total * norm;
  for (BatchEval* b : {&general, &events}) {
    for (auto& subject : b->coef_grad) {
      for (auto& v : subject) {
        for (double& d : v) d *= norm;
      }
    }
  }
  result.grad = backpropagate(core, general);
  result.grad += backpropagate(core, events);
  return result;
}

// --- full likelihood -----------------------------------------------------------

namespace {

ObjectiveValue full_loglik_impl(const MnnModel& model, const Dataset& data,
                                std::span<const std::size_t> batch, Mode mode, Rng& rng,
                                bool with_gradient) {
  const ModelKind kind = kind_of(model);
  if (kind == ModelKind::Ph) {
    fail(ErrorKind::Usage, "full likelihood applies to QR and DH models; use the partial likelihood for PH");
  }
  if (batch.empty()) fail(ErrorKind::Estimation, "full likelihood needs at least one record");
  const MnnCore& core = core_of(model);
  check_records(core, data);
  BatchEval b = evaluate_batch(core, data, batch, mode, rng);

  double total = 0.0;
  for (std::size_t q = 0; q < batch.size(); ++q) {
    const auto& rec = data[batch[q]];
    const double t = rec.time;
    for (int j = 0; j < core.event_count(); ++j) {
      const auto ju = static_cast<std::size_t>(j);
      const BasisSet& basis = core.bases[ju];
      const auto& c = b.coef[q][ju];
      auto& dc = b.coef_grad[q][ju];
      const bool observed = rec.event && rec.event_type == j;

      if (kind == ModelKind::Dh) {
        const auto integral = basis.integrate(t);
        for (std::size_t k = 0; k < c.size(); ++k) {
          total -= c[k] * integral[k];
          dc[k] -= integral[k];
        }
        if (observed) {
          const auto nu = basis.evaluate_sparse(t);
          double hazard = 0.0;
          for (std::size_t i = 0; i < nu.count; ++i) hazard += c[nu.first + i] * nu.value[i];
          if (!(hazard > 0.0)) {
            fail(ErrorKind::Estimation, fmt::format("zero hazard at the observed event of record {}", batch[q]));
          }
          total += std::log(hazard);
          for (std::size_t i = 0; i < nu.count; ++i) dc[nu.first + i] += nu.value[i] / hazard;
        }
        continue;
      }

      // QR: Lambda_j(t) = u* solves sum_k c_k I_k(u*) = t; lambda_j = 1 / g(u*)
      // with g(u) = sum_k c_k nu_k(u).
      const double u = basis.inverse_weighted_integral(c, t);
      const auto integral = basis.integrate(u);
      const auto nu = basis.evaluate(u);
      double g = 0.0;
      for (std::size_t k = 0; k < c.size(); ++k) g += c[k] * nu[k];
      if (!(g > 0.0)) {
        fail(ErrorKind::Estimation, fmt::format("degenerate quantile slope for record {}", batch[q]));
      }
      total -= u;
      // du*/dc_k = -I_k(u*) / g
      for (std::size_t k = 0; k < c.size(); ++k) dc[k] += integral[k] / g;
      if (observed) {
        const auto dnu = basis.derivative(u);
        double dg = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) dg += c[k] * dnu[k];
        total -= std::log(g);
        // d(-log g(u*))/dc_k = -(nu_k - dg * I_k / g) / g
        for (std::size_t k = 0; k < c.size(); ++k) dc[k] -= (nu[k] - dg * integral[k] / g) / g;
      }
    }
  }

  const double norm = 1.0 / static_cast<double>(batch.size());
  ObjectiveValue result;
  result.value = total * norm;
  result.terms = batch.size();
  if (with_gradient) {
    for (auto& subject : b.coef_grad) {
      for (auto& v : subject) {
        for (double& d : v) d *= norm;
      }
    }
    result.grad = backpropagate(core, b);
  }
  return result;
}

}  // namespace

ObjectiveValue full_loglik_objective(const MnnModel& model, const Dataset& data,
                                     std::span<const std::size_t> batch, Mode mode, Rng& rng) {
  return full_loglik_impl(model, data, batch, mode, rng, true);
}

ObjectiveValue full_loglik_with_gradient(const MnnModel& model, const Dataset& data) {
  if (data.empty()) fail(ErrorKind::Estimation, "full likelihood needs at least one record");
  Rng unused(0);
  const auto rows = all_rows(data.size());
  return full_loglik_objective(model, data, rows, Mode::Eval, unused);
}

double full_loglik(const MnnModel& model, const Dataset& data) {
  if (data.empty()) fail(ErrorKind::Estimation, "full likelihood needs at least one record");
  Rng unused(0);
  const auto rows = all_rows(data.size());
  return full_loglik_impl(model, data, rows, Mode::Eval, unused, false).value;
}

}  // namespace mnn
