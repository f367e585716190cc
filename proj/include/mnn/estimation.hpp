#pragma once

// Objectives, baselines and the training loop.
//
// Log-likelihood values are normalized: the Cox partial log-likelihood by the
// number of uncensored terms, the full log-likelihood by the number of records.
// Both are maximized.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mnn/data.hpp"
#include "mnn/error.hpp"
#include "mnn/models.hpp"
#include "mnn/network.hpp"

namespace mnn {

struct TrainConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip_norm = 10.0;
  int iterations = 1000;
  int batch_size = 256;        // general batch N_b
  int event_batch_size = 256;  // uncensored batch for the Cox objective
  std::uint64_t seed = 0;

  void validate() const;
};

/// Objective value and its gradient with respect to the network parameters.
struct ObjectiveValue {
  double value = 0.0;
  GradientBuffer grad;
  std::size_t terms = 0;          // contributing likelihood terms
  std::size_t skipped_terms = 0;  // event-batch subjects with an empty risk set
};

// --- Cox partial likelihood ---------------------------------------------------

/// Full-data partial log-likelihood (eval mode), computed with per-basis
/// risk-set suffix sums. Ties share a risk set.
double cox_partial_loglik(const PhModel& model, const Dataset& data);
ObjectiveValue cox_partial_loglik_with_gradient(const PhModel& model, const Dataset& data);

/// Full-data risk-set sizes and the uncensored index list, built once per
/// training run.
class CoxRiskIndex {
 public:
  explicit CoxRiskIndex(const Dataset& data);

  /// |{m : T_m >= t}|
  std::size_t risk_set_size(double t) const noexcept;
  std::span<const std::size_t> uncensored() const noexcept { return uncensored_; }

 private:
  std::vector<double> sorted_times_;
  std::vector<std::size_t> uncensored_;
};

/// Dual mini-batch estimate of the partial log-likelihood. Each subject n of
/// `event_batch` compares against the members of `general_batch` still at
/// risk at T_n; their average hazard ratio is rescaled by the full-data
/// risk-set size. Subjects with no such member are skipped and counted.
ObjectiveValue cox_minibatch_objective(const PhModel& model, const Dataset& data,
                                       const CoxRiskIndex& index,
                                       std::span<const std::size_t> general_batch,
                                       std::span<const std::size_t> event_batch, Mode mode,
                                       Rng& rng);

// --- full likelihood (QR / DH) --------------------------------------------------

/// Mean over records of E log lambda_j(T) - sum_j Lambda_j(T), eval mode.
double full_loglik(const MnnModel& model, const Dataset& data);
ObjectiveValue full_loglik_with_gradient(const MnnModel& model, const Dataset& data);
ObjectiveValue full_loglik_objective(const MnnModel& model, const Dataset& data,
                                     std::span<const std::size_t> batch, Mode mode, Rng& rng);

// --- baselines and nonparametric curves ---------------------------------------

/// Cause-specific baseline cumulative hazards from a fitted PH network.
/// Single events at a time follow the closed form
///   -log(1 - omega_n / sum_risk omega) / omega_n;
/// tied events solve the joint product-limit equation in their shared risk
/// set. An event alone in its risk set gives an infinite (absorbing) jump.
std::vector<PhBaseline> kalbfleisch_prentice_baseline(const PhModel& model, const Dataset& data);

/// Product-limit survival curve. With `event_type`, other event types count
/// as censored.
StepFunction kaplan_meier(const Dataset& data, std::optional<int> event_type = std::nullopt);

// --- optimization ----------------------------------------------------------------

/// Adam ascent on a flat parameter vector with gradient-norm clipping.
class AdamOptimizer {
 public:
  AdamOptimizer(std::size_t size, const TrainConfig& config);

  void step(std::span<double> params, std::span<const double> grad);
  long iteration() const noexcept { return t_; }

 private:
  TrainConfig config_;
  std::vector<double> m_;
  std::vector<double> v_;
  long t_ = 0;
};

class BatchSampler;

/// One optimizer update on the dual mini-batch objective (train mode).
ObjectiveValue cox_minibatch_step(PhModel& model, const Dataset& data, const CoxRiskIndex& index,
                                  BatchSampler& sampler, AdamOptimizer& optimizer, Rng& rng);

/// Draws general and uncensored batches without replacement, reshuffling
/// once a pass over the pool is exhausted. Batches at least as large as their
/// pool are returned whole, in index order.
class BatchSampler {
 public:
  BatchSampler(std::size_t record_count, std::span<const std::size_t> uncensored,
                  std::size_t general_size, std::size_t event_size);

  std::vector<std::size_t> next_general(Rng& rng);
  std::vector<std::size_t> next_events(Rng& rng);

 private:
  struct Pool {
    std::vector<std::size_t> items;
    std::size_t cursor = 0;
    std::size_t batch = 0;
  };
  static std::vector<std::size_t> draw(Pool& pool, Rng& rng);

  Pool general_;
  Pool events_;
};

// --- training ------------------------------------------------------------------

struct ModelConfig {
  ModelKind kind = ModelKind::Ph;
  NetworkSpec spec;  // output_count is overwritten with sum_j K_j
  std::vector<BasisSet> bases;
  PositivityMap h;
};

/// Builds an untrained model from the config with Glorot-initialized weights.
MnnModel make_model(const ModelConfig& config, std::uint64_t seed);

struct TrainResult {
  MnnModel model;
  std::vector<double> trace;  // objective estimate per iteration
};

/// Thrown when the objective becomes non-finite; carries the trace so far.
class TrainingDiverged : public Error {
 public:
  TrainingDiverged(const std::string& message, std::vector<double> trace)
      : Error(ErrorKind::Estimation, message), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

TrainResult train(const ModelConfig& model_config, const Dataset& data, const TrainConfig& config);

}  // namespace mnn
