#include <cmath>

#include <fmt/format.h>

#include "mnn/error.hpp"
#include "mnn/estimation.hpp"

namespace mnn {

MnnModel make_model(const ModelConfig& config, std::uint64_t seed) {
  MnnCore core;
  core.bases = config.bases;
  core.h = config.h;
  NetworkSpec spec = config.spec;
  spec.output_count = 0;
  for (const auto& b : config.bases) spec.output_count += static_cast<int>(b.size());
  core.net = init_params(spec, seed);
  core.validate();
  switch (config.kind) {
    case ModelKind::Ph: return PhModel{std::move(core), {}};
    case ModelKind::Qr: return QrModel{std::move(core)};
    case ModelKind::Dh: return DhModel{std::move(core)};
  }
  fail(ErrorKind::Config, "unknown model kind");
}

TrainResult train(const ModelConfig& model_config, const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) fail(ErrorKind::Estimation, "training needs at least one record");

  // Parameters and batch draws use separate streams of the same seed.
  std::seed_seq seq{config.seed, std::uint64_t{0x6d6e6eULL}};
  Rng rng(seq);
  TrainResult result{make_model(model_config, config.seed), {}};
  result.trace.reserve(static_cast<std::size_t>(config.iterations));

  auto check = [&](double value, int iter) {
    if (!std::isfinite(value)) {
      throw TrainingDiverged(fmt::format("objective became non-finite at iteration {}", iter), result.trace);
    }
    result.trace.push_back(value);
  };

  if (auto* ph = std::get_if<PhModel>(&result.model)) {
    const CoxRiskIndex index(data);
    if (index.uncensored().empty()) {
      fail(ErrorKind::Estimation, "partial likelihood needs at least one uncensored subject");
    }
    BatchSampler sampler(data.size(), index.uncensored(),
                            static_cast<std::size_t>(config.batch_size),
                            static_cast<std::size_t>(config.event_batch_size));
    AdamOptimizer optimizer(ph->core.net.values.size(), config);
    for (int it = 0; it < config.iterations; ++it) {
      const auto step = cox_minibatch_step(*ph, data, index, sampler, optimizer, rng);
      check(step.value, it);
    }
    ph->baseline = kalbfleisch_prentice_baseline(*ph, data);
    return result;
  }

  MnnCore& core = core_of(result.model);
  AdamOptimizer optimizer(core.net.values.size(), config);
  std::vector<std::size_t> pool;
  BatchSampler sampler(data.size(), pool, static_cast<std::size_t>(config.batch_size), 1);
  for (int it = 0; it < config.iterations; ++it) {
    const auto batch = sampler.next_general(rng);
    const auto value = full_loglik_objective(result.model, data, batch, Mode::Train, rng);
    check(value.value, it);
    optimizer.step(core.net.values, value.grad.values);
  }
  return result;
}

}  // namespace mnn
