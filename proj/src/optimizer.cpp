#include <algorithm>
#include <cmath>

#include "mnn/error.hpp"
#include "mnn/estimation.hpp"

namespace mnn {

void TrainConfig::validate() const {
  if (!(step_size > 0.0)) fail(ErrorKind::Config, "step_size must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    fail(ErrorKind::Config, "moment decays must lie in [0,1)");
  }
  if (!(epsilon > 0.0)) fail(ErrorKind::Config, "epsilon must be > 0");
  if (!(clip_norm > 0.0)) fail(ErrorKind::Config, "clip_norm must be > 0");
  if (iterations < 0) fail(ErrorKind::Config, "iterations must be >= 0");
  if (batch_size < 1 || event_batch_size < 1) fail(ErrorKind::Config, "batch sizes must be >= 1");
}

AdamOptimizer::AdamOptimizer(std::size_t size, const TrainConfig& config)
    : config_(config), m_(size, 0.0), v_(size, 0.0) {}

void AdamOptimizer::step(std::span<double> params, std::span<const double> grad) {
  if (params.size() != m_.size() || grad.size() != m_.size()) {
    fail(ErrorKind::Usage, "optimizer state does not match parameter count");
  }
  double norm2 = 0.0;
  for (double g : grad) norm2 += g * g;
  const double norm = std::sqrt(norm2);
  const double scale = norm > config_.clip_norm ? config_.clip_norm / norm : 1.0;

  ++t_;
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i] * scale;
    m_[i] = b1 * m_[i] + (1.0 - b1) * g;
    v_[i] = b2 * v_[i] + (1.0 - b2) * g * g;
    // Ascent: the objectives are log-likelihoods.
    params[i] += config_.step_size * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
  }
}

BatchSampler::BatchSampler(std::size_t record_count, std::span<const std::size_t> uncensored,
                                 std::size_t general_size, std::size_t event_size) {
  general_.items.resize(record_count);
  for (std::size_t i = 0; i < record_count; ++i) general_.items[i] = i;
  general_.batch = general_size;
  events_.items.assign(uncensored.begin(), uncensored.end());
  events_.batch = event_size;
  // Force a shuffle on first use.
  general_.cursor = general_.items.size();
  events_.cursor = events_.items.size();
}

std::vector<std::size_t> BatchSampler::draw(Pool& pool, Rng& rng) {
  if (pool.batch >= pool.items.size()) {
    std::vector<std::size_t> all = pool.items;
    std::sort(all.begin(), all.end());
    return all;
  }
  std::vector<std::size_t> out;
  out.reserve(pool.batch);
  while (out.size() < pool.batch) {
    if (pool.cursor >= pool.items.size()) {
      std::shuffle(pool.items.begin(), pool.items.end(), rng);
      pool.cursor = 0;
    }
    out.push_back(pool.items[pool.cursor++]);
  }
  return out;
}

std::vector<std::size_t> BatchSampler::next_general(Rng& rng) { return draw(general_, rng); }
std::vector<std::size_t> BatchSampler::next_events(Rng& rng) { return draw(events_, rng); }

ObjectiveValue cox_minibatch_step(PhModel& model, const Dataset& data, const CoxRiskIndex& index,
                                  BatchSampler& sampler, AdamOptimizer& optimizer, Rng& rng) {
  const auto general = sampler.next_general(rng);
  const auto events = sampler.next_events(rng);
  ObjectiveValue value =
      cox_minibatch_objective(model, data, index, general, events, Mode::Train, rng);
  if (value.terms > 0) optimizer.step(model.core.net.values, value.grad.values);
  return value;
}

}  // namespace mnn
