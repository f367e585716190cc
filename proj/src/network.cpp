#include "mnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "mnn/error.hpp"
#include "mnn/kernels.hpp"

namespace mnn {
namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Multiplicative Gaussian dropout noise N(1, p / (1 - p)).
void draw_noise(double rate, std::span<double> noise, Rng& rng) {
  if (rate <= 0.0) {
    std::fill(noise.begin(), noise.end(), 1.0);
    return;
  }
  std::normal_distribution<double> normal(1.0, std::sqrt(rate / (1.0 - rate)));
  for (double& v : noise) v = normal(rng);
}

}  // namespace

std::size_t count_events(const Dataset& data) noexcept {
  return static_cast<std::size_t>(
      std::count_if(data.begin(), data.end(), [](const SurvivalRecord& r) { return r.event; }));
}

int NetworkSpec::input_width() const noexcept {
  return numeric_input_count + boolean_input_count +
         static_cast<int>(categorical_cardinalities.size()) * embedding_width;
}

void NetworkSpec::validate() const {
  auto bad = [](const std::string& msg) { fail(ErrorKind::Config, "invalid network spec: " + msg); };
  if (numeric_input_count < 0 || boolean_input_count < 0) bad("negative input count");
  if (!categorical_cardinalities.empty() && embedding_width < 1) bad("embedding_width must be >= 1");
  for (int c : categorical_cardinalities) {
    if (c < 1) bad("categorical cardinality must be >= 1");
  }
  for (int w : hidden_widths) {
    if (w < 1) bad("hidden width must be >= 1");
  }
  if (output_count < 1) bad("output_count must be >= 1");
  if (!(embedding_dropout >= 0.0 && embedding_dropout < 1.0)) bad("embedding_dropout must lie in [0,1)");
  if (!(hidden_dropout >= 0.0 && hidden_dropout < 1.0)) bad("hidden_dropout must lie in [0,1)");
}

ParamLayout ParamLayout::from_spec(const NetworkSpec& spec) {
  ParamLayout layout;
  std::size_t offset = 0;
  for (int card : spec.categorical_cardinalities) {
    EmbeddingShape e{static_cast<std::size_t>(card), static_cast<std::size_t>(spec.embedding_width), offset};
    offset += e.rows * e.cols;
    layout.embeddings.push_back(e);
  }
  std::size_t in = static_cast<std::size_t>(spec.input_width());
  auto add_layer = [&](std::size_t out) {
    DenseShape d{out, in, offset, offset + out * in};
    offset += out * in + out;
    layout.layers.push_back(d);
    in = out;
  };
  for (int w : spec.hidden_widths) add_layer(static_cast<std::size_t>(w));
  add_layer(static_cast<std::size_t>(spec.output_count));
  layout.size = offset;
  return layout;
}

std::span<const double> NetworkParams::weight(std::size_t layer) const {
  const auto& d = layout.layers.at(layer);
  return {values.data() + d.weight_offset, d.rows * d.cols};
}
std::span<const double> NetworkParams::bias(std::size_t layer) const {
  const auto& d = layout.layers.at(layer);
  return {values.data() + d.bias_offset, d.rows};
}
std::span<const double> NetworkParams::embedding(std::size_t table) const {
  const auto& e = layout.embeddings.at(table);
  return {values.data() + e.offset, e.rows * e.cols};
}
std::span<double> NetworkParams::weight(std::size_t layer) {
  const auto& d = layout.layers.at(layer);
  return {values.data() + d.weight_offset, d.rows * d.cols};
}
std::span<double> NetworkParams::bias(std::size_t layer) {
  const auto& d = layout.layers.at(layer);
  return {values.data() + d.bias_offset, d.rows};
}
std::span<double> NetworkParams::embedding(std::size_t table) {
  const auto& e = layout.embeddings.at(table);
  return {values.data() + e.offset, e.rows * e.cols};
}

NetworkParams NetworkParams::zeros(const NetworkSpec& spec) {
  spec.validate();
  NetworkParams p{spec, ParamLayout::from_spec(spec), {}};
  p.values.assign(p.layout.size, 0.0);
  return p;
}

void GradientBuffer::clear() noexcept { std::fill(values.begin(), values.end(), 0.0); }

GradientBuffer& GradientBuffer::operator+=(const GradientBuffer& other) {
  if (other.values.size() != values.size()) fail(ErrorKind::Usage, "gradient buffer shape mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += other.values[i];
  return *this;
}

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed) {
  NetworkParams p = NetworkParams::zeros(spec);
  Rng rng(seed);
  auto glorot = [&](std::span<double> w, std::size_t fan_in, std::size_t fan_out) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-limit, limit);
    for (double& v : w) v = uniform(rng);
  };
  for (std::size_t t = 0; t < p.layout.embeddings.size(); ++t) {
    const auto& e = p.layout.embeddings[t];
    glorot(p.embedding(t), e.rows, e.cols);
  }
  for (std::size_t l = 0; l < p.layout.layers.size(); ++l) {
    const auto& d = p.layout.layers[l];
    glorot(p.weight(l), d.cols, d.rows);
  }
  return p;
}

ForwardResult forward(const NetworkParams& params, const Covariates& x, Mode mode, Rng& rng) {
  const NetworkSpec& spec = params.spec;
  if (static_cast<int>(x.numeric.size()) != spec.numeric_input_count ||
      static_cast<int>(x.boolean.size()) != spec.boolean_input_count ||
      x.categorical.size() != spec.categorical_cardinalities.size()) {
    fail(ErrorKind::Data, "covariate arity does not match network spec");
  }
  const bool train = mode == Mode::Train;

  ForwardResult result;
  Tape& tape = result.tape;
  tape.input.reserve(static_cast<std::size_t>(spec.input_width()));
  for (double v : x.numeric) {
    if (!std::isfinite(v)) fail(ErrorKind::Data, "non-finite numeric covariate");
    tape.input.push_back(v);
  }
  for (double v : x.boolean) {
    if (!std::isfinite(v)) fail(ErrorKind::Data, "non-finite boolean covariate");
    tape.input.push_back(v);
  }

  const std::size_t width = static_cast<std::size_t>(spec.embedding_width);
  for (std::size_t t = 0; t < x.categorical.size(); ++t) {
    const int level = x.categorical[t];
    if (level < 0 || level >= spec.categorical_cardinalities[t]) {
      fail(ErrorKind::Data, fmt::format("categorical level {} out of range for input {}", level, t));
    }
    tape.levels.push_back(level);
    auto row = params.embedding(t).subspan(static_cast<std::size_t>(level) * width, width);
    std::vector<double> act(width);
    for (std::size_t i = 0; i < width; ++i) act[i] = sigmoid(row[i]);
    std::vector<double> noise(width, 1.0);
    if (train) draw_noise(spec.embedding_dropout, noise, rng);
    for (std::size_t i = 0; i < width; ++i) tape.input.push_back(act[i] * noise[i]);
    tape.embedding_act.push_back(std::move(act));
    tape.embedding_noise.push_back(std::move(noise));
  }

  const std::size_t hidden_count = spec.hidden_widths.size();
  std::span<const double> in(tape.input);
  for (std::size_t l = 0; l < hidden_count; ++l) {
    const auto& d = params.layout.layers[l];
    auto w = params.weight(l);
    auto b = params.bias(l);
    std::vector<double> act(d.rows);
    for (std::size_t r = 0; r < d.rows; ++r) {
      act[r] = sigmoid(b[r] + simd::dot(w.subspan(r * d.cols, d.cols), in));
    }
    std::vector<double> noise(d.rows, 1.0);
    if (train) draw_noise(spec.hidden_dropout, noise, rng);
    std::vector<double> out(d.rows);
    for (std::size_t r = 0; r < d.rows; ++r) out[r] = act[r] * noise[r];
    tape.hidden_act.push_back(std::move(act));
    tape.hidden_noise.push_back(std::move(noise));
    tape.hidden_out.push_back(std::move(out));
    in = tape.hidden_out.back();
  }

  const auto& head = params.layout.layers.back();
  auto w = params.weight(hidden_count);
  auto b = params.bias(hidden_count);
  result.outputs.resize(head.rows);
  for (std::size_t r = 0; r < head.rows; ++r) {
    result.outputs[r] = b[r] + simd::dot(w.subspan(r * head.cols, head.cols), in);
  }
  return result;
}

std::vector<double> predict(const NetworkParams& params, const Covariates& x) {
  Rng unused(0);
  return forward(params, x, Mode::Eval, unused).outputs;
}

void accumulate_gradient(const NetworkParams& params, const Tape& tape,
                         std::span<const double> cotangent, GradientBuffer& grad) {
  const NetworkSpec& spec = params.spec;
  if (cotangent.size() != static_cast<std::size_t>(spec.output_count)) {
    fail(ErrorKind::Usage, "cotangent length does not match output_count");
  }
  if (grad.values.size() != params.values.size()) {
    fail(ErrorKind::Usage, "gradient buffer shape mismatch");
  }
  const std::size_t hidden_count = spec.hidden_widths.size();
  const bool need_input_grad = !tape.levels.empty();

  std::vector<double> upstream(cotangent.begin(), cotangent.end());
  std::vector<double> downstream;
  for (std::size_t l = hidden_count + 1; l-- > 0;) {
    const auto& d = params.layout.layers[l];
    std::span<const double> in = l == 0 ? std::span<const double>(tape.input)
                                        : std::span<const double>(tape.hidden_out[l - 1]);
    const bool propagate = l > 0 || need_input_grad;
    if (propagate) downstream.assign(d.cols, 0.0);
    auto w = params.weight(l);
    std::span<double> gw(grad.values.data() + d.weight_offset, d.rows * d.cols);
    std::span<double> gb(grad.values.data() + d.bias_offset, d.rows);
    for (std::size_t r = 0; r < d.rows; ++r) {
      const double g = upstream[r];
      if (g == 0.0) continue;
      gb[r] += g;
      simd::axpy(g, in, gw.subspan(r * d.cols, d.cols));
      if (propagate) simd::axpy(g, w.subspan(r * d.cols, d.cols), downstream);
    }
    if (!propagate) break;
    if (l > 0) {
      // Through dropout and the sigmoid of hidden layer l - 1.
      const auto& act = tape.hidden_act[l - 1];
      const auto& noise = tape.hidden_noise[l - 1];
      for (std::size_t i = 0; i < downstream.size(); ++i) {
        downstream[i] *= noise[i] * act[i] * (1.0 - act[i]);
      }
    }
    upstream.swap(downstream);
  }

  if (!need_input_grad) return;
  // `upstream` now holds dL/d(first-layer input).
  const std::size_t width = static_cast<std::size_t>(spec.embedding_width);
  std::size_t pos = static_cast<std::size_t>(spec.numeric_input_count + spec.boolean_input_count);
  for (std::size_t t = 0; t < tape.levels.size(); ++t, pos += width) {
    const auto& e = params.layout.embeddings[t];
    double* row = grad.values.data() + e.offset + static_cast<std::size_t>(tape.levels[t]) * width;
    const auto& act = tape.embedding_act[t];
    const auto& noise = tape.embedding_noise[t];
    for (std::size_t i = 0; i < width; ++i) {
      row[i] += upstream[pos + i] * noise[i] * act[i] * (1.0 - act[i]);
    }
  }
}

GradientBuffer backward(const NetworkParams& params, const Tape& tape,
                        std::span<const double> cotangent) {
  GradientBuffer grad(params.values.size());
  accumulate_gradient(params, tape, cotangent, grad);
  return grad;
}

}  // namespace mnn
