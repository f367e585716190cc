#pragma once

// Feed-forward network psi(x; theta) with a hand-written reverse pass.
//
// Layout: each categorical covariate is looked up in its own embedding table
// and squashed by a sigmoid, then [numeric, boolean, embeddings] feed a stack
// of sigmoid hidden layers and a linear head. Gaussian dropout multiplies the
// embedding and hidden activations by N(1, p / (1 - p)) noise in train mode.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mnn/data.hpp"

namespace mnn {

using Rng = std::mt19937_64;

struct NetworkSpec {
  int numeric_input_count = 0;
  int boolean_input_count = 0;
  std::vector<int> categorical_cardinalities;
  int embedding_width = 10;
  double embedding_dropout = 0.7;
  std::vector<int> hidden_widths{100, 100};
  double hidden_dropout = 0.1;
  int output_count = 1;

  /// Width of the concatenated first-layer input.
  int input_width() const noexcept;

  /// Throws ErrorKind::Config on an invalid spec.
  void validate() const;

  bool operator==(const NetworkSpec&) const = default;
};

/// Row-major view of one dense layer inside a flat parameter vector.
struct DenseShape {
  std::size_t rows = 0;  // outputs
  std::size_t cols = 0;  // inputs
  std::size_t weight_offset = 0;
  std::size_t bias_offset = 0;
};

struct EmbeddingShape {
  std::size_t rows = 0;  // cardinality
  std::size_t cols = 0;  // embedding width
  std::size_t offset = 0;
};

/// Offsets of every tensor inside the flat parameter vector.
struct ParamLayout {
  std::vector<EmbeddingShape> embeddings;
  std::vector<DenseShape> layers;  // hidden layers, then the head
  std::size_t size = 0;

  static ParamLayout from_spec(const NetworkSpec& spec);
};

struct NetworkParams {
  NetworkSpec spec;
  ParamLayout layout;
  std::vector<double> values;

  std::span<const double> weight(std::size_t layer) const;
  std::span<const double> bias(std::size_t layer) const;
  std::span<const double> embedding(std::size_t table) const;
  std::span<double> weight(std::size_t layer);
  std::span<double> bias(std::size_t layer);
  std::span<double> embedding(std::size_t table);

  /// Parameters with every entry zero (used by closed-form test models).
  static NetworkParams zeros(const NetworkSpec& spec);
};

/// Accumulates dL/dtheta; shares NetworkParams' layout.
struct GradientBuffer {
  std::vector<double> values;

  explicit GradientBuffer(std::size_t size = 0) : values(size, 0.0) {}
  void clear() noexcept;
  GradientBuffer& operator+=(const GradientBuffer& other);
};

NetworkParams init_params(const NetworkSpec& spec, std::uint64_t seed);

enum class Mode { Train, Eval };

/// Everything the reverse pass needs from one forward evaluation.
struct Tape {
  std::vector<double> input;  // concatenated first-layer input (after dropout)
  std::vector<int> levels;
  // Pre-dropout sigmoid activations and dropout multipliers per embedding.
  std::vector<std::vector<double>> embedding_act;
  std::vector<std::vector<double>> embedding_noise;
  // Per hidden layer: sigmoid activation, dropout multiplier, layer output.
  std::vector<std::vector<double>> hidden_act;
  std::vector<std::vector<double>> hidden_noise;
  std::vector<std::vector<double>> hidden_out;
};

struct ForwardResult {
  std::vector<double> outputs;
  Tape tape;
};

/// Evaluates psi(x). In eval mode `rng` is never touched.
ForwardResult forward(const NetworkParams& params, const Covariates& x, Mode mode, Rng& rng);

/// Eval-mode outputs only.
std::vector<double> predict(const NetworkParams& params, const Covariates& x);

/// Adds the gradient of <outputs, cotangent> to `grad`.
void accumulate_gradient(const NetworkParams& params, const Tape& tape,
                         std::span<const double> cotangent, GradientBuffer& grad);

GradientBuffer backward(const NetworkParams& params, const Tape& tape,
                        std::span<const double> cotangent);

}  // namespace mnn
