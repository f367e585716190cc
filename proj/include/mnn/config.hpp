#pragma once

// Experiment configuration: a sectioned key = value file.
//
//   [experiment]   seed, out, threads
//   [data]         schema, train, test
//   [simulate]     n_train, n_test, horizon, uniform_censoring
//   [model]        the default model; [model:NAME] sections add named models
//                  that inherit every key of [model]
//   [train]        optimizer settings; any of them may be overridden inside a
//                  model section
//   [eval]         CHR grid, window and ISE settings
//   [cv]           folds, repetitions
//   [predict]      survival grid
//
// Number lists are either comma separated ("0,2,4,7") or an inclusive range
// "start:end:step".

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mnn/basis.hpp"
#include "mnn/dataset_io.hpp"
#include "mnn/estimation.hpp"
#include "mnn/evaluation.hpp"
#include "mnn/models.hpp"
#include "mnn/positivity.hpp"

namespace mnn::config {

struct ModelEntry {
  std::string name = "default";
  ModelKind kind = ModelKind::Ph;
  BasisKind basis = BasisKind::PiecewiseLinear;
  std::vector<double> knots;                    // empty: the kind's default grid
  std::vector<std::vector<double>> event_knots;  // per event, empty entries fall back to `knots`
  PositivityKind h = PositivityKind::Exp;
  int embedding_width = 10;
  double embedding_dropout = 0.7;
  std::vector<int> hidden{100, 100};
  double hidden_dropout = 0.1;
  TrainConfig train;

  /// Knots used for event `event` (0-based).
  std::vector<double> knots_for(int event) const;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "out";
  int threads = 1;

  io::DatasetSchema schema = io::DatasetSchema::synthetic();
  std::filesystem::path train_path;  // empty: <out>/train.csv
  std::filesystem::path test_path;   // empty: <out>/test.csv

  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  double horizon = 10.0;
  bool uniform_censoring = false;

  std::vector<ModelEntry> models;  // [model] first, then [model:NAME] in file order

  std::vector<double> eval_times;
  int window_attribute = 0;
  double window_width = 4.0;
  std::vector<double> window_targets;
  std::optional<int> eval_event_type;  // 0-based; none means overall survival
  double ise_horizon = 10.0;
  double ise_step = 0.1;
  std::string oracle = "auto";  // auto | synthetic | none

  int folds = 5;
  int repetitions = 1;

  std::vector<double> predict_times;

  ExperimentConfig();

  std::filesystem::path resolved_train() const;
  std::filesystem::path resolved_test() const;
  int event_count() const;
  const ModelEntry& model(const std::string& name) const;
  /// Throws ErrorKind::Config on inconsistent settings.
  void validate() const;
};

std::vector<double> parse_number_list(const std::string& text);

ExperimentConfig parse_config(const std::string& text);
/// Throws ErrorKind::Io when the file cannot be read.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text of an effective configuration; parses back to itself.
std::string to_text(const ExperimentConfig& config);

/// Every section and key with its default, for --help.
std::string defaults_help();

/// Model and trainer settings for one entry, given the data schema.
ModelConfig model_config(const ModelEntry& entry, const io::DatasetSchema& schema, int event_count);

eval::EvalOptions eval_options(const ExperimentConfig& config, bool with_oracle);

}  // namespace mnn::config
