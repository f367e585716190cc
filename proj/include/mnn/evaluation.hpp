#pragma once

// Error metrics against a known truth (synthetic data) and against the
// observed data (marginal cumulative hazard ratios over sliding windows).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mnn/data.hpp"
#include "mnn/estimation.hpp"
#include "mnn/models.hpp"

namespace mnn::eval {

/// S(t|x) at every time of an increasing grid.
using SurvivalCurveFn =
    std::function<std::vector<double>(const Covariates& x, std::span<const double> times)>;

SurvivalCurveFn model_curve(const MnnModel& model);

/// start, start + step, ..., end (inclusive, rounded to the nearest step count).
std::vector<double> uniform_grid(double start, double end, double step);

// --- integrated squared error ---------------------------------------------------

struct IseOptions {
  double horizon = 10.0;
  double grid_step = 0.1;
};

/// Mean over subjects of (1 / horizon) int_0^horizon (S_model - S_true)^2 dt,
/// trapezoidal on the grid. Throws ErrorKind::Usage without an oracle.
double integrated_squared_error(const SurvivalCurveFn& model, const Dataset& test,
                                const SurvivalCurveFn& truth, const IseOptions& options = {});

// --- marginal cumulative hazard ratio ----------------------------------------------

/// Marginal survival of the subpopulation `members` (row indices into the
/// test set) at each time of the grid.
using MarginalSurvivalFn = std::function<std::vector<double>(std::span<const std::size_t> members,
                                                             std::span<const double> times)>;

/// Average of the model's per-subject survival. With `event_type`, the
/// cause-specific exp(-Lambda_j) replaces the overall survival. Curves are
/// computed once for every test subject.
MarginalSurvivalFn model_marginal(const MnnModel& model, const Dataset& test,
                                  std::span<const double> times, std::optional<int> event_type);

/// Kaplan-Meier curve of the members, as a stand-in "model".
MarginalSurvivalFn km_marginal(const Dataset& test, std::optional<int> event_type);

struct WindowSpec {
  int attribute = 0;  // index of the numeric covariate
  double width = 4.0;
  std::vector<double> targets;
  std::optional<int> event_type;
};

/// Rows with |x_attribute - center| <= width / 2.
std::vector<std::size_t> window_members(const Dataset& test, int attribute, double center, double width);

struct ChrPoint {
  double target = 0.0;
  std::size_t count = 0;  // population weight p(w)
  double km_survival = 1.0;
  double model_survival = 1.0;
  double chr_km = 0.0;
  double chr_model = 0.0;
  bool missing = true;  // empty window or no event before t
};

struct ChrCurve {
  double time = 0.0;
  double population_km = 1.0;
  std::vector<ChrPoint> points;
};

/// Sliding-window CHR at each time: windowed KM, windowed model average and
/// the population KM, with
///   chr_km    = log S_KM(t | window) / log S_KM(t)
///   chr_model = log S_model(t | window) / log S_KM(t).
std::vector<ChrCurve> marginal_chr(const MarginalSurvivalFn& model, const Dataset& test,
                                   const WindowSpec& spec, std::span<const double> times);

struct RmseDecomposition {
  double mse = 0.0;   // weighted mean of e^2, no square root
  double rmse = 0.0;  // sqrt(mse)
  double urmse = 0.0;
  double bias = 0.0;  // weighted mean of e, the bias minimizing the RMSE
  double abs_bias = 0.0;
  std::size_t used = 0;
  std::size_t excluded = 0;
  bool valid = false;
};

/// rmse^2 = urmse^2 + bias^2 for the log-ratio errors e with weights p.
/// Throws ErrorKind::Usage when the weights are all zero.
RmseDecomposition rmse_decomposition(std::span<const double> errors, std::span<const double> weights);

/// e(w) = log(log S_model / log S_KM) per window; windows that are missing or
/// have a survival outside (0, 1) are excluded and counted.
RmseDecomposition rmse_urmse_bias(const ChrCurve& curve);

// --- reports -------------------------------------------------------------------------

struct EvalReport {
  std::string metric;
  std::string config;
  std::vector<double> times;  // empty for time-free metrics
  std::vector<double> mean;
  std::vector<double> half_width;  // normal-approximation 95% over runs
  std::vector<std::size_t> count;
  double aggregate = 0.0;  // max over time of `mean`
  double aggregate_half_width = 0.0;
  double aggregate_time = 0.0;
  std::size_t runs = 0;
  std::size_t failed_runs = 0;
};

/// Per-run metrics of one fitted model on one test set.
struct RunMetrics {
  std::vector<double> times;
  std::vector<RmseDecomposition> chr;  // per time
  std::optional<double> ise;
};

struct EvalOptions {
  std::vector<double> times;  // CHR evaluation grid
  WindowSpec window;
  SurvivalCurveFn truth;  // optional oracle for the ISE
  IseOptions ise;
};

RunMetrics evaluate_model(const MnnModel& model, const Dataset& test, const EvalOptions& options);

/// Aggregates runs into reports: one per CHR metric (mse, rmse, urmse,
/// abs_bias) and one for the ISE when present.
std::vector<EvalReport> summarize(const std::string& config, std::span<const RunMetrics> runs,
                                  std::size_t failed_runs);

// --- cross-validation ----------------------------------------------------------------

struct NamedModelConfig {
  std::string name;
  ModelConfig model;
  TrainConfig train;
};

struct CvOptions {
  int folds = 5;
  int repetitions = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  EvalOptions eval;
};

struct CvResult {
  std::vector<EvalReport> reports;
  std::vector<std::vector<int>> fold_of;  // per repetition, fold index per record
  std::vector<std::string> failures;      // "config rep fold: message"
};

/// Shuffled k-fold split; fold f of repetition r is the records whose
/// position in that repetition's permutation is congruent to f mod k.
std::vector<int> assign_folds(std::size_t n, int folds, std::uint64_t seed, int repetition);

CvResult cross_validate(const Dataset& data, std::span<const NamedModelConfig> configs,
                        const CvOptions& options);

}  // namespace mnn::eval
