#include "mnn/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "mnn/error.hpp"

namespace mnn::eval {

SurvivalCurveFn model_curve(const MnnModel& model) {
  return [&model](const Covariates& x, std::span<const double> times) {
    return survival_curve(model, x, times);
  };
}

std::vector<double> uniform_grid(double start, double end, double step) {
  if (!(step > 0.0) || !(end >= start)) fail(ErrorKind::Usage, "invalid grid range");
  const auto n = static_cast<long>(std::llround((end - start) / step));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) grid.push_back(start + step * static_cast<double>(i));
  return grid;
}

double integrated_squared_error(const SurvivalCurveFn& model, const Dataset& test,
                                const SurvivalCurveFn& truth, const IseOptions& options) {
  if (!truth) fail(ErrorKind::Usage, "integrated squared error needs a truth oracle");
  if (!model) fail(ErrorKind::Usage, "integrated squared error needs a model");
  if (test.empty()) fail(ErrorKind::Usage, "integrated squared error needs test records");
  const auto grid = uniform_grid(0.0, options.horizon, options.grid_step);
  double total = 0.0;
  for (const auto& rec : test) {
    const auto s_model = model(rec.x, grid);
    const auto s_true = truth(rec.x, grid);
    double area = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double a = s_model[i - 1] - s_true[i - 1];
      const double b = s_model[i] - s_true[i];
      area += 0.5 * (a * a + b * b) * (grid[i] - grid[i - 1]);
    }
    total += area / options.horizon;
  }
  return total / static_cast<double>(test.size());
}

MarginalSurvivalFn model_marginal(const MnnModel& model, const Dataset& test,
                                  std::span<const double> times, std::optional<int> event_type) {
  const std::vector<double> grid(times.begin(), times.end());
  // table[row * T + i] = survival of `row` at grid[i]
  auto table = std::make_shared<std::vector<double>>(test.size() * grid.size());
  for (std::size_t r = 0; r < test.size(); ++r) {
    const auto c = coefficients(core_of(model), test[r].x);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto cum = cumulative_hazards_from(model, c, grid[i]);
      double lambda = 0.0;
      if (event_type) {
        lambda = cum.at(static_cast<std::size_t>(*event_type));
      } else {
        for (double v : cum) lambda += v;
      }
      (*table)[r * grid.size() + i] = std::exp(-lambda);
    }
  }
  return [table, grid](std::span<const std::size_t> members, std::span<const double> times) {
    std::vector<double> out(times.size(), 0.0);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto it = std::find(grid.begin(), grid.end(), times[i]);
      if (it == grid.end()) fail(ErrorKind::Usage, "time not on the precomputed model grid");
      const auto col = static_cast<std::size_t>(it - grid.begin());
      double s = 0.0;
      for (std::size_t r : members) s += (*table)[r * grid.size() + col];
      out[i] = members.empty() ? 1.0 : s / static_cast<double>(members.size());
    }
    return out;
  };
}

MarginalSurvivalFn km_marginal(const Dataset& test, std::optional<int> event_type) {
  return [&test, event_type](std::span<const std::size_t> members, std::span<const double> times) {
    std::vector<double> out(times.size(), 1.0);
    if (members.empty()) return out;
    Dataset subset;
    subset.reserve(members.size());
    for (std::size_t r : members) subset.push_back(test[r]);
    const auto km = kaplan_meier(subset, event_type);
    for (std::size_t i = 0; i < times.size(); ++i) out[i] = km(times[i]);
    return out;
  };
}

std::vector<std::size_t> window_members(const Dataset& test, int attribute, double center, double width) {
  std::vector<std::size_t> rows;
  const double half = 0.5 * width;
  for (std::size_t r = 0; r < test.size(); ++r) {
    const auto& numeric = test[r].x.numeric;
    if (attribute < 0 || static_cast<std::size_t>(attribute) >= numeric.size()) {
      fail(ErrorKind::Usage, fmt::format("window attribute {} is not a numeric covariate", attribute));
    }
    if (std::abs(numeric[static_cast<std::size_t>(attribute)] - center) <= half) rows.push_back(r);
  }
  return rows;
}

namespace {

bool has_event_before(const Dataset& test, std::span<const std::size_t> rows, double t,
                      std::optional<int> event_type) {
  return std::any_of(rows.begin(), rows.end(), [&](std::size_t r) {
    const auto& rec = test[r];
    return rec.event && rec.time <= t && (!event_type || rec.event_type == *event_type);
  });
}

}  // namespace

std::vector<ChrCurve> marginal_chr(const MarginalSurvivalFn& model, const Dataset& test,
                                   const WindowSpec& spec, std::span<const double> times) {
  if (test.empty()) fail(ErrorKind::Usage, "marginal CHR needs test records");
  if (!(spec.width > 0.0)) fail(ErrorKind::Usage, "window width must be > 0");
  for (double t : times) {
    if (!(t > 0.0)) fail(ErrorKind::Usage, "marginal CHR times must be > 0");
  }
  const auto population = kaplan_meier(test, spec.event_type);

  std::vector<ChrCurve> curves(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    curves[i].time = times[i];
    curves[i].population_km = population(times[i]);
    curves[i].points.resize(spec.targets.size());
  }

  const auto km = km_marginal(test, spec.event_type);
  for (std::size_t w = 0; w < spec.targets.size(); ++w) {
    const auto rows = window_members(test, spec.attribute, spec.targets[w], spec.width);
    std::vector<double> s_km;
    std::vector<double> s_model;
    if (!rows.empty()) {
      s_km = km(rows, times);
      s_model = model(rows, times);
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      ChrPoint& p = curves[i].points[w];
      p.target = spec.targets[w];
      p.count = rows.size();
      const double log_pop = std::log(curves[i].population_km);
      if (rows.empty() || !has_event_before(test, rows, times[i], spec.event_type) || !(log_pop < 0.0)) {
        p.missing = true;
        continue;
      }
      p.missing = false;
      p.km_survival = s_km[i];
      p.model_survival = s_model[i];
      p.chr_km = std::log(p.km_survival) / log_pop;
      p.chr_model = std::log(p.model_survival) / log_pop;
    }
  }
  return curves;
}

RmseDecomposition rmse_decomposition(std::span<const double> errors, std::span<const double> weights) {
  if (errors.size() != weights.size()) fail(ErrorKind::Usage, "errors and weights differ in length");
  double wsum = 0.0;
  double e1 = 0.0;
  double e2 = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!(weights[i] >= 0.0)) fail(ErrorKind::Usage, "window weights must be nonnegative");
    wsum += weights[i];
    e1 += weights[i] * errors[i];
    e2 += weights[i] * errors[i] * errors[i];
  }
  if (!(wsum > 0.0)) fail(ErrorKind::Usage, "window weights are all zero");
  RmseDecomposition d;
  d.bias = e1 / wsum;
  d.mse = e2 / wsum;
  double centered = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double c = errors[i] - d.bias;
    centered += weights[i] * c * c;
  }
  d.urmse = std::sqrt(centered / wsum);
  d.rmse = std::sqrt(d.mse);
  d.abs_bias = std::abs(d.bias);
  d.used = errors.size();
  d.valid = true;
  return d;
}

RmseDecomposition rmse_urmse_bias(const ChrCurve& curve) {
  std::vector<double> errors;
  std::vector<double> weights;
  std::size_t excluded = 0;
  auto inside = [](double s) { return s > 0.0 && s < 1.0; };
  for (const auto& p : curve.points) {
    if (p.missing || p.count == 0) continue;
    if (!inside(p.km_survival) || !inside(p.model_survival)) {
      ++excluded;
      continue;
    }
    errors.push_back(std::log(std::log(p.model_survival) / std::log(p.km_survival)));
    weights.push_back(static_cast<double>(p.count));
  }
  RmseDecomposition d;
  if (!errors.empty()) d = rmse_decomposition(errors, weights);
  d.excluded = excluded;
  return d;
}

RunMetrics evaluate_model(const MnnModel& model, const Dataset& test, const EvalOptions& options) {
  RunMetrics m;
  m.times = options.times;
  if (!options.times.empty() && !options.window.targets.empty()) {
    const auto marginal = model_marginal(model, test, options.times, options.window.event_type);
    for (const auto& curve : marginal_chr(marginal, test, options.window, options.times)) {
      m.chr.push_back(rmse_urmse_bias(curve));
    }
  }
  if (options.truth) {
    m.ise = integrated_squared_error(model_curve(model), test, options.truth, options.ise);
  }
  return m;
}

namespace {

void mean_and_half_width(std::span<const double> values, double& mean, double& half) {
  mean = 0.0;
  half = 0.0;
  if (values.empty()) return;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() < 2) return;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  half = 1.96 * sd / std::sqrt(static_cast<double>(values.size()));
}

}  // namespace

std::vector<EvalReport> summarize(const std::string& config, std::span<const RunMetrics> runs,
                                  std::size_t failed_runs) {
  std::vector<EvalReport> reports;
  if (!runs.empty() && !runs.front().chr.empty()) {
    using Getter = double (*)(const RmseDecomposition&);
    const std::pair<const char*, Getter> metrics[] = {
        {"mse", [](const RmseDecomposition& d) { return d.mse; }},
        {"rmse", [](const RmseDecomposition& d) { return d.rmse; }},
        {"urmse", [](const RmseDecomposition& d) { return d.urmse; }},
        {"abs_bias", [](const RmseDecomposition& d) { return d.abs_bias; }},
    };
    const auto& times = runs.front().times;
    for (const auto& [name, get] : metrics) {
      EvalReport r;
      r.metric = name;
      r.config = config;
      r.times = times;
      r.runs = runs.size();
      r.failed_runs = failed_runs;
      bool have = false;
      for (std::size_t i = 0; i < times.size(); ++i) {
        std::vector<double> values;
        for (const auto& run : runs) {
          if (i < run.chr.size() && run.chr[i].valid) values.push_back(get(run.chr[i]));
        }
        double mean = 0.0;
        double half = 0.0;
        mean_and_half_width(values, mean, half);
        r.mean.push_back(values.empty() ? std::nan("") : mean);
        r.half_width.push_back(half);
        r.count.push_back(values.size());
        if (!values.empty() && (!have || mean > r.aggregate)) {
          have = true;
          r.aggregate = mean;
          r.aggregate_half_width = half;
          r.aggregate_time = times[i];
        }
      }
      if (!have) r.aggregate = std::nan("");
      reports.push_back(std::move(r));
    }
  }
  std::vector<double> ise;
  for (const auto& run : runs) {
    if (run.ise) ise.push_back(*run.ise);
  }
  if (!ise.empty()) {
    EvalReport r;
    r.metric = "ise";
    r.config = config;
    r.runs = runs.size();
    r.failed_runs = failed_runs;
    double mean = 0.0;
    double half = 0.0;
    mean_and_half_width(ise, mean, half);
    r.mean = {mean};
    r.half_width = {half};
    r.count = {ise.size()};
    r.aggregate = mean;
    r.aggregate_half_width = half;
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace mnn::eval
