#include "mnn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"
#include "mnn/config.hpp"
#include "mnn/dataset_io.hpp"
#include "mnn/error.hpp"
#include "mnn/estimation.hpp"
#include "mnn/evaluation.hpp"
#include "mnn/model_io.hpp"
#include "mnn/synthetic.hpp"

namespace mnn {

const char* kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Data: return "data";
    case ErrorKind::Usage: return "usage";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::State: return "state";
    case ErrorKind::Estimation: return "estimation";
    case ErrorKind::DatasetNotFound: return "dataset-not-found";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace mnn

namespace mnn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Flags given on the command line; unset ones leave the config alone.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> threads;
  std::string data;
  std::string model_file;
  std::string model_name;
  std::string output;  // primary artifact of the subcommand
  std::string summary;
  std::string times;
  std::optional<std::size_t> n;
  std::optional<std::size_t> n_test;
  bool censoring = false;
  std::optional<int> iterations;
  std::optional<int> folds;
  std::optional<int> repetitions;
};

struct Artifact {
  std::string role;
  fs::path path;
};

std::string csv_value(double v) { return std::isnan(v) ? "nan" : io::format_double(v); }

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void ensure_parent(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
}

std::ofstream open_output(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

fs::path pick(const std::string& flag, const fs::path& fallback) { return flag.empty() ? fallback : fs::path(flag); }

void write_manifest(const config::ExperimentConfig& cfg, const std::string& command,
                    const std::vector<std::string>& args, const std::vector<Artifact>& inputs,
                    const std::vector<Artifact>& outputs) {
  auto describe = [](const std::vector<Artifact>& list) {
    json arr = json::array();
    for (const auto& a : list) {
      arr.push_back({{"role", a.role},
                     {"path", a.path.string()},
                     {"bytes", fs::file_size(a.path)},
                     {"sha256", file_sha256(a.path.string())}});
    }
    return arr;
  };
  json m;
  m["command"] = command;
  m["arguments"] = args;
  m["seed"] = cfg.seed;
  m["config"] = config::to_text(cfg);
  m["inputs"] = describe(inputs);
  m["artifacts"] = describe(outputs);
  write_text(cfg.out / fmt::format("manifest_{}.json", command), m.dump(2) + "\n");
}

bool use_oracle(const config::ExperimentConfig& cfg) {
  const bool wanted = cfg.oracle == "synthetic" || (cfg.oracle == "auto" && cfg.schema == io::DatasetSchema::synthetic());
  if (wanted && cfg.schema.input_spec().numeric_input_count < 2) {
    fail(ErrorKind::Usage, "the synthetic oracle needs two numeric covariates");
  }
  return wanted;
}

void check_compatible(const MnnModel& model, const config::ExperimentConfig& cfg) {
  const auto& spec = core_of(model).net.spec;
  const auto want = cfg.schema.input_spec();
  if (spec.numeric_input_count != want.numeric_input_count || spec.boolean_input_count != want.boolean_input_count ||
      spec.categorical_cardinalities != want.categorical_cardinalities) {
    fail(ErrorKind::Usage, "model inputs do not match the dataset schema");
  }
  if (core_of(model).event_count() != cfg.event_count()) {
    fail(ErrorKind::Usage, "model event types do not match the dataset schema");
  }
}

// --- subcommands -----------------------------------------------------------------

void cmd_simulate(const config::ExperimentConfig& cfg, const Overrides& o, const std::vector<std::string>& args,
                  std::ostream& out) {
  if (!(cfg.schema == io::DatasetSchema::synthetic())) {
    fail(ErrorKind::Usage, "simulate writes the synthetic schema; remove the custom [data] schema");
  }
  synthetic::SyntheticSpec spec;
  spec.horizon = cfg.horizon;
  spec.uniform_censoring = cfg.uniform_censoring;

  spec.n = cfg.n_train;
  spec.seed = splitmix64(cfg.seed ^ 0x7472);
  const auto train_path = pick(o.output, cfg.resolved_train());
  ensure_parent(train_path);
  io::write_dataset(train_path, synthetic::sample_dataset(spec), cfg.schema);

  spec.n = cfg.n_test;
  spec.seed = splitmix64(cfg.seed ^ 0x7465);
  const auto test_path = cfg.resolved_test();
  ensure_parent(test_path);
  io::write_dataset(test_path, synthetic::sample_dataset(spec), cfg.schema);

  out << fmt::format("wrote {} ({} records) and {} ({} records)\n", train_path.string(), cfg.n_train,
                     test_path.string(), cfg.n_test);
  write_manifest(cfg, "simulate", args, {}, {{"train", train_path}, {"test", test_path}});
}

void cmd_train(const config::ExperimentConfig& cfg, const Overrides& o, const std::vector<std::string>& args,
               std::ostream& out) {
  const auto data_path = pick(o.data, cfg.resolved_train());
  const Dataset data = io::ingest(data_path, cfg.schema);
  const auto& entry = o.model_name.empty() ? cfg.models.front() : cfg.model(o.model_name);
  const ModelConfig mc = config::model_config(entry, cfg.schema, cfg.event_count());
  TrainConfig tc = entry.train;
  tc.seed = cfg.seed;

  const auto model_path = pick(o.model_file, cfg.out / "model.json");
  const auto trace_path = cfg.out / "loss_trace.csv";
  auto write_trace = [&](const std::vector<double>& trace) {
    auto f = open_output(trace_path);
    f << "iteration,objective\n";
    for (std::size_t i = 0; i < trace.size(); ++i) f << i + 1 << "," << csv_value(trace[i]) << "\n";
  };

  std::optional<TrainResult> result;
  try {
    result.emplace(train(mc, data, tc));
  } catch (const TrainingDiverged& e) {
    write_trace(e.trace());
    throw;
  }
  ensure_parent(model_path);
  io::save_model(model_path, result->model);
  write_trace(result->trace);
  out << fmt::format("trained {} model '{}' on {} records ({} iterations); final objective {}\n",
                     model_kind_name(entry.kind), entry.name, data.size(), result->trace.size(),
                     result->trace.empty() ? std::string("n/a") : csv_value(result->trace.back()));
  write_manifest(cfg, "train", args, {{"data", data_path}}, {{"model", model_path}, {"loss_trace", trace_path}});
}

void cmd_evaluate(const config::ExperimentConfig& cfg, const Overrides& o, const std::vector<std::string>& args,
                  std::ostream& out) {
  const auto model_path = pick(o.model_file, cfg.out / "model.json");
  const auto data_path = pick(o.data, cfg.resolved_test());
  const Dataset test = io::ingest(data_path, cfg.schema);
  const MnnModel model = io::load_model(model_path);
  check_compatible(model, cfg);
  const std::string name = o.model_name.empty() ? model_path.stem().string() : o.model_name;

  const auto options = config::eval_options(cfg, use_oracle(cfg));
  const auto run = eval::evaluate_model(model, test, options);
  const auto marginal = eval::model_marginal(model, test, options.times, options.window.event_type);
  const auto curves = eval::marginal_chr(marginal, test, options.window, options.times);

  const auto metrics_path = pick(o.output, cfg.out / "metrics.csv");
  const auto summary_path = pick(o.summary, cfg.out / "summary.json");
  auto csv = open_output(metrics_path);
  csv << "metric,config,time,window,value\n";
  auto row = [&](const std::string& metric, const std::string& time, const std::string& window, double v) {
    csv << metric << "," << name << "," << time << "," << window << "," << csv_value(v) << "\n";
  };

  json summary;
  summary["config"] = name;
  summary["records"] = test.size();
  if (run.ise) {
    row("ise", "", "", *run.ise);
    summary["ise"] = *run.ise;
  }
  using Getter = double (*)(const eval::RmseDecomposition&);
  const std::pair<const char*, Getter> metrics[] = {
      {"mse", [](const eval::RmseDecomposition& d) { return d.mse; }},
      {"rmse", [](const eval::RmseDecomposition& d) { return d.rmse; }},
      {"urmse", [](const eval::RmseDecomposition& d) { return d.urmse; }},
      {"bias", [](const eval::RmseDecomposition& d) { return d.bias; }},
      {"abs_bias", [](const eval::RmseDecomposition& d) { return d.abs_bias; }},
  };
  json maxima = json::object();
  for (const auto& [metric, get] : metrics) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      const auto& d = run.chr[i];
      const double v = d.valid ? get(d) : std::nan("");
      row(metric, csv_value(run.times[i]), "", v);
      if (d.valid && (!best || v > get(run.chr[*best]))) best = i;
    }
    if (best) {
      row(metric, "max", "", get(run.chr[*best]));
      maxima[metric] = {{"value", get(run.chr[*best])}, {"time", run.times[*best]}};
    } else {
      maxima[metric] = nullptr;
    }
  }
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    row("windows_used", csv_value(run.times[i]), "", static_cast<double>(run.chr[i].used));
    row("windows_excluded", csv_value(run.times[i]), "", static_cast<double>(run.chr[i].excluded));
  }
  for (const auto& curve : curves) {
    const std::string t = csv_value(curve.time);
    row("population_km", t, "", curve.population_km);
    for (const auto& p : curve.points) {
      const std::string w = csv_value(p.target);
      row("window_count", t, w, static_cast<double>(p.count));
      row("chr_km", t, w, p.missing ? std::nan("") : p.chr_km);
      row("chr_model", t, w, p.missing ? std::nan("") : p.chr_model);
    }
  }
  csv.close();

  summary["max_over_time"] = maxima;
  json per_time = json::array();
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const auto& d = run.chr[i];
    per_time.push_back({{"time", run.times[i]},
                        {"valid", d.valid},
                        {"mse", number_or_null(d.valid ? d.mse : NAN)},
                        {"rmse", number_or_null(d.valid ? d.rmse : NAN)},
                        {"urmse", number_or_null(d.valid ? d.urmse : NAN)},
                        {"bias", number_or_null(d.valid ? d.bias : NAN)},
                        {"abs_bias", number_or_null(d.valid ? d.abs_bias : NAN)},
                        {"windows_used", d.used},
                        {"windows_excluded", d.excluded}});
  }
  summary["per_time"] = per_time;
  write_text(summary_path, summary.dump(2) + "\n");

  if (run.ise) out << fmt::format("ISE {}\n", csv_value(*run.ise));
  if (maxima["rmse"].is_object()) {
    out << fmt::format("max RMSE {} at t={}\n", csv_value(maxima["rmse"]["value"].get<double>()),
                       csv_value(maxima["rmse"]["time"].get<double>()));
  }
  write_manifest(cfg, "evaluate", args, {{"model", model_path}, {"data", data_path}},
                 {{"metrics", metrics_path}, {"summary", summary_path}});
}

void cmd_cv(const config::ExperimentConfig& cfg, const Overrides& o, const std::vector<std::string>& args,
            std::ostream& out) {
  const auto data_path = pick(o.data, cfg.resolved_train());
  const Dataset data = io::ingest(data_path, cfg.schema);
  std::vector<eval::NamedModelConfig> configs;
  for (const auto& entry : cfg.models) {
    if (!o.model_name.empty() && entry.name != o.model_name) continue;
    eval::NamedModelConfig nc;
    nc.name = entry.name;
    nc.model = config::model_config(entry, cfg.schema, cfg.event_count());
    nc.train = entry.train;
    nc.train.seed = cfg.seed;
    configs.push_back(std::move(nc));
  }
  if (configs.empty()) fail(ErrorKind::Config, "no model named '" + o.model_name + "'");

  eval::CvOptions options;
  options.folds = cfg.folds;
  options.repetitions = cfg.repetitions;
  options.seed = cfg.seed;
  options.threads = cfg.threads;
  options.eval = config::eval_options(cfg, use_oracle(cfg));
  if (data.size() < static_cast<std::size_t>(options.folds)) fail(ErrorKind::Usage, "fewer records than folds");
  const auto result = eval::cross_validate(data, configs, options);

  const auto metrics_path = pick(o.output, cfg.out / "cv_metrics.csv");
  const auto summary_path = pick(o.summary, cfg.out / "cv_summary.json");
  auto csv = open_output(metrics_path);
  csv << "metric,config,time,window,value\n";
  json table = json::object();
  for (const auto& r : result.reports) {
    auto row = [&](const std::string& metric, const std::string& time, double v) {
      csv << metric << "," << r.config << "," << time << ",," << csv_value(v) << "\n";
    };
    for (std::size_t i = 0; i < r.mean.size(); ++i) {
      const std::string t = r.times.empty() ? "" : csv_value(r.times[i]);
      row(r.metric, t, r.mean[i]);
      row(r.metric + "_half_width", t, r.half_width[i]);
    }
    if (!r.times.empty()) {
      row(r.metric, "max", r.aggregate);
      row(r.metric + "_half_width", "max", r.aggregate_half_width);
    }
    auto& entry = table[r.config];
    entry["runs"] = r.runs;
    entry["failed_runs"] = r.failed_runs;
    entry[r.metric] = {{"value", number_or_null(r.aggregate)}, {"half_width", number_or_null(r.aggregate_half_width)}};
    if (!r.times.empty()) entry[r.metric]["time"] = r.aggregate_time;
  }
  csv.close();
  json summary;
  summary["folds"] = cfg.folds;
  summary["repetitions"] = cfg.repetitions;
  summary["configs"] = table;
  summary["failures"] = result.failures;
  write_text(summary_path, summary.dump(2) + "\n");

  for (const auto& r : result.reports) {
    out << fmt::format("{:<12} {:<9} {} +/- {}\n", r.config, r.metric, csv_value(r.aggregate),
                       csv_value(r.aggregate_half_width));
  }
  if (!result.failures.empty()) out << fmt::format("{} failed runs excluded\n", result.failures.size());
  write_manifest(cfg, "cv", args, {{"data", data_path}}, {{"metrics", metrics_path}, {"summary", summary_path}});
}

void cmd_predict(const config::ExperimentConfig& cfg, const Overrides& o, const std::vector<std::string>& args,
                 std::ostream& out) {
  const auto model_path = pick(o.model_file, cfg.out / "model.json");
  const auto data_path = pick(o.data, cfg.resolved_test());
  const Dataset data = io::ingest(data_path, cfg.schema);
  const MnnModel model = io::load_model(model_path);
  check_compatible(model, cfg);
  const auto& times = cfg.predict_times;

  const auto pred_path = pick(o.output, cfg.out / "predictions.csv");
  auto csv = open_output(pred_path);
  csv << "subject,time,survival\n";
  for (std::size_t n = 0; n < data.size(); ++n) {
    const auto s = survival_curve(model, data[n].x, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      csv << n << "," << io::format_double(times[i]) << "," << csv_value(s[i]) << "\n";
    }
  }
  csv.close();
  out << fmt::format("wrote {} survival curves on {} times to {}\n", data.size(), times.size(), pred_path.string());
  write_manifest(cfg, "predict", args, {{"model", model_path}, {"data", data_path}}, {{"predictions", pred_path}});
}

config::ExperimentConfig effective_config(const Overrides& o) {
  config::ExperimentConfig cfg = o.config_path.empty() ? config::ExperimentConfig{} : config::load_config(o.config_path);
  if (o.seed) cfg.seed = *o.seed;
  if (!o.out.empty()) cfg.out = o.out;
  if (o.threads) cfg.threads = *o.threads;
  if (o.n) cfg.n_train = *o.n;
  if (o.n_test) cfg.n_test = *o.n_test;
  if (o.censoring) cfg.uniform_censoring = true;
  if (o.iterations) {
    for (auto& m : cfg.models) m.train.iterations = *o.iterations;
  }
  if (o.folds) cfg.folds = *o.folds;
  if (o.repetitions) cfg.repetitions = *o.repetitions;
  if (!o.times.empty()) cfg.predict_times = config::parse_number_list(o.times);
  cfg.validate();
  return cfg;
}

}  // namespace

std::string file_sha256(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot read " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buffer[1 << 16];
  while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buffer, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto report = [&](const std::string& cls, const std::string& message) {
    err << "mnn-error class=" << cls << " message=" << json(message).dump() << "\n";
  };

  CLI::App app{"Neural survival models with basis-expanded hazards"};
  app.footer(config::defaults_help());
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--config", o.config_path, "Experiment config file")->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "Master seed (default 0)");
  app.add_option("--out", o.out, "Output directory (default out)");
  auto* threads_opt = app.add_option("--threads", threads, "Worker threads for cv (default 1)");

  auto* simulate = app.add_subcommand("simulate", "Write synthetic train and test CSVs");
  simulate->add_option("--n", o.n, "Training records");
  simulate->add_option("--n-test", o.n_test, "Test records");
  simulate->add_flag("--censoring", o.censoring, "Add uniform random censoring");
  simulate->add_option("--output", o.output, "Training CSV path (default <out>/train.csv)");

  auto* train_cmd = app.add_subcommand("train", "Fit a model; writes the model file and loss trace");
  train_cmd->add_option("--data", o.data, "Training CSV (default <out>/train.csv)");
  train_cmd->add_option("--model", o.model_name, "Model section name (default: [model])");
  train_cmd->add_option("--model-file", o.model_file, "Model output (default <out>/model.json)");
  train_cmd->add_option("--iterations", o.iterations, "Override the iteration count");

  auto* evaluate = app.add_subcommand("evaluate", "Metrics of a fitted model on a test set");
  evaluate->add_option("--data", o.data, "Test CSV (default <out>/test.csv)");
  evaluate->add_option("--model-file", o.model_file, "Model file (default <out>/model.json)");
  evaluate->add_option("--name", o.model_name, "Config label in the reports (default: model file stem)");
  evaluate->add_option("--output", o.output, "Metrics CSV (default <out>/metrics.csv)");
  evaluate->add_option("--summary", o.summary, "Summary JSON (default <out>/summary.json)");

  auto* cv = app.add_subcommand("cv", "Repeated k-fold cross-validation of every configured model");
  cv->add_option("--data", o.data, "Dataset CSV (default <out>/train.csv)");
  cv->add_option("--model", o.model_name, "Only this model section");
  cv->add_option("--folds", o.folds, "Folds");
  cv->add_option("--repetitions", o.repetitions, "Repetitions");
  cv->add_option("--iterations", o.iterations, "Override the iteration count");
  cv->add_option("--output", o.output, "Metrics CSV (default <out>/cv_metrics.csv)");
  cv->add_option("--summary", o.summary, "Summary JSON (default <out>/cv_summary.json)");

  auto* predict = app.add_subcommand("predict", "Survival curves S(t|x) per subject");
  predict->add_option("--data", o.data, "Covariates CSV (default <out>/test.csv)");
  predict->add_option("--model-file", o.model_file, "Model file (default <out>/model.json)");
  predict->add_option("--times", o.times, "Time grid, list or start:end:step");
  predict->add_option("--output", o.output, "Predictions CSV (default <out>/predictions.csv)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report("usage", e.what());
    return 2;
  }
  if (*seed_opt) o.seed = seed;
  if (*threads_opt) o.threads = threads;

  try {
    const auto cfg = effective_config(o);
    fs::create_directories(cfg.out);
    if (*simulate) cmd_simulate(cfg, o, args, out);
    else if (*train_cmd) cmd_train(cfg, o, args, out);
    else if (*evaluate) cmd_evaluate(cfg, o, args, out);
    else if (*cv) cmd_cv(cfg, o, args, out);
    else if (*predict) cmd_predict(cfg, o, args, out);
    return 0;
  } catch (const Error& e) {
    report(kind_name(e.kind()), e.what());
    return e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::Config ? 2 : 1;
  } catch (const fs::filesystem_error& e) {
    report("io", e.what());
    return 1;
  } catch (const std::exception& e) {
    report("internal", e.what());
    return 1;
  }
}

}  // namespace mnn::cli
