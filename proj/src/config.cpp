#include "mnn/config.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include "mnn/error.hpp"
#include "mnn/synthetic.hpp"

namespace mnn::config {

namespace pt = boost::property_tree;

namespace {

using KeyMap = std::map<std::string, std::string>;

const std::vector<double> kQrKnots{0.0, 0.01, 0.03, 0.06, 0.1, 0.2};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) fail(ErrorKind::Config, fmt::format("{}: not a number: '{}'", key, text));
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) fail(ErrorKind::Config, fmt::format("{}: not an integer: '{}'", key, text));
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  fail(ErrorKind::Config, fmt::format("{}: not a boolean: '{}'", key, text));
}

std::vector<int> parse_int_list(const std::string& key, const std::string& text) {
  std::vector<int> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_integer(key, item)));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + io::format_double(v[i]);
  return s;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string section_text(const std::string& name, const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string s = "[" + name + "]\n";
  for (const auto& [k, v] : kv) s += k + " = " + v + "\n";
  return s + "\n";
}

// Applies a train-section key; returns false when the key is not a trainer setting.
bool apply_train_key(TrainConfig& t, const std::string& key, const std::string& value) {
  if (key == "step_size") t.step_size = parse_double(key, value);
  else if (key == "beta1") t.beta1 = parse_double(key, value);
  else if (key == "beta2") t.beta2 = parse_double(key, value);
  else if (key == "epsilon") t.epsilon = parse_double(key, value);
  else if (key == "clip_norm") t.clip_norm = parse_double(key, value);
  else if (key == "iterations") t.iterations = static_cast<int>(parse_integer(key, value));
  else if (key == "batch_size") t.batch_size = static_cast<int>(parse_integer(key, value));
  else if (key == "event_batch_size") t.event_batch_size = static_cast<int>(parse_integer(key, value));
  else return false;
  return true;
}

std::vector<std::pair<std::string, std::string>> train_pairs(const TrainConfig& t) {
  return {{"step_size", io::format_double(t.step_size)},
          {"beta1", io::format_double(t.beta1)},
          {"beta2", io::format_double(t.beta2)},
          {"epsilon", io::format_double(t.epsilon)},
          {"clip_norm", io::format_double(t.clip_norm)},
          {"iterations", std::to_string(t.iterations)},
          {"batch_size", std::to_string(t.batch_size)},
          {"event_batch_size", std::to_string(t.event_batch_size)}};
}

ModelEntry build_model(const std::string& name, const KeyMap& keys, const TrainConfig& train) {
  ModelEntry m;
  m.name = name;
  m.train = train;
  for (const auto& [key, value] : keys) {
    const std::string where = fmt::format("model '{}' {}", name, key);
    if (key == "kind") m.kind = parse_model_kind(trim(value));
    else if (key == "basis") m.basis = parse_basis_kind(trim(value));
    else if (key == "knots") m.knots = parse_number_list(value);
    else if (key.rfind("knots_", 0) == 0) {
      const auto j = parse_integer(where, key.substr(6));
      if (j < 1 || j > 64) fail(ErrorKind::Config, where + ": event index out of range");
      if (m.event_knots.size() < static_cast<std::size_t>(j)) m.event_knots.resize(static_cast<std::size_t>(j));
      m.event_knots[static_cast<std::size_t>(j - 1)] = parse_number_list(value);
    } else if (key == "h") m.h = parse_positivity(trim(value));
    else if (key == "embedding_width") m.embedding_width = static_cast<int>(parse_integer(where, value));
    else if (key == "embedding_dropout") m.embedding_dropout = parse_double(where, value);
    else if (key == "hidden") m.hidden = parse_int_list(where, value);
    else if (key == "hidden_dropout") m.hidden_dropout = parse_double(where, value);
    else if (!apply_train_key(m.train, key, value)) fail(ErrorKind::Config, "unknown key " + where);
  }
  return m;
}

KeyMap flatten(const pt::ptree& section) {
  KeyMap out;
  for (const auto& [key, child] : section) out[key] = child.data();
  return out;
}

}  // namespace

std::vector<double> ModelEntry::knots_for(int event) const {
  const auto j = static_cast<std::size_t>(event);
  if (j < event_knots.size() && !event_knots[j].empty()) return event_knots[j];
  if (!knots.empty()) return knots;
  return kind == ModelKind::Qr ? kQrKnots : uniform_knots(0.0, 10.0, 2.0);
}

ExperimentConfig::ExperimentConfig() {
  models.push_back(ModelEntry{});
  eval_times = eval::uniform_grid(0.5, 9.5, 0.5);
  window_targets = eval::uniform_grid(-2.0, 2.0, 0.25);
  predict_times = eval::uniform_grid(0.0, 10.0, 1.0);
}

std::filesystem::path ExperimentConfig::resolved_train() const {
  return train_path.empty() ? out / "train.csv" : train_path;
}

std::filesystem::path ExperimentConfig::resolved_test() const {
  return test_path.empty() ? out / "test.csv" : test_path;
}

int ExperimentConfig::event_count() const { return schema.event_types().value_or(1); }

const ModelEntry& ExperimentConfig::model(const std::string& name) const {
  for (const auto& m : models) {
    if (m.name == name) return m;
  }
  fail(ErrorKind::Config, "no model named '" + name + "'");
}

void ExperimentConfig::validate() const {
  schema.validate();
  if (threads < 1) fail(ErrorKind::Config, "threads must be >= 1");
  if (n_train < 1 || n_test < 1) fail(ErrorKind::Config, "simulate sizes must be positive");
  if (!(horizon > 0.0)) fail(ErrorKind::Config, "horizon must be positive");
  if (models.empty()) fail(ErrorKind::Config, "no model configured");
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t k = 0; k < i; ++k) {
      if (models[i].name == models[k].name) fail(ErrorKind::Config, "duplicate model name " + models[i].name);
    }
    // Building the model config checks knots, widths and dropout rates.
    (void)model_config(models[i], schema, event_count());
    models[i].train.validate();
  }
  if (eval_times.empty()) fail(ErrorKind::Config, "eval times must not be empty");
  for (std::size_t i = 0; i < eval_times.size(); ++i) {
    if (!(eval_times[i] > 0.0) || (i && !(eval_times[i] > eval_times[i - 1]))) {
      fail(ErrorKind::Config, "eval times must be positive and increasing");
    }
  }
  for (std::size_t i = 1; i < predict_times.size(); ++i) {
    if (!(predict_times[i] > predict_times[i - 1])) fail(ErrorKind::Config, "predict times must be increasing");
  }
  if (!(window_width > 0.0)) fail(ErrorKind::Config, "window width must be positive");
  if (window_attribute < 0 || window_attribute >= schema.input_spec().numeric_input_count) {
    fail(ErrorKind::Config, "window attribute must index a numeric covariate");
  }
  if (eval_event_type && (*eval_event_type < 0 || *eval_event_type >= event_count())) {
    fail(ErrorKind::Config, "eval event_type out of range");
  }
  if (!(ise_horizon > 0.0) || !(ise_step > 0.0)) fail(ErrorKind::Config, "ISE horizon and step must be positive");
  if (oracle != "auto" && oracle != "synthetic" && oracle != "none") {
    fail(ErrorKind::Config, "oracle must be auto, synthetic or none");
  }
  if (folds < 2) fail(ErrorKind::Config, "cv folds must be >= 2");
  if (repetitions < 1) fail(ErrorKind::Config, "cv repetitions must be >= 1");
}

std::vector<double> parse_number_list(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) return {};
  if (t.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) fail(ErrorKind::Config, "range must be start:end:step, got '" + t + "'");
    const double a = parse_double("range", parts[0]);
    const double b = parse_double("range", parts[1]);
    const double step = parse_double("range", parts[2]);
    if (!(step > 0.0) || !(b >= a)) fail(ErrorKind::Config, "bad range '" + t + "'");
    return eval::uniform_grid(a, b, step);
  }
  std::vector<double> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double("list", item));
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  // The INI reader only knows ';' comments.
  std::string cleaned;
  std::stringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    if (trim(line).rfind('#', 0) == 0) continue;
    cleaned += line + "\n";
  }
  pt::ptree tree;
  try {
    std::stringstream in(cleaned);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorKind::Config, std::string("config: ") + e.what());
  }

  ExperimentConfig c;
  TrainConfig train;
  KeyMap base_model;
  std::vector<std::pair<std::string, KeyMap>> named;

  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) fail(ErrorKind::Config, "config: key outside a section: " + section);
    const KeyMap keys = flatten(body);
    auto unknown = [&](const std::string& key) {
      fail(ErrorKind::Config, fmt::format("config: unknown key [{}] {}", section, key));
    };
    if (section == "experiment") {
      for (const auto& [k, v] : keys) {
        if (k == "seed") c.seed = static_cast<std::uint64_t>(parse_integer(k, v));
        else if (k == "out") c.out = trim(v);
        else if (k == "threads") c.threads = static_cast<int>(parse_integer(k, v));
        else unknown(k);
      }
    } else if (section == "data") {
      for (const auto& [k, v] : keys) {
        if (k == "schema") c.schema = io::DatasetSchema::parse(v);
        else if (k == "train") c.train_path = trim(v);
        else if (k == "test") c.test_path = trim(v);
        else unknown(k);
      }
    } else if (section == "simulate") {
      for (const auto& [k, v] : keys) {
        if (k == "n_train") c.n_train = static_cast<std::size_t>(parse_integer(k, v));
        else if (k == "n_test") c.n_test = static_cast<std::size_t>(parse_integer(k, v));
        else if (k == "horizon") c.horizon = parse_double(k, v);
        else if (k == "uniform_censoring") c.uniform_censoring = parse_bool(k, v);
        else unknown(k);
      }
    } else if (section == "train") {
      for (const auto& [k, v] : keys) {
        if (!apply_train_key(train, k, v)) unknown(k);
      }
    } else if (section == "model") {
      base_model = keys;
    } else if (section.rfind("model:", 0) == 0) {
      const std::string name = trim(section.substr(6));
      if (name.empty()) fail(ErrorKind::Config, "config: empty model name");
      named.emplace_back(name, keys);
    } else if (section == "eval") {
      for (const auto& [k, v] : keys) {
        if (k == "times") c.eval_times = parse_number_list(v);
        else if (k == "window_attribute") c.window_attribute = static_cast<int>(parse_integer(k, v));
        else if (k == "window_width") c.window_width = parse_double(k, v);
        else if (k == "window_targets") c.window_targets = parse_number_list(v);
        else if (k == "event_type") {
          const std::string t = trim(v);
          if (t == "none" || t.empty()) c.eval_event_type.reset();
          else c.eval_event_type = static_cast<int>(parse_integer(k, t)) - 1;
        } else if (k == "ise_horizon") c.ise_horizon = parse_double(k, v);
        else if (k == "ise_step") c.ise_step = parse_double(k, v);
        else if (k == "oracle") c.oracle = trim(v);
        else unknown(k);
      }
    } else if (section == "cv") {
      for (const auto& [k, v] : keys) {
        if (k == "folds") c.folds = static_cast<int>(parse_integer(k, v));
        else if (k == "repetitions") c.repetitions = static_cast<int>(parse_integer(k, v));
        else unknown(k);
      }
    } else if (section == "predict") {
      for (const auto& [k, v] : keys) {
        if (k == "times") c.predict_times = parse_number_list(v);
        else unknown(k);
      }
    } else {
      fail(ErrorKind::Config, "config: unknown section [" + section + "]");
    }
  }

  c.models.clear();
  std::string base_name = "default";
  if (auto it = base_model.find("name"); it != base_model.end()) {
    base_name = trim(it->second);
    base_model.erase(it);
  }
  c.models.push_back(build_model(base_name, base_model, train));
  for (auto& [name, keys] : named) {
    if (keys.count("name")) fail(ErrorKind::Config, "config: 'name' is only valid in [model]");
    KeyMap merged = base_model;
    for (const auto& [k, v] : keys) merged[k] = v;
    c.models.push_back(build_model(name, merged, train));
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

namespace {

std::vector<std::pair<std::string, std::string>> model_pairs(const ModelEntry& m, bool with_name) {
  std::vector<std::pair<std::string, std::string>> kv;
  if (with_name) kv.emplace_back("name", m.name);
  kv.emplace_back("kind", model_kind_name(m.kind));
  kv.emplace_back("basis", basis_kind_name(m.basis));
  kv.emplace_back("knots", join(m.knots));
  for (std::size_t j = 0; j < m.event_knots.size(); ++j) {
    if (!m.event_knots[j].empty()) kv.emplace_back(fmt::format("knots_{}", j + 1), join(m.event_knots[j]));
  }
  kv.emplace_back("h", positivity_name(m.h));
  kv.emplace_back("embedding_width", std::to_string(m.embedding_width));
  kv.emplace_back("embedding_dropout", io::format_double(m.embedding_dropout));
  kv.emplace_back("hidden", join(m.hidden));
  kv.emplace_back("hidden_dropout", io::format_double(m.hidden_dropout));
  for (auto& p : train_pairs(m.train)) kv.push_back(p);
  return kv;
}

}  // namespace

std::string to_text(const ExperimentConfig& c) {
  std::string s;
  s += section_text("experiment", {{"seed", std::to_string(c.seed)},
                                   {"out", c.out.string()},
                                   {"threads", std::to_string(c.threads)}});
  std::vector<std::pair<std::string, std::string>> data{{"schema", c.schema.to_string()}};
  if (!c.train_path.empty()) data.emplace_back("train", c.train_path.string());
  if (!c.test_path.empty()) data.emplace_back("test", c.test_path.string());
  s += section_text("data", data);
  s += section_text("simulate", {{"n_train", std::to_string(c.n_train)},
                                 {"n_test", std::to_string(c.n_test)},
                                 {"horizon", io::format_double(c.horizon)},
                                 {"uniform_censoring", c.uniform_censoring ? "true" : "false"}});
  // Each model is written out in full, so [train] keeps the defaults.
  s += section_text("model", model_pairs(c.models.front(), true));
  for (std::size_t i = 1; i < c.models.size(); ++i) {
    s += section_text("model:" + c.models[i].name, model_pairs(c.models[i], false));
  }
  s += section_text("eval", {{"times", join(c.eval_times)},
                             {"window_attribute", std::to_string(c.window_attribute)},
                             {"window_width", io::format_double(c.window_width)},
                             {"window_targets", join(c.window_targets)},
                             {"event_type", c.eval_event_type ? std::to_string(*c.eval_event_type + 1) : "none"},
                             {"ise_horizon", io::format_double(c.ise_horizon)},
                             {"ise_step", io::format_double(c.ise_step)},
                             {"oracle", c.oracle}});
  s += section_text("cv", {{"folds", std::to_string(c.folds)}, {"repetitions", std::to_string(c.repetitions)}});
  s += section_text("predict", {{"times", join(c.predict_times)}});
  return s;
}

std::string defaults_help() {
  return R"(Config file (INI style; '#' or ';' comments). Defaults:

[experiment]
seed = 0                  ; also --seed
out = out                 ; output directory, also --out
threads = 1               ; cv worker threads, also --threads
[data]
schema = x0:numeric,x1:numeric,time:time,event_type:event_type(2),event:event
                          ; roles: numeric, boolean, categorical(N), time,
                          ; event_type(J) (1-based in files), event (0/1)
train = <out>/train.csv
test = <out>/test.csv
[simulate]
n_train = 1000
n_test = 1000
horizon = 10              ; administrative censoring time
uniform_censoring = false ; extra U[0, horizon] censoring
[model]                   ; default model; [model:NAME] adds named models
name = default            ; that inherit these keys
kind = ph                 ; ph | qr | dh
basis = linear            ; constant | linear
knots = 0:10:2            ; qr default 0,0.01,0.03,0.06,0.1,0.2 (-log tau axis)
knots_J = ...             ; per event type override, J 1-based
h = exp                   ; exp | softplus
embedding_width = 10
embedding_dropout = 0.7
hidden = 100,100          ; empty for a linear network
hidden_dropout = 0.1
[train]                   ; any key may also be set inside a model section
step_size = 0.001
beta1 = 0.9
beta2 = 0.999
epsilon = 1e-08
clip_norm = 10
iterations = 1000
batch_size = 256
event_batch_size = 256    ; uncensored batch of the ph objective
[eval]
times = 0.5:9.5:0.5       ; CHR time grid
window_attribute = 0      ; numeric covariate index
window_width = 4
window_targets = -2:2:0.25
event_type = none         ; or J for cause-specific survival
ise_horizon = 10
ise_step = 0.1
oracle = auto             ; auto (synthetic schema) | synthetic | none
[cv]
folds = 5
repetitions = 1
[predict]
times = 0:10:1

Lists: "a,b,c" or "start:end:step" (inclusive).
)";
}

ModelConfig model_config(const ModelEntry& entry, const io::DatasetSchema& schema, int event_count) {
  ModelConfig mc;
  mc.kind = entry.kind;
  mc.spec = schema.input_spec();
  mc.spec.embedding_width = entry.embedding_width;
  mc.spec.embedding_dropout = entry.embedding_dropout;
  mc.spec.hidden_widths = entry.hidden;
  mc.spec.hidden_dropout = entry.hidden_dropout;
  mc.h.kind = entry.h;
  int outputs = 0;
  for (int j = 0; j < event_count; ++j) {
    mc.bases.emplace_back(KnotGrid(entry.knots_for(j)), entry.basis);
    outputs += static_cast<int>(mc.bases.back().size());
  }
  mc.spec.output_count = outputs;
  mc.spec.validate();
  return mc;
}

eval::EvalOptions eval_options(const ExperimentConfig& c, bool with_oracle) {
  eval::EvalOptions o;
  o.times = c.eval_times;
  o.window.attribute = c.window_attribute;
  o.window.width = c.window_width;
  o.window.targets = c.window_targets;
  o.window.event_type = c.eval_event_type;
  o.ise.horizon = c.ise_horizon;
  o.ise.grid_step = c.ise_step;
  if (with_oracle) o.truth = synthetic::true_survival_curve;
  return o;
}

}  // namespace mnn::config
