#include "mnn/model_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

#include "mnn/error.hpp"

namespace mnn::io {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json spec_to_json(const NetworkSpec& s) {
  return {{"numeric_input_count", s.numeric_input_count},
          {"boolean_input_count", s.boolean_input_count},
          {"categorical_cardinalities", s.categorical_cardinalities},
          {"embedding_width", s.embedding_width},
          {"embedding_dropout", s.embedding_dropout},
          {"hidden_widths", s.hidden_widths},
          {"hidden_dropout", s.hidden_dropout},
          {"output_count", s.output_count}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.numeric_input_count = j.at("numeric_input_count").get<int>();
  s.boolean_input_count = j.at("boolean_input_count").get<int>();
  s.categorical_cardinalities = j.at("categorical_cardinalities").get<std::vector<int>>();
  s.embedding_width = j.at("embedding_width").get<int>();
  s.embedding_dropout = j.at("embedding_dropout").get<double>();
  s.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  s.hidden_dropout = j.at("hidden_dropout").get<double>();
  s.output_count = j.at("output_count").get<int>();
  return s;
}

json span_array(std::span<const double> values) { return json(std::vector<double>(values.begin(), values.end())); }

void copy_into(const json& arr, std::span<double> dest, const char* what) {
  const auto values = arr.get<std::vector<double>>();
  if (values.size() != dest.size()) {
    fail(ErrorKind::Data, std::string("model file: wrong element count for ") + what);
  }
  std::copy(values.begin(), values.end(), dest.begin());
}

// JSON has no infinity; the absorbing terminal jump is spelled "inf".
json jump_value(double v) { return std::isinf(v) ? json("inf") : json(v); }

double jump_from(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    fail(ErrorKind::Data, "model file: unexpected string in baseline jumps");
  }
  return j.get<double>();
}

}  // namespace

std::string model_to_json(const MnnModel& model) {
  const MnnCore& core = core_of(model);
  json doc;
  doc["format"] = "mnn-model";
  doc["version"] = kFormatVersion;
  doc["kind"] = model_kind_name(kind_of(model));
  doc["positivity"] = positivity_name(core.h.kind);

  json net;
  net["spec"] = spec_to_json(core.net.spec);
  json layers = json::array();
  for (std::size_t l = 0; l < core.net.layout.layers.size(); ++l) {
    const auto& d = core.net.layout.layers[l];
    layers.push_back({{"rows", d.rows},
                      {"cols", d.cols},
                      {"weight", span_array(core.net.weight(l))},
                      {"bias", span_array(core.net.bias(l))}});
  }
  net["layers"] = layers;
  json embeddings = json::array();
  for (std::size_t t = 0; t < core.net.layout.embeddings.size(); ++t) {
    const auto& e = core.net.layout.embeddings[t];
    embeddings.push_back({{"rows", e.rows}, {"cols", e.cols}, {"values", span_array(core.net.embedding(t))}});
  }
  net["embeddings"] = embeddings;
  doc["network"] = net;

  json bases = json::array();
  for (const auto& b : core.bases) {
    const auto knots = b.grid().knots();
    bases.push_back({{"kind", basis_kind_name(b.kind())},
                     {"knots", std::vector<double>(knots.begin(), knots.end())}});
  }
  doc["bases"] = bases;

  if (const auto* ph = std::get_if<PhModel>(&model)) {
    json baseline = json::array();
    for (const auto& b : ph->baseline) {
      json jumps = json::array();
      for (double v : b.jumps()) jumps.push_back(jump_value(v));
      baseline.push_back({{"times", std::vector<double>(b.times().begin(), b.times().end())}, {"jumps", jumps}});
    }
    doc["baseline"] = baseline;
  }
  return doc.dump(1);
}

MnnModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::Data, std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "mnn-model") fail(ErrorKind::Data, "not an mnn model file");
    if (doc.at("version").get<int>() != kFormatVersion) fail(ErrorKind::Data, "unsupported model file version");

    MnnCore core;
    core.h.kind = parse_positivity(doc.at("positivity").get<std::string>());
    const auto& net = doc.at("network");
    core.net = NetworkParams::zeros(spec_from_json(net.at("spec")));
    const auto& layers = net.at("layers");
    if (layers.size() != core.net.layout.layers.size()) fail(ErrorKind::Data, "model file: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      copy_into(layers[l].at("weight"), core.net.weight(l), "layer weight");
      copy_into(layers[l].at("bias"), core.net.bias(l), "layer bias");
    }
    const auto& embeddings = net.at("embeddings");
    if (embeddings.size() != core.net.layout.embeddings.size()) {
      fail(ErrorKind::Data, "model file: embedding count mismatch");
    }
    for (std::size_t t = 0; t < embeddings.size(); ++t) {
      copy_into(embeddings[t].at("values"), core.net.embedding(t), "embedding table");
    }
    for (const auto& b : doc.at("bases")) {
      core.bases.emplace_back(KnotGrid(b.at("knots").get<std::vector<double>>()),
                              parse_basis_kind(b.at("kind").get<std::string>()));
    }
    core.validate();

    switch (parse_model_kind(doc.at("kind").get<std::string>())) {
      case ModelKind::Qr: return QrModel{std::move(core)};
      case ModelKind::Dh: return DhModel{std::move(core)};
      case ModelKind::Ph: {
        PhModel ph{std::move(core), {}};
        if (doc.contains("baseline")) {
          const auto& baseline = doc.at("baseline");
          if (baseline.size() != ph.core.bases.size()) fail(ErrorKind::Data, "model file: baseline count mismatch");
          for (std::size_t j = 0; j < baseline.size(); ++j) {
            std::vector<double> jumps;
            for (const auto& v : baseline[j].at("jumps")) jumps.push_back(jump_from(v));
            ph.baseline.emplace_back(ph.core.bases[j], baseline[j].at("times").get<std::vector<double>>(),
                                     std::move(jumps));
          }
        }
        return ph;
      }
    }
  } catch (const json::exception& e) {
    fail(ErrorKind::Data, std::string("malformed model file: ") + e.what());
  }
  fail(ErrorKind::Data, "malformed model file");
}

void save_model(const std::filesystem::path& path, const MnnModel& model) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write model file " + path.string());
  out << model_to_json(model) << "\n";
}

MnnModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorKind::Io, "model file not found: " + path.string());
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return model_from_json(buffer.str());
}

}  // namespace mnn::io
