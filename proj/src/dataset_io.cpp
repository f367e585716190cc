#include "mnn/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <fmt/format.h>

#include "mnn/error.hpp"

namespace mnn::io {
namespace {

const char* role_name(ColumnRole role) {
  switch (role) {
    case ColumnRole::Numeric: return "numeric";
    case ColumnRole::Boolean: return "boolean";
    case ColumnRole::Categorical: return "categorical";
    case ColumnRole::Time: return "time";
    case ColumnRole::EventType: return "event_type";
    case ColumnRole::EventIndicator: return "event";
  }
  return "?";
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  boost::split(fields, line, boost::is_any_of(","));
  for (auto& f : fields) boost::trim(f);
  return fields;
}

std::optional<double> parse_number(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

DatasetSchema DatasetSchema::parse(const std::string& text) {
  DatasetSchema schema;
  for (const auto& item : split_fields(text)) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    if (colon == std::string::npos) fail(ErrorKind::Config, "schema column '" + item + "' lacks a type");
    ColumnDescriptor col;
    col.name = boost::trim_copy(item.substr(0, colon));
    std::string type = boost::trim_copy(item.substr(colon + 1));
    const auto paren = type.find('(');
    if (paren != std::string::npos) {
      if (type.back() != ')') fail(ErrorKind::Config, "malformed schema type '" + type + "'");
      const auto count = parse_number(type.substr(paren + 1, type.size() - paren - 2));
      if (!count || *count < 1 || *count != std::floor(*count)) {
        fail(ErrorKind::Config, "malformed count in schema type '" + type + "'");
      }
      col.cardinality = static_cast<int>(*count);
      type = type.substr(0, paren);
    }
    if (type == "numeric") col.role = ColumnRole::Numeric;
    else if (type == "boolean") col.role = ColumnRole::Boolean;
    else if (type == "categorical") col.role = ColumnRole::Categorical;
    else if (type == "time") col.role = ColumnRole::Time;
    else if (type == "event_type") col.role = ColumnRole::EventType;
    else if (type == "event") col.role = ColumnRole::EventIndicator;
    else fail(ErrorKind::Config, "unknown schema column type '" + type + "'");
    schema.columns.push_back(col);
  }
  schema.validate();
  return schema;
}

DatasetSchema DatasetSchema::synthetic() {
  return parse("x0:numeric,x1:numeric,time:time,event_type:event_type(2),event:event");
}

std::string DatasetSchema::to_string() const {
  std::string out;
  for (const auto& c : columns) {
    if (!out.empty()) out += ",";
    out += c.name + ":" + role_name(c.role);
    if (c.cardinality > 0) out += fmt::format("({})", c.cardinality);
  }
  return out;
}

void DatasetSchema::validate() const {
  int time = 0, type = 0, indicator = 0;
  for (const auto& c : columns) {
    if (c.name.empty()) fail(ErrorKind::Config, "schema column without a name");
    if (c.role == ColumnRole::Time) ++time;
    if (c.role == ColumnRole::EventType) ++type;
    if (c.role == ColumnRole::EventIndicator) ++indicator;
    if (c.role == ColumnRole::Categorical && c.cardinality < 1) {
      fail(ErrorKind::Config, "categorical column '" + c.name + "' needs a cardinality");
    }
  }
  if (time != 1 || type != 1 || indicator != 1) {
    fail(ErrorKind::Config, "schema needs exactly one time, one event_type and one event column");
  }
}

NetworkSpec DatasetSchema::input_spec() const {
  NetworkSpec spec;
  for (const auto& c : columns) {
    if (c.role == ColumnRole::Numeric) ++spec.numeric_input_count;
    if (c.role == ColumnRole::Boolean) ++spec.boolean_input_count;
    if (c.role == ColumnRole::Categorical) spec.categorical_cardinalities.push_back(c.cardinality);
  }
  return spec;
}

std::optional<int> DatasetSchema::event_types() const {
  for (const auto& c : columns) {
    if (c.role == ColumnRole::EventType && c.cardinality > 0) return c.cardinality;
  }
  return std::nullopt;
}

Dataset parse_csv(std::istream& in, const DatasetSchema& schema, const std::string& source) {
  schema.validate();
  std::string line;
  std::size_t line_no = 0;
  auto error = [&](const std::string& column, const std::string& msg) {
    fail(ErrorKind::Data, fmt::format("{}:{}: column '{}': {}", source, line_no, column, msg));
  };

  if (!std::getline(in, line)) fail(ErrorKind::Data, source + ": missing header row");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_fields(line);
  if (header.size() != schema.columns.size()) {
    fail(ErrorKind::Data, fmt::format("{}:1: header has {} columns, schema declares {}", source,
                                      header.size(), schema.columns.size()));
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] != schema.columns[i].name) {
      fail(ErrorKind::Data, fmt::format("{}:1: header column {} is '{}', schema expects '{}'", source,
                                        i + 1, header[i], schema.columns[i].name));
    }
  }

  const auto event_types = schema.event_types();
  Dataset data;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (boost::trim_copy(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != schema.columns.size()) {
      fail(ErrorKind::Data, fmt::format("{}:{}: expected {} fields, found {}", source, line_no,
                                        schema.columns.size(), fields.size()));
    }
    SurvivalRecord rec;
    int raw_type = 0;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto& col = schema.columns[i];
      const auto value = parse_number(fields[i]);
      if (!value) error(col.name, "'" + fields[i] + "' is not a number");
      if (!std::isfinite(*value)) error(col.name, "value is not finite");
      const double v = *value;
      switch (col.role) {
        case ColumnRole::Numeric:
          rec.x.numeric.push_back(v);
          break;
        case ColumnRole::Boolean:
          if (v != 0.0 && v != 1.0) error(col.name, "boolean must be 0 or 1");
          rec.x.boolean.push_back(v);
          break;
        case ColumnRole::Categorical:
          if (v != std::floor(v) || v < 0.0 || v >= col.cardinality) {
            error(col.name, fmt::format("unknown categorical level {}", fields[i]));
          }
          rec.x.categorical.push_back(static_cast<int>(v));
          break;
        case ColumnRole::Time:
          if (v < 0.0) error(col.name, "time must be >= 0");
          rec.time = v;
          break;
        case ColumnRole::EventType:
          if (v != std::floor(v) || v < 0.0) error(col.name, "event type must be a nonnegative integer");
          raw_type = static_cast<int>(v);
          break;
        case ColumnRole::EventIndicator:
          if (v != 0.0 && v != 1.0) error(col.name, "event indicator must be 0 or 1");
          rec.event = v == 1.0;
          break;
      }
    }
    if (rec.event) {
      const auto& name = std::find_if(schema.columns.begin(), schema.columns.end(), [](const auto& c) {
                           return c.role == ColumnRole::EventType;
                         })->name;
      if (raw_type < 1) error(name, "event type must be >= 1 on uncensored rows");
      if (event_types && raw_type > *event_types) {
        error(name, fmt::format("event type {} exceeds declared count {}", raw_type, *event_types));
      }
      rec.event_type = raw_type - 1;
    }
    data.push_back(std::move(rec));
  }
  return data;
}

Dataset ingest(const std::filesystem::path& path, const DatasetSchema& schema) {
  if (!std::filesystem::exists(path)) {
    fail(ErrorKind::DatasetNotFound, "dataset not found: " + path.string());
  }
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open dataset " + path.string());
  return parse_csv(in, schema, path.string());
}

void write_csv(std::ostream& out, const Dataset& data, const DatasetSchema& schema) {
  schema.validate();
  for (std::size_t i = 0; i < schema.columns.size(); ++i) {
    out << (i ? "," : "") << schema.columns[i].name;
  }
  out << "\n";
  for (const auto& rec : data) {
    std::size_t num = 0, boo = 0, cat = 0;
    for (std::size_t i = 0; i < schema.columns.size(); ++i) {
      if (i) out << ",";
      switch (schema.columns[i].role) {
        case ColumnRole::Numeric: out << format_double(rec.x.numeric.at(num++)); break;
        case ColumnRole::Boolean: out << (rec.x.boolean.at(boo++) != 0.0 ? 1 : 0); break;
        case ColumnRole::Categorical: out << rec.x.categorical.at(cat++); break;
        case ColumnRole::Time: out << format_double(rec.time); break;
        case ColumnRole::EventType: out << (rec.event ? rec.event_type + 1 : 0); break;
        case ColumnRole::EventIndicator: out << (rec.event ? 1 : 0); break;
      }
    }
    out << "\n";
  }
}

void write_dataset(const std::filesystem::path& path, const Dataset& data, const DatasetSchema& schema) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
  write_csv(out, data, schema);
}

}  // namespace mnn::io
