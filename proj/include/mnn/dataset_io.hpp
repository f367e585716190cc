#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mnn/data.hpp"
#include "mnn/network.hpp"

namespace mnn::io {

enum class ColumnRole { Numeric, Boolean, Categorical, Time, EventType, EventIndicator };

struct ColumnDescriptor {
  std::string name;
  ColumnRole role = ColumnRole::Numeric;
  int cardinality = 0;  // categorical levels, or event-type count when > 0

  bool operator==(const ColumnDescriptor&) const = default;
};

/// Ordered CSV columns. Text form, one descriptor per column:
///   x0:numeric, smoker:boolean, site:categorical(4), time:time,
///   cause:event_type(2), died:event
/// Event types are 1-based in files (0 allowed on censored rows) and
/// 0-based in memory.
struct DatasetSchema {
  std::vector<ColumnDescriptor> columns;

  static DatasetSchema parse(const std::string& text);
  /// The benchmark generator's layout: x0, x1, time, event_type(2), event.
  static DatasetSchema synthetic();

  std::string to_string() const;
  void validate() const;
  /// Network input arity implied by the covariate columns.
  NetworkSpec input_spec() const;
  /// Declared event-type count, if any.
  std::optional<int> event_types() const;

  bool operator==(const DatasetSchema&) const = default;
};

/// Parses CSV text with a header row matching the schema's column names.
/// Errors name the 1-based line and the column.
Dataset parse_csv(std::istream& in, const DatasetSchema& schema, const std::string& source = "<stream>");

/// Throws ErrorKind::DatasetNotFound when `path` does not exist.
Dataset ingest(const std::filesystem::path& path, const DatasetSchema& schema);

void write_csv(std::ostream& out, const Dataset& data, const DatasetSchema& schema);
void write_dataset(const std::filesystem::path& path, const Dataset& data, const DatasetSchema& schema);

/// 17 significant digits; round-trips every finite double.
std::string format_double(double v);

}  // namespace mnn::io
