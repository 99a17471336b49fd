#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mb {

struct AggregateRow {
  // Values of the group_by fields, in order.
  std::vector<std::string> key;
  // Empty for a group holding only error records.
  std::string metric;
  std::optional<double> mean;
  std::size_t count = 0;
  std::size_t errors = 0;
};

struct AggregateTable {
  std::vector<std::string> group_by;
  std::vector<AggregateRow> rows;

  std::string to_text() const;
  std::string to_csv() const;
};

inline const std::vector<std::string> kDefaultGroupBy = {"pipeline_id", "target_kind", "missing_rate"};

// Means per group and metric over sample records, plus corpus metrics from
// aggregate records. Error records are excluded from means and counted per
// group. Throws schema_version_mismatch for records of another version and
// parse_error for unreadable lines.
AggregateTable aggregate(const std::vector<std::filesystem::path>& results_files,
                         const std::vector<std::string>& group_by = kDefaultGroupBy);

}  // namespace mb
