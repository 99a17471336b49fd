#include "modbridge/harness/aggregate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>

#include "modbridge/core/json.hpp"
#include "modbridge/error.hpp"
#include "modbridge/harness/experiment.hpp"

namespace mb {

namespace {

std::string key_value(const json& record, const std::string& field) {
  auto it = record.find(field);
  if (it == record.end() || it->is_null()) return "-";
  if (it->is_string()) return it->get<std::string>();
  return it->dump();
}

std::string format_mean(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

struct Group {
  std::map<std::string, std::vector<double>> values;
  std::size_t errors = 0;
};

}  // namespace

AggregateTable aggregate(const std::vector<std::filesystem::path>& results_files,
                         const std::vector<std::string>& group_by) {
  require(!results_files.empty(), "aggregate needs at least one results file");
  std::map<std::vector<std::string>, Group> groups;
  for (const auto& path : results_files) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open " + path.string());
    std::vector<json> records;
    // Only the last aggregate record per config counts (resumed runs may
    // have written more than one).
    std::map<std::string, json> aggregates;
    std::string line;
    for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        fail(ErrorCode::parse_error, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
      }
      if (!j.is_object() || j.value("schema_version", -1) != kResultsSchemaVersion)
        fail(ErrorCode::schema_version_mismatch,
             path.string() + " line " + std::to_string(line_no) + ": expected schema_version " +
                 std::to_string(kResultsSchemaVersion));
      if (j.value("record", "") == "aggregate") {
        const std::string hash = j.value("config_hash", "");
        aggregates[hash] = std::move(j);
      } else {
        records.push_back(std::move(j));
      }
    }
    for (auto& [hash, agg] : aggregates) records.push_back(std::move(agg));
    for (const auto& r : records) {
      std::vector<std::string> key;
      for (const auto& f : group_by) key.push_back(key_value(r, f));
      Group& g = groups[key];
      if (!r.value("error", json()).is_null()) {
        ++g.errors;
        continue;
      }
      const json metrics = r.value("metrics", json::object());
      for (const auto& [name, value] : metrics.items())
        if (value.is_number()) g.values[name].push_back(value.get<double>());
    }
  }
  AggregateTable table{group_by, {}};
  for (auto& [key, g] : groups) {
    if (g.values.empty()) {
      table.rows.push_back({key, "", std::nullopt, 0, g.errors});
      continue;
    }
    for (auto& [metric, values] : g.values) {
      // Sorted so the sum, and the mean, do not depend on record order.
      std::sort(values.begin(), values.end());
      double sum = 0.0;
      for (double v : values) sum += v;
      table.rows.push_back({key, metric, sum / static_cast<double>(values.size()), values.size(), g.errors});
    }
  }
  return table;
}

std::string AggregateTable::to_text() const {
  std::vector<std::string> header = group_by;
  for (const char* h : {"metric", "mean", "n", "errors"}) header.emplace_back(h);
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    auto row = r.key;
    row.push_back(r.metric.empty() ? "-" : r.metric);
    row.push_back(r.mean ? format_mean(*r.mean, "%.4f") : "-");
    row.push_back(std::to_string(r.count));
    row.push_back(std::to_string(r.errors));
    cells.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += row[c] + std::string(width[c] - row[c].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  };
  emit(header);
  for (const auto& row : cells) emit(row);
  return out;
}

std::string AggregateTable::to_csv() const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  std::string out;
  for (const auto& f : group_by) out += quote(f) + ",";
  out += "metric,mean,n,errors\n";
  for (const auto& r : rows) {
    for (const auto& k : r.key) out += quote(k) + ",";
    out += quote(r.metric) + "," + (r.mean ? format_mean(*r.mean, "%.10g") : "") + "," + std::to_string(r.count) +
           "," + std::to_string(r.errors) + "\n";
  }
  return out;
}

}  // namespace mb
