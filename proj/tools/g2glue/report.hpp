#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "g2glue/config.hpp"

namespace g2glue::cli {

using nlohmann::json;

inline constexpr const char* kReportSchema = "g2glue.report/1";
inline constexpr const char* kChecksCsvSchema = "g2glue.checks/1";

enum class Status { Pass, Fail, Reported };

std::string to_string(Status s);

struct Check {
  std::string name;
  Status status = Status::Reported;
  json measured;
  json expected;
  json tolerance;
  std::string anchor;  ///< mathematical statement the check exercises
};

/// Fixed-header CSV attached to a report, written to PREFIX.<name>.csv.
struct Table {
  std::string name;
  std::string schema;  ///< e.g. g2glue.ale/1, written as the first comment line
  std::string csv;     ///< header line plus rows
};

struct Report {
  std::string suite;
  std::vector<Check> checks;
  json data = json::object();
  std::vector<Table> tables;
  std::map<std::string, double> timing;  ///< seconds; the only non-deterministic field

  bool ok() const;
  Check& add(Check c);
};

/// Check with status decided by `pass`.
Check verdict(std::string name, bool pass, json measured, json expected, json tolerance, std::string anchor);
Check reported(std::string name, json measured, std::string anchor);

json to_json(const Report& r);
/// Versioned header comment, then name,status,measured,expected,tolerance,anchor.
std::string checks_csv(const Report& r);
/// One line per check; failing lines carry the anchor.
std::string summary(const Report& r);

/// Writes through a temporary file in the target directory and renames it; throws IoError.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// Writes PREFIX.json and/or PREFIX.csv plus PREFIX.<table>.csv per the format.
std::vector<std::filesystem::path> write_outputs(const Report& r, const OutputSettings& out);

std::string csv_field(const std::string& s);

}  // namespace g2glue::cli
