#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "vlcsee/config.hpp"
#include "vlcsee/types.hpp"

namespace vlcsee {

/// One inner iteration of one algorithm on one realization.
struct RunRecord {
  int realization = 0;
  Algorithm algorithm = Algorithm::cccp;
  int outer_iteration = 0;
  int inner_iteration = 0;
  double mu = 0.0;
  double objective = 0.0;
  double see = 0.0;
  Vector rates;
  bool feasible = false;
  double relaxation_gap = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

/// RFC 4180: fields holding a comma, quote or line break are quoted, quotes doubled.
std::string csv_field(const std::string& value);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

/// Splits RFC 4180 text into rows; throws std::runtime_error on a malformed quote.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// Shortest text that reads back to the same double; NaN is written as an empty field.
std::string format_value(double v);
double parse_value(const std::string& text);

/// Wall time is the only nondeterministic column and is left out unless asked for.
std::vector<std::string> record_header(bool with_timing = false);
std::vector<std::string> record_row(const RunRecord& r, bool with_timing = false);
/// Inverse of record_row; throws std::runtime_error when the row does not fit the header.
RunRecord parse_record(const std::vector<std::string>& header, const std::vector<std::string>& row);

/// A table with a header row, written and read as CSV.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write(std::ostream& out) const;
};

/// Keys every manifest carries.
const std::vector<std::string>& manifest_fields();

nlohmann::json make_manifest(const std::string& command, const ScenarioConfig& cfg,
                             const nlohmann::json& totals);

/// Empty when the manifest has every published field with the right JSON type.
std::vector<std::string> manifest_problems(const nlohmann::json& manifest);

}  // namespace vlcsee
