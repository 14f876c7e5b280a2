#include "vlcsee/records.hpp"

#include <Eigen/Core>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace vlcsee {

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_field(fields[i]);
  }
  out << "\r\n";
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  bool row_open = false;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    was_quoted = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    row_open = true;
    if (c == '"') {
      if (!field.empty() || was_quoted)
        throw std::runtime_error("csv row " + std::to_string(rows.size() + 1) + ": stray quote");
      quoted = was_quoted = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_field();
      rows.push_back(std::move(row));
      row.clear();
      row_open = false;
    } else {
      if (was_quoted)
        throw std::runtime_error("csv row " + std::to_string(rows.size() + 1) +
                                 ": text after closing quote");
      field += c;
    }
  }
  if (quoted) throw std::runtime_error("csv: unterminated quoted field");
  if (row_open) {
    end_field();
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_value(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

double parse_value(const std::string& text) {
  if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw std::runtime_error("not a number: '" + text + "'");
  return v;
}

namespace {

std::string join_rates(const Vector& rates) {
  std::string out;
  for (Index k = 0; k < rates.size(); ++k) out += (k ? ";" : "") + format_value(rates(k));
  return out;
}

Vector split_rates(const std::string& text) {
  std::vector<double> values;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ';')) values.push_back(parse_value(item));
  return Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size()));
}

int parse_count(const std::string& text) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw std::runtime_error("not an integer: '" + text + "'");
  return v;
}

}  // namespace

std::vector<std::string> record_header(bool with_timing) {
  std::vector<std::string> h{"realization", "algorithm", "outer_iteration", "inner_iteration",
                             "mu",          "objective", "see",             "secrecy_rates",
                             "feasible",    "relaxation_gap"};
  if (with_timing) h.push_back("wall_ms");
  return h;
}

std::vector<std::string> record_row(const RunRecord& r, bool with_timing) {
  std::vector<std::string> row{std::to_string(r.realization),
                               to_string(r.algorithm),
                               std::to_string(r.outer_iteration),
                               std::to_string(r.inner_iteration),
                               format_value(r.mu),
                               format_value(r.objective),
                               format_value(r.see),
                               join_rates(r.rates),
                               r.feasible ? "1" : "0",
                               format_value(r.relaxation_gap)};
  if (with_timing) row.push_back(format_value(r.wall_ms));
  return row;
}

RunRecord parse_record(const std::vector<std::string>& header, const std::vector<std::string>& row) {
  const bool timing = header == record_header(true);
  if (!timing && header != record_header(false)) throw std::runtime_error("unexpected record header");
  if (row.size() != header.size())
    throw std::runtime_error("record has " + std::to_string(row.size()) + " fields, expected " +
                             std::to_string(header.size()));
  RunRecord r;
  r.realization = parse_count(row[0]);
  try {
    r.algorithm = parse_algorithm(row[1]);
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(e.what());
  }
  r.outer_iteration = parse_count(row[2]);
  r.inner_iteration = parse_count(row[3]);
  r.mu = parse_value(row[4]);
  r.objective = parse_value(row[5]);
  r.see = parse_value(row[6]);
  r.rates = split_rates(row[7]);
  if (row[8] != "0" && row[8] != "1") throw std::runtime_error("feasible must be 0 or 1");
  r.feasible = row[8] == "1";
  r.relaxation_gap = parse_value(row[9]);
  if (timing) r.wall_ms = parse_value(row[10]);
  return r;
}

void Table::write(std::ostream& out) const {
  write_csv_row(out, header);
  for (const auto& row : rows) write_csv_row(out, row);
}

const std::vector<std::string>& manifest_fields() {
  static const std::vector<std::string> fields{"tool",  "version", "command",  "config",
                                               "seed",  "eigen",   "compiler", "totals"};
  return fields;
}

nlohmann::json make_manifest(const std::string& command, const ScenarioConfig& cfg,
                             const nlohmann::json& totals) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [key, value] : cfg.entries()) config[key] = value;
  std::string compiler;
#if defined(__clang__)
  compiler = "clang " __clang_version__;
#elif defined(__GNUC__)
  compiler = "gcc " __VERSION__;
#else
  compiler = "unknown";
#endif
  return {{"tool", "vlcsee"},
          {"version", VLCSEE_VERSION},
          {"command", command},
          {"config", config},
          {"seed", cfg.seed},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                        "." + std::to_string(EIGEN_MINOR_VERSION)},
          {"compiler", compiler},
          {"totals", totals}};
}

std::vector<std::string> manifest_problems(const nlohmann::json& manifest) {
  std::vector<std::string> problems;
  if (!manifest.is_object()) return {"manifest is not an object"};
  for (const auto& key : manifest_fields())
    if (!manifest.contains(key)) problems.push_back("missing '" + key + "'");
  auto expect = [&](const char* key, bool ok) {
    if (manifest.contains(key) && !ok) problems.push_back("'" + std::string(key) + "' has the wrong type");
  };
  expect("tool", manifest.value("tool", nlohmann::json()).is_string());
  expect("version", manifest.value("version", nlohmann::json()).is_string());
  expect("command", manifest.value("command", nlohmann::json()).is_string());
  expect("config", manifest.value("config", nlohmann::json()).is_object());
  expect("seed", manifest.value("seed", nlohmann::json()).is_number_unsigned());
  expect("eigen", manifest.value("eigen", nlohmann::json()).is_string());
  expect("compiler", manifest.value("compiler", nlohmann::json()).is_string());
  expect("totals", manifest.value("totals", nlohmann::json()).is_object());
  return problems;
}

}  // namespace vlcsee
