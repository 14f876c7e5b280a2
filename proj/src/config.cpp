#include "vlcsee/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace vlcsee {

ConfigError::ConfigError(int line, const std::string& field, const std::string& msg)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? "" : field + ": ") + msg),
      line_(line),
      field_(field) {}

std::string to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::cccp: return "cccp";
    case Algorithm::cccp_sdr: return "cccp_sdr";
    case Algorithm::zf: return "zf";
    case Algorithm::random_zf: return "random_zf";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "cccp") return Algorithm::cccp;
  if (name == "cccp_sdr") return Algorithm::cccp_sdr;
  if (name == "zf") return Algorithm::zf;
  if (name == "random_zf") return Algorithm::random_zf;
  throw std::invalid_argument("unknown algorithm '" + name +
                              "' (expected cccp, cccp_sdr, zf or random_zf)");
}

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::power_dbm: return "power_dbm";
    case SweepAxis::threshold: return "threshold";
    case SweepAxis::circuitry: return "circuitry";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  if (name == "power_dbm") return SweepAxis::power_dbm;
  if (name == "threshold") return SweepAxis::threshold;
  if (name == "circuitry") return SweepAxis::circuitry;
  throw std::invalid_argument("unknown sweep axis '" + name + "'");
}

Vector ScenarioConfig::threshold_vector() const {
  if (thresholds.size() == 1) return Vector::Constant(users, thresholds.front());
  return Eigen::Map<const Vector>(thresholds.data(), static_cast<Index>(thresholds.size()));
}

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

enum class Unit { none, dbm, watt, volt, ohm, ampere };

// Number with optional unit suffix. dBm values convert to watts only when the
// target unit is watts; a dBm field accepts "W"/"mW" and converts back.
double parse_number(const std::string& raw, Unit unit, int line, const std::string& key) {
  std::string text = trim(raw);
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr == first) throw ConfigError(line, key, "expected a number, got '" + text + "'");
  if (!std::isfinite(value)) throw ConfigError(line, key, "value must be finite");
  const std::string suffix = lower(trim(std::string_view(ptr, static_cast<std::size_t>(last - ptr))));
  if (suffix.empty()) return value;
  auto bad = [&] { return ConfigError(line, key, "unit '" + suffix + "' not valid here"); };
  switch (unit) {
    case Unit::none: throw bad();
    case Unit::dbm:
      if (suffix == "dbm") return value;
      if (suffix == "w" || suffix == "mw") {
        const double watts = suffix == "w" ? value : value * 1e-3;
        if (watts <= 0.0) throw ConfigError(line, key, "power must be positive");
        return 10.0 * std::log10(watts * 1e3);
      }
      throw bad();
    case Unit::watt:
      if (suffix == "w") return value;
      if (suffix == "mw") return value * 1e-3;
      if (suffix == "dbm") return std::pow(10.0, value / 10.0) * 1e-3;
      throw bad();
    case Unit::volt:
      if (suffix == "v") return value;
      if (suffix == "mv") return value * 1e-3;
      throw bad();
    case Unit::ohm:
      if (suffix == "ohm" || suffix == "ohms") return value;
      throw bad();
    case Unit::ampere:
      if (suffix == "a") return value;
      if (suffix == "ma") return value * 1e-3;
      throw bad();
  }
  throw bad();
}

int parse_int(const std::string& raw, int line, const std::string& key) {
  const std::string text = trim(raw);
  long long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(line, key, "expected an integer, got '" + text + "'");
  if (value < INT32_MIN || value > INT32_MAX) throw ConfigError(line, key, "integer out of range");
  return static_cast<int>(value);
}

std::uint64_t parse_seed(const std::string& raw, int line, const std::string& key) {
  const std::string text = trim(raw);
  std::uint64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw ConfigError(line, key, "expected a nonnegative integer, got '" + text + "'");
  return value;
}

bool parse_bool(const std::string& raw, int line, const std::string& key) {
  const std::string text = lower(trim(raw));
  if (text == "true" || text == "yes" || text == "1" || text == "on") return true;
  if (text == "false" || text == "no" || text == "0" || text == "off") return false;
  throw ConfigError(line, key, "expected true or false, got '" + text + "'");
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(raw);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_numbers(const std::string& raw, Unit unit, int line, const std::string& key) {
  std::vector<double> out;
  for (const auto& item : split_list(raw)) out.push_back(parse_number(item, unit, line, key));
  if (out.empty()) throw ConfigError(line, key, "empty list");
  return out;
}

using Setter = std::function<void(ScenarioConfig&, const std::string&, int, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto num = [](double ScenarioConfig::*field, Unit unit) {
      return [field, unit](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
        c.*field = parse_number(v, unit, line, k);
      };
    };
    auto integer = [](int ScenarioConfig::*field) {
      return [field](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
        c.*field = parse_int(v, line, k);
      };
    };
    t["scene.layout"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      try {
        c.layout = parse_layout(trim(v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(line, k, e.what());
      }
    };
    t["scene.users"] = integer(&ScenarioConfig::users);
    t["scene.room"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      auto dims = parse_numbers(v, Unit::none, line, k);
      if (dims.size() != 3) throw ConfigError(line, k, "expected three dimensions");
      c.room = Vector3(dims[0], dims[1], dims[2]);
    };
    t["scene.led_height"] = num(&ScenarioConfig::led_height, Unit::none);
    t["scene.receiver_height"] = num(&ScenarioConfig::receiver_height, Unit::none);
    t["scene.power"] = num(&ScenarioConfig::power_dbm, Unit::dbm);
    t["scene.thresholds"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      c.thresholds = parse_numbers(v, Unit::none, line, k);
    };
    t["scene.i_max"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      c.i_max = parse_number(v, Unit::ampere, line, k);
    };
    t["power.circuitry"] = num(&ScenarioConfig::circuitry_power, Unit::watt);
    t["power.led_voltage"] = num(&ScenarioConfig::led_voltage, Unit::volt);
    t["power.resistance"] = num(&ScenarioConfig::equiv_resistance, Unit::ohm);
    t["solver.algorithm"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      try {
        c.algorithm = parse_algorithm(trim(v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(line, k, e.what());
      }
    };
    t["solver.eps_outer"] = num(&ScenarioConfig::eps_outer, Unit::none);
    t["solver.max_outer"] = integer(&ScenarioConfig::max_outer);
    t["solver.eps_inner"] = num(&ScenarioConfig::eps_inner, Unit::none);
    t["solver.max_inner"] = integer(&ScenarioConfig::max_inner);
    t["solver.tolerance"] = num(&ScenarioConfig::solver_tol, Unit::none);
    t["solver.random_zf_samples"] = integer(&ScenarioConfig::random_zf_samples);
    t["solver.feasibility_fallback"] = [](ScenarioConfig& c, const std::string& v, int line,
                                          const std::string& k) {
      c.feasibility_fallback = parse_bool(v, line, k);
    };
    t["experiment.seed"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      c.seed = parse_seed(v, line, k);
    };
    t["experiment.realizations"] = integer(&ScenarioConfig::realizations);
    t["experiment.threads"] = integer(&ScenarioConfig::threads);
    t["experiment.trace_length"] = integer(&ScenarioConfig::trace_length);
    t["sweep.axis"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      try {
        c.sweep_axis = parse_axis(trim(v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(line, k, e.what());
      }
    };
    t["sweep.values"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      const Unit unit = c.sweep_axis == SweepAxis::power_dbm   ? Unit::dbm
                        : c.sweep_axis == SweepAxis::circuitry ? Unit::watt
                                                               : Unit::none;
      c.sweep_values = parse_numbers(v, unit, line, k);
    };
    t["sweep.algorithms"] = [](ScenarioConfig& c, const std::string& v, int line, const std::string& k) {
      c.sweep_algorithms.clear();
      for (const auto& name : split_list(v)) {
        try {
          c.sweep_algorithms.push_back(parse_algorithm(name));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(line, k, e.what());
        }
      }
      if (c.sweep_algorithms.empty()) throw ConfigError(line, k, "empty list");
    };
    return t;
  }();
  return table;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ScenarioConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  out.emplace_back("scene.layout", layout_name(layout));
  out.emplace_back("scene.users", std::to_string(users));
  out.emplace_back("scene.room", join({room.x(), room.y(), room.z()}));
  out.emplace_back("scene.led_height", format_double(led_height));
  out.emplace_back("scene.receiver_height", format_double(receiver_height));
  out.emplace_back("scene.power", format_double(power_dbm) + " dBm");
  out.emplace_back("scene.thresholds", join(thresholds));
  if (i_max) out.emplace_back("scene.i_max", format_double(*i_max) + " A");
  out.emplace_back("power.circuitry", format_double(circuitry_power) + " W");
  out.emplace_back("power.led_voltage", format_double(led_voltage) + " V");
  out.emplace_back("power.resistance", format_double(equiv_resistance) + " ohm");
  out.emplace_back("solver.algorithm", to_string(algorithm));
  out.emplace_back("solver.eps_outer", format_double(eps_outer));
  out.emplace_back("solver.max_outer", std::to_string(max_outer));
  out.emplace_back("solver.eps_inner", format_double(eps_inner));
  out.emplace_back("solver.max_inner", std::to_string(max_inner));
  out.emplace_back("solver.tolerance", format_double(solver_tol));
  out.emplace_back("solver.random_zf_samples", std::to_string(random_zf_samples));
  out.emplace_back("solver.feasibility_fallback", feasibility_fallback ? "true" : "false");
  out.emplace_back("experiment.seed", std::to_string(seed));
  out.emplace_back("experiment.realizations", std::to_string(realizations));
  out.emplace_back("experiment.threads", std::to_string(threads));
  out.emplace_back("experiment.trace_length", std::to_string(trace_length));
  out.emplace_back("sweep.axis", to_string(sweep_axis));
  if (!sweep_values.empty()) out.emplace_back("sweep.values", join(sweep_values));
  std::string algos;
  for (std::size_t i = 0; i < sweep_algorithms.size(); ++i)
    algos += (i ? ", " : "") + to_string(sweep_algorithms[i]);
  out.emplace_back("sweep.algorithms", algos);
  return out;
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  bool seed_given = false;
  std::map<std::string, int> seen;
  std::pair<std::string, int> sweep_values{"", 0};
  while (std::getline(in, raw)) {
    ++line;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError(line, "", "unterminated section header");
      section = lower(trim(std::string_view(s).substr(1, s.size() - 2)));
      if (section.empty()) throw ConfigError(line, "", "empty section name");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected key = value");
    std::string key = lower(trim(std::string_view(s).substr(0, eq)));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "", "missing key");
    if (key.find('.') == std::string::npos) {
      if (section.empty()) throw ConfigError(line, key, "key outside any section");
      key = section + "." + key;
    }
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(line, key, "unknown key");
    if (auto [pos, fresh] = seen.emplace(key, line); !fresh)
      throw ConfigError(line, key, "duplicate key (first set on line " + std::to_string(pos->second) + ")");
    if (value.empty()) throw ConfigError(line, key, "missing value");
    if (key == "sweep.values") {
      // the unit depends on sweep.axis, which may come later in the file
      sweep_values = {value, line};
      continue;
    }
    it->second(cfg, value, line, key);
    if (key == "experiment.seed") seed_given = true;
  }
  if (sweep_values.second > 0)
    setters().at("sweep.values")(cfg, sweep_values.first, sweep_values.second, "sweep.values");
  if (!seed_given) throw ConfigError(0, "experiment.seed", "seed is mandatory");
  // Range checks report the line the offending key was set on.
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    const auto it = seen.find(e.field());
    if (it != seen.end() && e.line() == 0) {
      std::string msg = e.what();
      const std::string prefix = e.field() + ": ";
      if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
      throw ConfigError(it->second, e.field(), msg);
    }
    throw;
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate(const ScenarioConfig& cfg) {
  auto fail = [](const std::string& key, const std::string& msg) { throw ConfigError(0, key, msg); };
  if (cfg.users < 1) fail("scene.users", "need at least one user");
  if (cfg.users > layout_size(cfg.layout))
    fail("scene.users", "more users than luminaries in layout " + layout_name(cfg.layout));
  if ((cfg.room.array() <= 0.0).any()) fail("scene.room", "room dimensions must be positive");
  if (cfg.led_height <= 0.0 || cfg.led_height > cfg.room.z()) fail("scene.led_height", "outside the room");
  if (cfg.receiver_height < 0.0 || cfg.receiver_height >= cfg.led_height)
    fail("scene.receiver_height", "must lie between the floor and the luminaries");
  if (cfg.power_dbm < -30.0 || cfg.power_dbm > 60.0) fail("scene.power", "outside [-30, 60] dBm");
  if (cfg.thresholds.empty()) fail("scene.thresholds", "empty");
  if (cfg.thresholds.size() != 1 && static_cast<int>(cfg.thresholds.size()) != cfg.users)
    fail("scene.thresholds", "expected one value or one per user");
  for (double l : cfg.thresholds)
    if (l < 0.0) fail("scene.thresholds", "thresholds must be nonnegative");
  if (cfg.i_max && *cfg.i_max <= 0.0) fail("scene.i_max", "must be positive");
  if (cfg.circuitry_power < 0.0) fail("power.circuitry", "must be nonnegative");
  if (cfg.led_voltage <= 0.0) fail("power.led_voltage", "must be positive");
  if (cfg.equiv_resistance <= 0.0) fail("power.resistance", "must be positive");
  if (cfg.eps_outer <= 0.0) fail("solver.eps_outer", "must be positive");
  if (cfg.eps_inner <= 0.0) fail("solver.eps_inner", "must be positive");
  if (cfg.solver_tol <= 0.0) fail("solver.tolerance", "must be positive");
  if (cfg.max_outer < 1) fail("solver.max_outer", "must be at least 1");
  if (cfg.max_inner < 1) fail("solver.max_inner", "must be at least 1");
  if (cfg.random_zf_samples < 1) fail("solver.random_zf_samples", "must be at least 1");
  if (cfg.realizations < 1) fail("experiment.realizations", "must be at least 1");
  if (cfg.threads < 1) fail("experiment.threads", "must be at least 1");
  if (cfg.trace_length < 1) fail("experiment.trace_length", "must be at least 1");
  if (cfg.sweep_algorithms.empty()) fail("sweep.algorithms", "empty");
  for (double v : cfg.sweep_values) {
    if (cfg.sweep_axis == SweepAxis::power_dbm && (v < -30.0 || v > 60.0))
      fail("sweep.values", "power outside [-30, 60] dBm");
    if (cfg.sweep_axis != SweepAxis::power_dbm && v < 0.0) fail("sweep.values", "must be nonnegative");
  }
}

}  // namespace vlcsee
