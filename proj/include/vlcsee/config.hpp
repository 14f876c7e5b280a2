#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlcsee/channel.hpp"

namespace vlcsee {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& field, const std::string& msg);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class Algorithm { cccp, cccp_sdr, zf, random_zf };

std::string to_string(Algorithm algo);
Algorithm parse_algorithm(const std::string& name);  // throws std::invalid_argument

enum class SweepAxis { power_dbm, threshold, circuitry };

std::string to_string(SweepAxis axis);
SweepAxis parse_axis(const std::string& name);

struct ScenarioConfig {
  // scene
  LedLayout layout = LedLayout::k2x2;
  int users = 3;
  Vector3 room{5.0, 5.0, 3.0};
  double led_height = 3.0;
  double receiver_height = 0.5;
  double power_dbm = 30.0;             // average optical power per luminary
  std::vector<double> thresholds{0.5};  // one value broadcasts to every user
  std::optional<double> i_max;
  // power model
  double circuitry_power = 8.0;
  double led_voltage = 3.0;
  double equiv_resistance = 3.0;
  // algorithms
  Algorithm algorithm = Algorithm::cccp;
  double eps_outer = 1e-4;
  int max_outer = 30;
  double eps_inner = 1e-4;
  int max_inner = 100;
  double solver_tol = 1e-6;
  int random_zf_samples = 1000;
  bool feasibility_fallback = true;
  // experiment
  std::uint64_t seed = 1;
  int realizations = 1000;
  int threads = 1;
  SweepAxis sweep_axis = SweepAxis::power_dbm;
  std::vector<double> sweep_values;
  std::vector<Algorithm> sweep_algorithms{Algorithm::cccp};
  int trace_length = 30;

  Vector threshold_vector() const;
  /// Every field as key=value, in file order.
  std::vector<std::pair<std::string, std::string>> entries() const;
};

/// Flat key=value text with [section] headers; '#' starts a comment.
/// Keys are addressed as section.key; numbers may carry a unit suffix.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

/// Throws ConfigError when a field is outside its physical range.
void validate(const ScenarioConfig& cfg);

}  // namespace vlcsee
