#include "vlcsee/power.hpp"

#include <cmath>
#include <stdexcept>

namespace vlcsee {

double amplitude_bound(const DrivePolicy& policy, Index n) {
  const double bias = policy.dc_bias(n);
  return std::min(bias, policy.i_max - bias);
}

Vector amplitude_bounds(const DrivePolicy& policy) {
  Vector out(policy.dc_bias.size());
  for (Index n = 0; n < out.size(); ++n) out(n) = amplitude_bound(policy, n);
  return out;
}

double dc_power(const DrivePolicy& policy, const PowerModel& model) {
  return model.led_forward_voltage * policy.dc_bias.sum() + model.circuitry_power;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

DrivePolicy drive_policy_from_dbm(double optical_dbm, Index n_t, double conversion_factor,
                                  std::optional<double> i_max) {
  if (conversion_factor <= 0.0) throw std::invalid_argument("conversion factor must be positive");
  DrivePolicy policy;
  const double bias = dbm_to_watts(optical_dbm) / conversion_factor;
  policy.dc_bias = Vector::Constant(n_t, bias);
  policy.i_max = i_max.value_or(2.0 * bias);
  if (policy.i_max < bias) throw std::invalid_argument("peak current below the dc bias");
  return policy;
}

}  // namespace vlcsee
