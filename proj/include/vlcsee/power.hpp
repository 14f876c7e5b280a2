#pragma once

#include <algorithm>
#include <limits>
#include <optional>

#include "vlcsee/types.hpp"

namespace vlcsee {

struct DrivePolicy {
  Vector dc_bias;       // I_n^DC, amperes
  double i_max = 1.0;   // peak drive current, amperes
};

struct PowerModel {
  double circuitry_power = 8.0;      // W
  double led_forward_voltage = 3.0;  // V
  double equiv_resistance = 3.0;     // xi = r * sigma_d^2, ohms
};

/// Modulation headroom of LED n: min(I_n^DC, I_max - I_n^DC).
double amplitude_bound(const DrivePolicy& policy, Index n);
Vector amplitude_bounds(const DrivePolicy& policy);

template <typename Derived>
bool row_l1_feasible(const Eigen::MatrixBase<Derived>& w, const DrivePolicy& policy,
                     double tol = 0.0) {
  for (Index n = 0; n < w.rows(); ++n) {
    if (w.row(n).cwiseAbs().sum() > amplitude_bound(policy, n) + tol) return false;
  }
  return true;
}

/// Largest violation of the per-LED amplitude budget (<= 0 when feasible).
template <typename Derived>
double row_l1_excess(const Eigen::MatrixBase<Derived>& w, const DrivePolicy& policy) {
  double worst = -std::numeric_limits<double>::infinity();
  for (Index n = 0; n < w.rows(); ++n) {
    worst = std::max(worst, w.row(n).cwiseAbs().sum() - amplitude_bound(policy, n));
  }
  return worst;
}

/// LED bias plus circuitry power; the part of the budget that does not depend on W.
double dc_power(const DrivePolicy& policy, const PowerModel& model);

template <typename Derived>
double total_power(const Eigen::MatrixBase<Derived>& w, const DrivePolicy& policy,
                   const PowerModel& model) {
  return dc_power(policy, model) + model.equiv_resistance * w.squaredNorm();
}

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

/// Uniform bias for every LED delivering `optical_dbm` of average optical power.
/// Without an explicit peak current the headroom is symmetric (I_max = 2 I^DC).
DrivePolicy drive_policy_from_dbm(double optical_dbm, Index n_t, double conversion_factor,
                                  std::optional<double> i_max = std::nullopt);

}  // namespace vlcsee
