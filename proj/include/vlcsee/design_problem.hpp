#pragma once

#include <algorithm>
#include <limits>
#include <string>
#include <vector>

#include "vlcsee/channel.hpp"
#include "vlcsee/power.hpp"
#include "vlcsee/secrecy.hpp"

namespace vlcsee {

/// Everything a precoder design needs for one channel realization.
struct DesignProblem {
  ChannelMatrix channel;
  LinkCoefficients coeffs;
  DrivePolicy policy;
  PowerModel power;
  Vector thresholds;  // lambda_k, bits/s/Hz

  Index users() const { return channel.users(); }
  Index transmitters() const { return channel.transmitters(); }
  const Matrix& gains() const { return channel.gains; }

  double numerator(const Matrix& w) const { return sum_secrecy_rate(w, channel.gains, coeffs); }
  double denominator(const Matrix& w) const { return total_power(w, policy, power); }
  double efficiency(const Matrix& w) const { return numerator(w) / denominator(w); }

  /// Smallest margin R_{s,k}(W) - lambda_k over users.
  double threshold_margin(const Matrix& w) const {
    return (secrecy_rates(w, channel.gains, coeffs) - thresholds).minCoeff();
  }
};

/// Outcome of an inner (fixed-parameter) design step.
enum class InnerStatus { converged, max_iter, infeasible, numerical_error };

std::string to_string(InnerStatus status);

/// Shared settings of the iterative inner solvers (CCCP, SDR and ZF variants).
struct InnerConfig {
  double eps = 1e-4;          // relative-change tolerance
  int max_iter = 100;
  double solver_tol = 1e-6;   // conic solver gap
  double change_floor = 1e-12;  // denominator floor for relative changes of W
  double slack_floor = 1.0;     // denominator floor for SNR-like slacks
};

/// One inner iteration, evaluated exactly on the achieved precoder.
struct InnerIterate {
  int iteration = 0;
  double objective = 0.0;   // N(W) - mu D(W)
  double efficiency = 0.0;  // N(W) / D(W)
  double relaxation_gap = std::numeric_limits<double>::quiet_NaN();
  Vector rates;
};

struct InnerResult {
  InnerStatus status = InnerStatus::numerical_error;
  Matrix w;
  double objective = 0.0;
  int iterations = 0;
  std::vector<InnerIterate> trace;
  bool threshold_violation = false;  // SDR retrieval broke a secrecy constraint
};

/// Relative Frobenius change with a floored denominator.
template <typename A, typename B>
double relative_change(const Eigen::MatrixBase<A>& now, const Eigen::MatrixBase<B>& before,
                       double floor) {
  return (now - before).norm() / std::max(before.norm(), floor);
}

InnerIterate evaluate_iterate(const DesignProblem& problem, const Matrix& w, double mu,
                              int iteration);

}  // namespace vlcsee
