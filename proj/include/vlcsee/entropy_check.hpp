#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vlcsee/secrecy.hpp"

namespace vlcsee {

struct EntropyOptions {
  std::size_t samples = 1'000'000;
  std::uint64_t seed = 1;
  double sigmas = 3.0;            // allowed violation in standard errors
  bool gaussian_symbols = false;  // diagnostic: N(0, sigma_d^2) symbols instead of uniform
  int threads = 1;
};

/// Monte Carlo entropy estimate (bits) against its analytic comparison value.
struct EntropyTerm {
  double estimate = 0.0;
  double std_error = 0.0;
  double reference = 0.0;
  bool holds = true;
};

/// The four entropies behind the secrecy-rate bound, for one user k:
///   h(y_k) >= EPI bound, h(y_k | d_k) <= Gaussian bound,
///   h(y_-k | d_-k) <= determinant bound, h(y_-k | d) = noise entropy.
struct EntropyReport {
  Index user = 0;
  EntropyTerm output;
  EntropyTerm output_given_own;
  EntropyTerm others_given_theirs;
  EntropyTerm others_given_all;
  bool all_hold() const {
    return output.holds && output_given_own.holds && others_given_theirs.holds &&
           others_given_all.holds;
  }
};

/// Needs K <= 3. noise_vars are the effective variances sigma_bar_k^2.
std::vector<EntropyReport> verify_entropy_chain(const Matrix& gains, const Vector& noise_vars,
                                                const Matrix& w, const SymbolDistribution& dist,
                                                const EntropyOptions& options = {});

/// Density of c^T d + N(0, s^2) with d uniform on [-1, 1]^m, |c| <= 3 entries.
double uniform_mixture_density(double y, const Vector& c, double noise_std);

}  // namespace vlcsee
