#pragma once

#include <cmath>

#include "vlcsee/channel.hpp"
#include "vlcsee/power.hpp"
#include "vlcsee/types.hpp"

namespace vlcsee {

/// Zero-mean symbol law on [-1, 1].
struct SymbolDistribution {
  double diff_entropy_bits = 1.0;
  double variance = 1.0 / 3.0;
};

SymbolDistribution uniform_symbols();

/// Per-user coefficients of the secrecy-rate lower bound.
/// a_k = 2^{2 h_d} / (2 pi e sigma_k^2), b_k = sigma_d^2 / sigma_k^2 (effective noise).
struct LinkCoefficients {
  Vector a;
  Vector b;
};

LinkCoefficients link_coefficients(const ChannelMatrix& channel, const SymbolDistribution& dist);
LinkCoefficients link_coefficients(const Vector& noise_vars_effective,
                                   const SymbolDistribution& dist);

/// Lower bound on the secrecy rate of user k (bits/s/Hz). Not clipped at zero.
template <typename Derived>
double secrecy_rate(const Eigen::MatrixBase<Derived>& w, const Matrix& gains,
                    const LinkCoefficients& coeffs, Index k) {
  const Matrix g = gains * w;  // g(j, i) = h_j^T w_i
  const Index users = g.rows();
  double own = 0.0;
  double interference = 0.0;
  double leakage = 0.0;
  for (Index i = 0; i < users; ++i) {
    const double gki = g(k, i) * g(k, i);
    own += gki;
    if (i != k) {
      interference += gki;
      leakage += coeffs.b(i) * g(i, k) * g(i, k);
    }
  }
  return 0.5 * std::log2((1.0 + coeffs.a(k) * own) / (1.0 + coeffs.b(k) * interference)) -
         0.5 * std::log2(1.0 + leakage);
}

template <typename Derived>
double secrecy_rate_clipped(const Eigen::MatrixBase<Derived>& w, const Matrix& gains,
                            const LinkCoefficients& coeffs, Index k) {
  return std::max(0.0, secrecy_rate(w, gains, coeffs, k));
}

template <typename Derived>
Vector secrecy_rates(const Eigen::MatrixBase<Derived>& w, const Matrix& gains,
                     const LinkCoefficients& coeffs) {
  Vector out(gains.rows());
  for (Index k = 0; k < out.size(); ++k) out(k) = secrecy_rate(w, gains, coeffs, k);
  return out;
}

/// Secrecy sum-rate; the numerator of the energy-efficiency ratio.
template <typename Derived>
double sum_secrecy_rate(const Eigen::MatrixBase<Derived>& w, const Matrix& gains,
                        const LinkCoefficients& coeffs) {
  return secrecy_rates(w, gains, coeffs).sum();
}

/// Secrecy energy efficiency in bits/s/Hz/W.
template <typename Derived>
double see(const Eigen::MatrixBase<Derived>& w, const Matrix& gains,
           const LinkCoefficients& coeffs, const DrivePolicy& policy, const PowerModel& model) {
  return sum_secrecy_rate(w, gains, coeffs) / total_power(w, policy, model);
}

}  // namespace vlcsee
