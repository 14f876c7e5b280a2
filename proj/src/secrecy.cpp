#include "vlcsee/secrecy.hpp"

namespace vlcsee {

SymbolDistribution uniform_symbols() { return SymbolDistribution{1.0, 1.0 / 3.0}; }

LinkCoefficients link_coefficients(const Vector& noise_vars_effective,
                                   const SymbolDistribution& dist) {
  const double two_pi_e = 2.0 * kPi * std::exp(1.0);
  const double entropy_power = std::exp2(2.0 * dist.diff_entropy_bits);
  LinkCoefficients out;
  out.a = (entropy_power / two_pi_e) * noise_vars_effective.cwiseInverse();
  out.b = dist.variance * noise_vars_effective.cwiseInverse();
  return out;
}

LinkCoefficients link_coefficients(const ChannelMatrix& channel, const SymbolDistribution& dist) {
  return link_coefficients(channel.noise_vars_effective, dist);
}

}  // namespace vlcsee
