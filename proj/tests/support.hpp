#pragma once

#include <cstdint>
#include <random>

#include "vlcsee/channel.hpp"
#include "vlcsee/design_problem.hpp"

namespace testing {

using namespace vlcsee;

inline DesignProblem scenario(std::uint64_t seed, LedLayout layout = LedLayout::k2x2, int users = 3,
                              double dbm = 30.0, double lambda = 0.5, double circuitry = 8.0) {
  const Vector3 room(5.0, 5.0, 3.0);
  const auto leds = led_layout(layout, room, 3.0);
  const Scene scene = make_scene(leds, sample_users(seed, users, room, 0.5), room);
  DesignProblem p;
  p.policy = drive_policy_from_dbm(dbm, static_cast<Index>(leds.size()), 2.0);
  p.channel = build_channel(scene, p.policy.dc_bias);
  p.coeffs = link_coefficients(p.channel, uniform_symbols());
  p.power.circuitry_power = circuitry;
  p.thresholds = Vector::Constant(users, lambda);
  return p;
}

/// Random symmetric PSD matrix of the given order and rank.
inline Matrix random_psd(std::mt19937_64& rng, Index n, Index rank, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(n, rank);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < rank; ++j) a(i, j) = g(rng);
  return a * a.transpose();
}

inline Matrix random_matrix(std::mt19937_64& rng, Index rows, Index cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Matrix a(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) a(i, j) = g(rng);
  return a;
}

}  // namespace testing
