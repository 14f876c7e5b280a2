#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vlcsee/types.hpp"

namespace vlcsee {

struct LuminaryParams {
  double semiangle_half_deg = 60.0;  // half-power semi-angle
  double conversion_factor = 2.0;    // W/A
  Vector3 position = Vector3::Zero();
};

struct ReceiverParams {
  double active_area = 1e-4;  // m^2
  double fov_deg = 60.0;
  double filter_gain = 1.0;
  double refractive_index = 1.5;
  double responsivity = 0.54;  // A/W
  Vector3 position = Vector3::Zero();
  Vector3 orientation = Vector3::UnitZ();
};

struct NoiseParams {
  double bandwidth = 20e6;                       // Hz
  double elementary_charge = 1.602176634e-19;    // C
  double ambient_photocurrent = 10.93;           // A/(m^2 sr)
  double preamp_density = 5e-12;                 // A/sqrt(Hz)
};

/// Room coordinates have their origin at the floor centre; z points up.
struct Scene {
  Vector3 room_dims{5.0, 5.0, 3.0};
  std::vector<LuminaryParams> luminaries;
  std::vector<ReceiverParams> users;
  NoiseParams noise;
};

struct ChannelMatrix {
  Matrix gains;                  // K x N_T, row k is h_k^T
  Vector noise_vars;             // sigma_k^2 in A^2
  Vector noise_vars_effective;   // sigma_k^2 / (gamma eta)^2

  Index users() const { return gains.rows(); }
  Index transmitters() const { return gains.cols(); }
};

enum class LedLayout { k2x2, k2x3, k3x3 };

/// Lambertian emission order for a given half-power semi-angle (degrees).
/// Throws std::domain_error outside (0, 90).
double lambertian_order(double semiangle_half_deg);

double emission_intensity(double irradiance_deg, double order);

double concentrator_gain(double incidence_deg, double fov_deg, double refractive_index);

/// Line-of-sight optical gain between a downward-facing luminary and a receiver.
double channel_gain(const LuminaryParams& luminary, const ReceiverParams& receiver);

/// Receiver noise variance (A^2) given the average received optical power (W).
double noise_variance(const ReceiverParams& receiver, const NoiseParams& noise,
                      double received_power);

/// Gains and effective noise for every (user, luminary) pair. Throws
/// std::invalid_argument when a user sees no luminary at all.
ChannelMatrix build_channel(const Scene& scene, const Vector& dc_bias);

std::vector<Vector3> led_layout(LedLayout kind, const Vector3& room_dims, double height);

std::vector<Vector3> sample_users(std::uint64_t seed, int count, const Vector3& room_dims,
                                  double height = 0.5);

/// Table-default luminaries at the given positions plus default receivers.
Scene make_scene(const std::vector<Vector3>& led_positions,
                 const std::vector<Vector3>& user_positions,
                 const Vector3& room_dims = Vector3(5.0, 5.0, 3.0));

int layout_size(LedLayout kind);
LedLayout parse_layout(const std::string& name);
std::string layout_name(LedLayout kind);

}  // namespace vlcsee
