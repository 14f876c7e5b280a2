#include "vlcsee/channel.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace vlcsee {

double lambertian_order(double semiangle_half_deg) {
  if (!(semiangle_half_deg > 0.0 && semiangle_half_deg < 90.0)) {
    throw std::domain_error("semi-angle for half illuminance must lie in (0, 90) degrees");
  }
  // cos(60 deg) is 0.5 only up to rounding; pin the common case so order 1 is exact.
  if (semiangle_half_deg == 60.0) return 1.0;
  return -kLn2 / std::log(std::cos(deg_to_rad(semiangle_half_deg)));
}

double emission_intensity(double irradiance_deg, double order) {
  return (order + 1.0) / (2.0 * kPi) * std::pow(std::cos(deg_to_rad(irradiance_deg)), order);
}

double concentrator_gain(double incidence_deg, double fov_deg, double refractive_index) {
  if (incidence_deg > fov_deg) return 0.0;
  const double s = std::sin(deg_to_rad(fov_deg));
  return refractive_index * refractive_index / (s * s);
}

double channel_gain(const LuminaryParams& luminary, const ReceiverParams& receiver) {
  const Vector3 ray = receiver.position - luminary.position;
  const double distance = ray.norm();
  if (distance <= 0.0) return 0.0;

  const double cos_irradiance = -ray.z() / distance;
  const double cos_incidence = -ray.dot(receiver.orientation.normalized()) / distance;
  if (cos_irradiance <= 0.0 || cos_incidence <= 0.0) return 0.0;

  const double incidence_deg = rad_to_deg(std::acos(std::min(1.0, cos_incidence)));
  if (incidence_deg > receiver.fov_deg) return 0.0;

  const double order = lambertian_order(luminary.semiangle_half_deg);
  const double intensity = (order + 1.0) / (2.0 * kPi) * std::pow(cos_irradiance, order);
  const double concentrator =
      concentrator_gain(incidence_deg, receiver.fov_deg, receiver.refractive_index);
  return receiver.active_area / (distance * distance) * intensity * receiver.filter_gain *
         concentrator * cos_incidence;
}

double noise_variance(const ReceiverParams& receiver, const NoiseParams& noise,
                      double received_power) {
  const double gamma = receiver.responsivity;
  const double e = noise.elementary_charge;
  const double bw = noise.bandwidth;
  const double shot = 2.0 * gamma * e * received_power * bw;
  const double ambient = 4.0 * kPi * e * receiver.active_area * gamma *
                         noise.ambient_photocurrent *
                         (1.0 - std::cos(deg_to_rad(receiver.fov_deg))) * bw;
  const double thermal = noise.preamp_density * noise.preamp_density * bw;
  return shot + ambient + thermal;
}

ChannelMatrix build_channel(const Scene& scene, const Vector& dc_bias) {
  const Index n_t = static_cast<Index>(scene.luminaries.size());
  const Index k_users = static_cast<Index>(scene.users.size());
  if (dc_bias.size() != n_t) {
    throw std::invalid_argument("dc bias length must match the number of luminaries");
  }
  if ((dc_bias.array() < 0.0).any()) {
    throw std::invalid_argument("dc bias must be nonnegative");
  }

  ChannelMatrix channel;
  channel.gains.resize(k_users, n_t);
  channel.noise_vars.resize(k_users);
  channel.noise_vars_effective.resize(k_users);

  for (Index k = 0; k < k_users; ++k) {
    const ReceiverParams& rx = scene.users[static_cast<std::size_t>(k)];
    double received = 0.0;
    for (Index n = 0; n < n_t; ++n) {
      const LuminaryParams& led = scene.luminaries[static_cast<std::size_t>(n)];
      const double h = channel_gain(led, rx);
      channel.gains(k, n) = h;
      received += led.conversion_factor * h * dc_bias(n);
    }
    if (channel.gains.row(k).maxCoeff() <= 0.0) {
      throw std::invalid_argument("user " + std::to_string(k) + " has no line-of-sight link");
    }
    channel.noise_vars(k) = noise_variance(rx, scene.noise, received);
    const double eta = scene.luminaries.front().conversion_factor;
    const double scale = rx.responsivity * eta;
    channel.noise_vars_effective(k) = channel.noise_vars(k) / (scale * scale);
  }
  return channel;
}

std::vector<Vector3> led_layout(LedLayout kind, const Vector3& room_dims, double height) {
  const double length = room_dims.x();
  const double width = room_dims.y();
  std::vector<Vector3> out;
  switch (kind) {
    case LedLayout::k2x2: {
      // sqrt(2) m off-centre in the 5 m reference room, scaled with the room.
      const double ox = std::sqrt(2.0) * length / 5.0;
      const double oy = std::sqrt(2.0) * width / 5.0;
      out = {Vector3(-ox, -oy, height), Vector3(ox, -oy, height), Vector3(ox, oy, height),
             Vector3(-ox, oy, height)};
      break;
    }
    case LedLayout::k2x3: {
      for (double fy : {0.25, 0.75}) {
        for (double fx : {1.0 / 6.0, 0.5, 5.0 / 6.0}) {
          out.emplace_back((fx - 0.5) * length, (fy - 0.5) * width, height);
        }
      }
      break;
    }
    case LedLayout::k3x3: {
      for (double fy : {1.0 / 6.0, 0.5, 5.0 / 6.0}) {
        for (double fx : {1.0 / 6.0, 0.5, 5.0 / 6.0}) {
          out.emplace_back((fx - 0.5) * length, (fy - 0.5) * width, height);
        }
      }
      break;
    }
  }
  return out;
}

std::vector<Vector3> sample_users(std::uint64_t seed, int count, const Vector3& room_dims,
                                  double height) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(-0.5 * room_dims.x(), 0.5 * room_dims.x());
  std::uniform_real_distribution<double> uy(-0.5 * room_dims.y(), 0.5 * room_dims.y());
  std::vector<Vector3> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    out.emplace_back(x, y, height);
  }
  return out;
}

Scene make_scene(const std::vector<Vector3>& led_positions,
                 const std::vector<Vector3>& user_positions, const Vector3& room_dims) {
  Scene scene;
  scene.room_dims = room_dims;
  for (const auto& p : led_positions) {
    LuminaryParams led;
    led.position = p;
    scene.luminaries.push_back(led);
  }
  for (const auto& p : user_positions) {
    ReceiverParams rx;
    rx.position = p;
    scene.users.push_back(rx);
  }
  return scene;
}

int layout_size(LedLayout kind) {
  switch (kind) {
    case LedLayout::k2x2: return 4;
    case LedLayout::k2x3: return 6;
    case LedLayout::k3x3: return 9;
  }
  return 0;
}

LedLayout parse_layout(const std::string& name) {
  if (name == "2x2") return LedLayout::k2x2;
  if (name == "2x3") return LedLayout::k2x3;
  if (name == "3x3") return LedLayout::k3x3;
  throw std::invalid_argument("unknown LED layout '" + name + "' (expected 2x2, 2x3 or 3x3)");
}

std::string layout_name(LedLayout kind) {
  switch (kind) {
    case LedLayout::k2x2: return "2x2";
    case LedLayout::k2x3: return "2x3";
    case LedLayout::k3x3: return "3x3";
  }
  return "?";
}

}  // namespace vlcsee
