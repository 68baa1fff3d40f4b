#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "offload/model.hpp"

namespace offload {

// Parse failure; the message carries a line-numbered diagnostic.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parsed instance description. Either the config lists explicit per-user
// task data (fixed = true), or it gives n_users/m_tasks and the instance is
// generated from a seed.
struct InstanceConfig {
  InstanceConfig() {
    auto [p, d] = default_params();
    params = p;
    device = d;
  }

  SystemParams params;
  DeviceProfile device;
  Mode mode = Mode::NoCap;
  bool fixed = false;
  std::vector<UserProfile> users;  // when fixed
  int n_users = 5;
  int m_tasks = 4;
  std::uint64_t seed = 1;
  // Profile overrides applied to generated instances.
  double eta_u = 3.5;
  double eta_d = 3.5;
  double rho = 1.0;

  Instance instantiate(std::uint64_t seed_override) const;
  Instance instantiate() const { return instantiate(seed); }
};

InstanceConfig parse_config(const std::string& text);
InstanceConfig load_config(const std::string& path);

// Explicit key/value form of a concrete instance; parse_config round-trips it.
std::string serialize_instance(const Instance& inst);

}  // namespace offload
