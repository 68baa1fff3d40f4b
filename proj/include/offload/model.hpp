#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace offload {

// All quantities are in base SI units: bits, Hz, seconds, joules, cycles.
// 1 MB = 8e6 bits, 1 Mbps = 1e6 bits/s.

struct TaskSpec {
  double d_in = 0;    // input size, bits
  double d_out = 0;   // output size, bits
  double cycles = 0;  // CPU cycles to process

  void validate() const;
};

struct DeviceProfile {
  double local_time_per_bit = 0;    // s/bit
  double local_energy_per_bit = 0;  // J/bit
  double tx_energy_per_bit = 0;     // J/bit
  double rx_energy_per_bit = 0;     // J/bit

  void validate() const;
};

struct UserProfile {
  double eta_u = 0;  // uplink spectral efficiency, b/s/Hz
  double eta_d = 0;  // downlink spectral efficiency, b/s/Hz
  double rho = 0;    // delay weight, J/s
  std::vector<TaskSpec> tasks;
  DeviceProfile device;

  void validate() const;
};

struct SystemParams {
  double c_ul = 0;        // uplink bandwidth budget, Hz
  double c_dl = 0;        // downlink bandwidth budget, Hz
  double c_total = 0;     // shared total bandwidth budget, Hz
  double r_ac = 0;        // AP-to-cloud rate, bits/s
  double f_c = 0;         // per-user cloud processing rate, cycles/s
  double f_a_total = 0;   // total CAP processing rate, cycles/s
  double alpha = 0;       // weight on CAP usage cost, J/bit
  double beta = 0;        // weight on cloud usage cost, J/bit
  double lambda1 = 0;     // usage-cost constant, bit*(cycles/s)
  double lambda2 = 0;     // usage-cost constant, bit*Hz
  double lambda3 = 0;     // usage-cost constant, bit*Hz
  // When true, D_in enters the usage costs C^a/C^c in bytes instead of bits.
  bool usage_d_in_bytes = false;

  void validate(bool cap_mode) const;
};

enum class Mode { NoCap, WithCap };

struct Instance {
  std::vector<UserProfile> users;
  SystemParams params;
  Mode mode = Mode::NoCap;

  void validate() const;
  int n_users() const { return static_cast<int>(users.size()); }
  int m_tasks(int user) const { return static_cast<int>(users[user].tasks.size()); }
  int total_tasks() const;
};

enum class Placement : std::uint8_t { Local, Cap, Cloud };

// Per-(user, task) placement choice; ragged to allow differing task counts.
struct Decision {
  std::vector<std::vector<Placement>> placement;

  static Decision all_local(const Instance& inst);
  static Decision uniform(const Instance& inst, Placement p);
  void validate(const Instance& inst) const;
  bool operator==(const Decision&) const = default;
};

struct Allocation {
  std::vector<double> c_u;  // per-user uplink bandwidth, Hz
  std::vector<double> c_d;  // per-user downlink bandwidth, Hz
  std::vector<double> f_a;  // per-user CAP rate, cycles/s (empty in NoCap mode)

  static Allocation zeros(const Instance& inst);
  void validate(const Instance& inst) const;
};

// Reference system parameters and device constants.
std::pair<SystemParams, DeviceProfile> default_params();

// Seeded random instance: d_in ~ U[10,30] MB, d_out ~ U[1,3] MB,
// cycles = 1900 * (d_in in bytes). Deterministic given seed.
Instance generate_instance(const SystemParams& params, const DeviceProfile& device,
                           int n_users, int m_tasks, std::uint64_t seed,
                           Mode mode = Mode::NoCap);

std::string to_string(Placement p);
std::string to_string(Mode m);
std::string decision_string(const Decision& d);

}  // namespace offload
