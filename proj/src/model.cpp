#include "offload/model.hpp"

#include <random>
#include <sstream>

namespace offload {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

void TaskSpec::validate() const {
  require(d_in > 0, "TaskSpec: d_in must be > 0");
  require(d_out > 0, "TaskSpec: d_out must be > 0");
  require(cycles > 0, "TaskSpec: cycles must be > 0");
}

void DeviceProfile::validate() const {
  require(local_time_per_bit > 0, "DeviceProfile: local_time_per_bit must be > 0");
  require(local_energy_per_bit > 0, "DeviceProfile: local_energy_per_bit must be > 0");
  require(tx_energy_per_bit > 0, "DeviceProfile: tx_energy_per_bit must be > 0");
  require(rx_energy_per_bit > 0, "DeviceProfile: rx_energy_per_bit must be > 0");
}

void UserProfile::validate() const {
  require(eta_u > 0, "UserProfile: eta_u must be > 0");
  require(eta_d > 0, "UserProfile: eta_d must be > 0");
  require(rho > 0, "UserProfile: rho must be > 0");
  require(!tasks.empty(), "UserProfile: tasks must be non-empty");
  device.validate();
  for (const auto& t : tasks) t.validate();
}

void SystemParams::validate(bool cap_mode) const {
  require(c_ul > 0, "SystemParams: c_ul must be > 0");
  require(c_dl > 0, "SystemParams: c_dl must be > 0");
  require(c_total > 0, "SystemParams: c_total must be > 0");
  require(r_ac > 0, "SystemParams: r_ac must be > 0");
  require(f_c > 0, "SystemParams: f_c must be > 0");
  if (cap_mode) require(f_a_total > 0, "SystemParams: f_a_total must be > 0 in CAP mode");
  require(alpha >= 0, "SystemParams: alpha must be >= 0");
  require(beta >= 0, "SystemParams: beta must be >= 0");
}

void Instance::validate() const {
  require(!users.empty(), "Instance: at least one user required");
  params.validate(mode == Mode::WithCap);
  for (const auto& u : users) u.validate();
}

int Instance::total_tasks() const {
  int n = 0;
  for (const auto& u : users) n += static_cast<int>(u.tasks.size());
  return n;
}

Decision Decision::all_local(const Instance& inst) {
  return uniform(inst, Placement::Local);
}

Decision Decision::uniform(const Instance& inst, Placement p) {
  Decision d;
  d.placement.resize(inst.users.size());
  for (std::size_t i = 0; i < inst.users.size(); ++i)
    d.placement[i].assign(inst.users[i].tasks.size(), p);
  return d;
}

void Decision::validate(const Instance& inst) const {
  require(placement.size() == inst.users.size(), "Decision: user count mismatch");
  for (std::size_t i = 0; i < placement.size(); ++i) {
    require(placement[i].size() == inst.users[i].tasks.size(),
            "Decision: task count mismatch");
    if (inst.mode == Mode::NoCap) {
      for (auto p : placement[i])
        require(p != Placement::Cap, "Decision: Cap placement in NoCap mode");
    }
  }
}

Allocation Allocation::zeros(const Instance& inst) {
  Allocation a;
  a.c_u.assign(inst.users.size(), 0.0);
  a.c_d.assign(inst.users.size(), 0.0);
  if (inst.mode == Mode::WithCap) a.f_a.assign(inst.users.size(), 0.0);
  return a;
}

void Allocation::validate(const Instance& inst) const {
  const std::size_t n = inst.users.size();
  require(c_u.size() == n && c_d.size() == n, "Allocation: size mismatch");
  double su = 0, sd = 0, sf = 0;
  for (std::size_t i = 0; i < n; ++i) {
    require(c_u[i] >= 0 && c_d[i] >= 0, "Allocation: negative bandwidth");
    su += c_u[i];
    sd += c_d[i];
  }
  // Small slack for accumulated rounding; feasibility is enforced exactly by
  // the allocator's final projection.
  const double tol = 1e-9 * inst.params.c_total;
  require(su <= inst.params.c_ul + tol, "Allocation: uplink budget exceeded");
  require(sd <= inst.params.c_dl + tol, "Allocation: downlink budget exceeded");
  require(su + sd <= inst.params.c_total + tol, "Allocation: total budget exceeded");
  if (inst.mode == Mode::WithCap) {
    require(f_a.size() == n, "Allocation: f_a size mismatch");
    for (double f : f_a) {
      require(f >= 0, "Allocation: negative CAP rate");
      sf += f;
    }
    require(sf <= inst.params.f_a_total * (1 + 1e-9), "Allocation: CAP budget exceeded");
  }
}

std::pair<SystemParams, DeviceProfile> default_params() {
  SystemParams p;
  p.c_total = 4e7;  // 40 MHz shared; no separate up/downlink limit
  p.c_ul = p.c_total;
  p.c_dl = p.c_total;
  p.r_ac = 1.5e7;  // 15 Mbps
  p.f_c = 1e10;
  p.f_a_total = 1e10;
  p.alpha = 1.5e-7;
  p.beta = 2.5e-7;
  p.lambda1 = 1e18;
  p.lambda2 = 1e16;
  p.lambda3 = 1e16;

  DeviceProfile d;
  d.local_time_per_bit = 4.75e-7;
  d.local_energy_per_bit = 3.25e-7;
  d.tx_energy_per_bit = 1.42e-7;
  d.rx_energy_per_bit = 1.42e-7;
  return {p, d};
}

Instance generate_instance(const SystemParams& params, const DeviceProfile& device,
                           int n_users, int m_tasks, std::uint64_t seed, Mode mode) {
  require(n_users >= 1, "generate_instance: n_users must be >= 1");
  require(m_tasks >= 1, "generate_instance: m_tasks must be >= 1");

  constexpr double kBitsPerMB = 8e6;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> in_mb(10.0, 30.0);
  std::uniform_real_distribution<double> out_mb(1.0, 3.0);

  Instance inst;
  inst.params = params;
  inst.mode = mode;
  inst.users.resize(n_users);
  for (auto& u : inst.users) {
    u.eta_u = 3.5;
    u.eta_d = 3.5;
    u.rho = 1.0;
    u.device = device;
    u.tasks.resize(m_tasks);
    for (auto& t : u.tasks) {
      t.d_in = in_mb(rng) * kBitsPerMB;
      t.d_out = out_mb(rng) * kBitsPerMB;
      t.cycles = 1900.0 * (t.d_in / 8.0);  // 1900 cycles/byte
    }
  }
  inst.validate();
  return inst;
}

std::string to_string(Placement p) {
  switch (p) {
    case Placement::Local: return "local";
    case Placement::Cap: return "cap";
    case Placement::Cloud: return "cloud";
  }
  return "?";
}

std::string to_string(Mode m) { return m == Mode::NoCap ? "nocap" : "cap"; }

std::string decision_string(const Decision& d) {
  std::ostringstream os;
  for (std::size_t i = 0; i < d.placement.size(); ++i) {
    if (i) os << '|';
    for (auto p : d.placement[i]) {
      switch (p) {
        case Placement::Local: os << 'L'; break;
        case Placement::Cap: os << 'A'; break;
        case Placement::Cloud: os << 'C'; break;
      }
    }
  }
  return os.str();
}

}  // namespace offload
