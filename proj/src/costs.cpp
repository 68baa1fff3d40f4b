#include "offload/costs.hpp"

#include <algorithm>
#include <cmath>

namespace offload {

TaskCosts task_costs(const TaskSpec& task, const DeviceProfile& device,
                     const SystemParams& params) {
  TaskCosts c;
  c.e_local = device.local_energy_per_bit * task.d_in;
  c.t_local = device.local_time_per_bit * task.d_in;
  c.e_tx = device.tx_energy_per_bit * task.d_in;
  c.e_rx = device.rx_energy_per_bit * task.d_out;
  c.t_ac = (task.d_in + task.d_out) / params.r_ac;
  c.t_cloud = task.cycles / params.f_c;
  const double d_in_usage = params.usage_d_in_bytes ? task.d_in / 8.0 : task.d_in;
  const double link_terms = params.lambda2 / params.c_ul + params.lambda3 / params.c_dl;
  c.usage_cloud = d_in_usage + params.lambda1 / params.f_c + link_terms;
  c.usage_cap = params.f_a_total > 0
                    ? d_in_usage + params.lambda1 / params.f_a_total + link_terms
                    : 0.0;
  return c;
}

namespace {

struct UserOffloadSums {
  // Per-user sums over offloaded tasks, split by destination.
  double d_in_cap = 0, d_out_cap = 0, cycles_cap = 0;
  double d_in_cloud = 0, d_out_cloud = 0;
  double t_ac_cloud = 0, t_cloud = 0;
  double t_local = 0;
  bool any_offload() const { return d_in_cap > 0 || d_in_cloud > 0; }
  bool any_cap() const { return d_in_cap > 0; }
};

UserOffloadSums user_sums(const Instance& inst, const Decision& dec, int i) {
  UserOffloadSums s;
  const auto& u = inst.users[i];
  for (std::size_t j = 0; j < u.tasks.size(); ++j) {
    const auto& t = u.tasks[j];
    switch (dec.placement[i][j]) {
      case Placement::Local:
        s.t_local += u.device.local_time_per_bit * t.d_in;
        break;
      case Placement::Cap:
        s.d_in_cap += t.d_in;
        s.d_out_cap += t.d_out;
        s.cycles_cap += t.cycles;
        break;
      case Placement::Cloud:
        s.d_in_cloud += t.d_in;
        s.d_out_cloud += t.d_out;
        s.t_ac_cloud += (t.d_in + t.d_out) / inst.params.r_ac;
        s.t_cloud += t.cycles / inst.params.f_c;
        break;
    }
  }
  return s;
}

}  // namespace

DelayReport delay_report(const Instance& inst, const Decision& dec,
                         const Allocation& alloc, BoundKind bound) {
  dec.validate(inst);
  const int n = inst.n_users();
  DelayReport rep;
  rep.bound_kind = bound;
  rep.t_local_sum.assign(n, 0.0);
  rep.t_cap.assign(n, 0.0);
  rep.t_cloud.assign(n, 0.0);

  for (int i = 0; i < n; ++i) {
    const auto& u = inst.users[i];
    const UserOffloadSums s = user_sums(inst, dec, i);
    rep.t_local_sum[i] = s.t_local;
    if (!s.any_offload()) continue;  // excluded from divide-by-bandwidth terms

    const double cu = alloc.c_u[i], cd = alloc.c_d[i];
    if (cu <= 0 || cd <= 0)
      throw InfeasibleAllocation("user with offloaded tasks has zero bandwidth");
    double fa = 0;
    if (s.any_cap()) {
      fa = alloc.f_a.empty() ? 0.0 : alloc.f_a[i];
      if (fa <= 0) throw InfeasibleAllocation("user with CAP task has zero CAP rate");
    }

    const double up_all = (s.d_in_cap + s.d_in_cloud) / (u.eta_u * cu);
    const double down_all = (s.d_out_cap + s.d_out_cloud) / (u.eta_d * cd);
    if (bound == BoundKind::Upper) {
      // No-overlap sums; wireless legs count all offloaded tasks on both paths.
      if (s.any_cap()) rep.t_cap[i] = up_all + down_all + s.cycles_cap / fa;
      if (s.d_in_cloud > 0)
        rep.t_cloud[i] = up_all + down_all + s.t_ac_cloud + s.t_cloud;
    } else {
      if (s.any_cap()) {
        const double tu = s.d_in_cap / (u.eta_u * cu);
        const double td = s.d_out_cap / (u.eta_d * cd);
        const double ta = s.cycles_cap / fa;
        rep.t_cap[i] = std::max({tu, td, ta});
      }
      if (s.d_in_cloud > 0) {
        const double tu = s.d_in_cloud / (u.eta_u * cu);
        const double td = s.d_out_cloud / (u.eta_d * cd);
        const double tuac = s.d_in_cloud / inst.params.r_ac;
        const double tdac = s.d_out_cloud / inst.params.r_ac;
        rep.t_cloud[i] = std::max({tu, td, tuac, tdac, s.t_cloud});
      }
    }
  }
  return rep;
}

CostBreakdown total_cost(const Instance& inst, const Decision& dec,
                         const Allocation& alloc, BoundKind bound) {
  const DelayReport rep = delay_report(inst, dec, alloc, bound);
  CostBreakdown out;
  for (int i = 0; i < inst.n_users(); ++i) {
    const auto& u = inst.users[i];
    for (std::size_t j = 0; j < u.tasks.size(); ++j) {
      const TaskCosts c = task_costs(u.tasks[j], u.device, inst.params);
      switch (dec.placement[i][j]) {
        case Placement::Local: out.energy_and_usage += c.e_local; break;
        case Placement::Cap: out.energy_and_usage += c.e_cap_total(inst.params); break;
        case Placement::Cloud: out.energy_and_usage += c.e_cloud_total(inst.params); break;
      }
    }
    out.delay_cost +=
        u.rho * std::max({rep.t_local_sum[i], rep.t_cap[i], rep.t_cloud[i]});
  }
  out.total = out.energy_and_usage + out.delay_cost;
  return out;
}

}  // namespace offload
