#pragma once

#include "offload/model.hpp"

namespace offload {

enum class BoundKind { Upper, Lower };

// Allocation-independent per-task constants.
struct TaskCosts {
  double e_local = 0;      // J
  double t_local = 0;      // s
  double e_tx = 0;         // J
  double e_rx = 0;         // J
  double t_ac = 0;         // s, AP<->cloud transfer
  double t_cloud = 0;      // s, cloud processing
  double usage_cloud = 0;  // bits-equivalent C^c
  double usage_cap = 0;    // bits-equivalent C^a

  // Weighted offload energies: E^C = e_tx + e_rx + beta*C^c,
  // E^A = e_tx + e_rx + alpha*C^a.
  double e_cloud_total(const SystemParams& p) const {
    return e_tx + e_rx + p.beta * usage_cloud;
  }
  double e_cap_total(const SystemParams& p) const {
    return e_tx + e_rx + p.alpha * usage_cap;
  }
};

struct DelayReport {
  std::vector<double> t_local_sum;  // per-user sum over Local tasks
  std::vector<double> t_cap;        // per-user CAP-path delay bound (0 in NoCap)
  std::vector<double> t_cloud;      // per-user cloud-path delay bound
  BoundKind bound_kind = BoundKind::Upper;
};

struct CostBreakdown {
  double energy_and_usage = 0;  // J
  double delay_cost = 0;        // J
  double total = 0;             // J
};

struct InfeasibleAllocation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TaskCosts task_costs(const TaskSpec& task, const DeviceProfile& device,
                     const SystemParams& params);

DelayReport delay_report(const Instance& inst, const Decision& dec,
                         const Allocation& alloc, BoundKind bound);

CostBreakdown total_cost(const Instance& inst, const Decision& dec,
                         const Allocation& alloc, BoundKind bound);

}  // namespace offload
