#pragma once

#include "offload/alloc.hpp"
#include "offload/sdp.hpp"

namespace offload {

struct MumtoResult {
  Decision decision;
  Allocation allocation;
  CostBreakdown cost;
  double relaxed_objective = 0;  // relaxation value incl. constant offset, J
  std::vector<std::vector<double>> fractional_p;  // per-task offload fraction
  bool fallback = false;  // relaxation solve failed, all-Local start used
};

namespace mumto {

// Round the relaxation's last-row probabilities to a binary Local/Cloud
// decision; p >= 0.5 sends the task to the cloud.
Decision recover_decision(const Instance& inst, const SdpSolution& sol);

// Full pipeline: relax, recover, allocate, then keep the cheapest of the
// recovered decision and the all-Local / all-Cloud baselines.
MumtoResult run(const Instance& inst);

// Certified lower bound on the optimal total cost (best-case delay
// relaxation, dual objective).
double lower_bound(const Instance& inst);

}  // namespace mumto
}  // namespace offload
