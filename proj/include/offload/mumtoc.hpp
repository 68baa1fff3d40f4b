#pragma once

#include <cstdint>
#include <tuple>

#include "offload/alloc.hpp"
#include "offload/sdp.hpp"

namespace offload {

struct MumtocResult {
  Decision decision;
  Allocation allocation;
  CostBreakdown cost;
  double relaxed_objective = 0;  // relaxation value, J
  double j_sdr = 0;  // cost after rounding + allocation
  double j_ao = 0;   // cost after alternating optimization
  double j_st = 0;   // cost after sequential tuning
  int ao_iterations = 0;
  int st_passes = 0;
  bool fallback = false;  // relaxation solve failed, all-Local start used
};

namespace mumtoc {

// Per-task argmax over the (local, access-point, cloud) probabilities read
// from the relaxation blocks; ties resolve Local, then Cap, then Cloud.
Decision recover_decision_cap(const Instance& inst, const SdpSolution& sol);

// Alternating optimization: exact per-user decision subproblem at fixed
// allocation, then re-allocation, accepting strict improvements only.
// Returns (decision, allocation, cost, iterations).
std::tuple<Decision, Allocation, double, int> step_ao(const Instance& inst,
                                                      const Decision& start_dec,
                                                      const Allocation& start_alloc);

// Sequential tuning: randomized first-improvement single-task moves with
// re-solved allocation; terminates at a single-move local optimum.
// Returns (decision, allocation, cost, passes).
std::tuple<Decision, Allocation, double, int> step_st(const Instance& inst,
                                                      const Decision& start_dec,
                                                      const Allocation& start_alloc,
                                                      std::uint64_t seed);

MumtocResult run(const Instance& inst, std::uint64_t seed);

// Certified lower bound via the best-case-delay relaxation (dual objective).
double lower_bound_cap(const Instance& inst);

}  // namespace mumtoc
}  // namespace offload
