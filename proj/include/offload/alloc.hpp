#pragma once

#include "offload/costs.hpp"
#include "offload/model.hpp"

namespace offload {
namespace alloc {

// Optimal communication (and CAP processing) resource allocation for a
// fixed offloading decision, under the worst-case delay bound. Users with
// no offloaded tasks receive exactly zero resources.
std::pair<Allocation, CostBreakdown> allocate(const Instance& inst,
                                              const Decision& dec);

}  // namespace alloc
}  // namespace offload
