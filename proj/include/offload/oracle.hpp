#pragma once

#include <cstdint>
#include <stdexcept>

#include "offload/alloc.hpp"

namespace offload {

struct SpaceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct OracleResult {
  Decision decision;
  Allocation allocation;
  double cost = 0;        // total cost under the requested bound, J
  double cost_lower = 0;  // total cost under the best-case bound, J
};

enum class BaselineKind { LocalOnly, CloudOnly, RandomMapping };

namespace oracle {

inline constexpr std::uint64_t kSpaceGuard = 1u << 20;

// Exhaustive search over all placements (2^sum(M) or 3^sum(M) points),
// re-optimizing the allocation per decision.
OracleResult exhaustive(const Instance& inst, BoundKind bound);

OracleResult baseline(const Instance& inst, BaselineKind kind,
                      std::uint64_t seed = 0);

}  // namespace oracle
}  // namespace offload
