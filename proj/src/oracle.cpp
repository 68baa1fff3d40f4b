#include "offload/oracle.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace offload {
namespace oracle {
namespace {

std::vector<Placement> options(Mode mode) {
  if (mode == Mode::WithCap)
    return {Placement::Local, Placement::Cap, Placement::Cloud};
  return {Placement::Local, Placement::Cloud};
}

}  // namespace

OracleResult exhaustive(const Instance& inst, BoundKind bound) {
  const std::vector<Placement> opts = options(inst.mode);
  const int base = static_cast<int>(opts.size());
  const int total_tasks = inst.total_tasks();
  double space = std::pow(static_cast<double>(base), total_tasks);
  if (space > static_cast<double>(kSpaceGuard))
    throw SpaceTooLarge("decision space exceeds 2^20 points");
  const std::uint64_t count = static_cast<std::uint64_t>(std::llround(space));

  OracleResult best;
  bool have = false;
  Decision dec = Decision::all_local(inst);
  for (std::uint64_t code = 0; code < count; ++code) {
    std::uint64_t c = code;
    for (int i = 0; i < inst.n_users(); ++i)
      for (int j = 0; j < inst.m_tasks(i); ++j) {
        dec.placement[i][j] = opts[c % base];
        c /= base;
      }
    auto [al, cb] = alloc::allocate(inst, dec);
    double cost = bound == BoundKind::Upper
                      ? cb.total
                      : total_cost(inst, dec, al, BoundKind::Lower).total;
    if (!have || cost < best.cost) {
      best.decision = dec;
      best.allocation = al;
      best.cost = cost;
      best.cost_lower = total_cost(inst, dec, al, BoundKind::Lower).total;
      have = true;
    }
  }
  return best;
}

OracleResult baseline(const Instance& inst, BaselineKind kind, std::uint64_t seed) {
  Decision dec;
  switch (kind) {
    case BaselineKind::LocalOnly:
      dec = Decision::all_local(inst);
      break;
    case BaselineKind::CloudOnly:
      dec = Decision::uniform(inst, Placement::Cloud);
      break;
    case BaselineKind::RandomMapping: {
      std::mt19937_64 rng(seed);
      const std::vector<Placement> opts = options(inst.mode);
      std::uniform_int_distribution<int> pick(0, static_cast<int>(opts.size()) - 1);
      dec = Decision::all_local(inst);
      for (auto& row : dec.placement)
        for (Placement& p : row) p = opts[pick(rng)];
      break;
    }
  }
  OracleResult res;
  auto [al, cb] = alloc::allocate(inst, dec);
  res.decision = dec;
  res.allocation = al;
  res.cost = cb.total;
  res.cost_lower = total_cost(inst, dec, al, BoundKind::Lower).total;
  return res;
}

}  // namespace oracle
}  // namespace offload
