#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "offload/alloc.hpp"
#include "offload/costs.hpp"
#include "offload/model.hpp"

namespace testutil {

using namespace offload;

// The reference task used throughout the hand-computed checks:
// 20 MB in, 2 MB out, 1900 cycles per input byte.
inline TaskSpec reference_task() { return TaskSpec{1.6e8, 1.6e7, 3.8e10}; }

inline Instance make_instance(int n_users, int m_tasks, std::uint64_t seed,
                              Mode mode) {
  auto [params, device] = default_params();
  return generate_instance(params, device, n_users, m_tasks, seed, mode);
}

inline Decision random_decision(const Instance& inst, std::mt19937_64& rng) {
  Decision dec = Decision::all_local(inst);
  int n_opts = inst.mode == Mode::WithCap ? 3 : 2;
  std::uniform_int_distribution<int> pick(0, n_opts - 1);
  for (auto& row : dec.placement)
    for (Placement& p : row) {
      int v = pick(rng);
      if (inst.mode == Mode::WithCap)
        p = v == 0 ? Placement::Local : (v == 1 ? Placement::Cap : Placement::Cloud);
      else
        p = v == 0 ? Placement::Local : Placement::Cloud;
    }
  return dec;
}

// Strictly feasible random allocation: offloading users share 90% of each
// budget with random positive weights, everyone else gets zero.
inline Allocation random_allocation(const Instance& inst, const Decision& dec,
                                    std::mt19937_64& rng) {
  const int n = inst.n_users();
  Allocation a = Allocation::zeros(inst);
  std::vector<bool> offloads(n, false), uses_cap(n, false);
  for (int i = 0; i < n; ++i)
    for (Placement p : dec.placement[i]) {
      if (p != Placement::Local) offloads[i] = true;
      if (p == Placement::Cap) uses_cap[i] = true;
    }

  std::uniform_real_distribution<double> w(0.2, 1.0);
  auto share_out = [&](std::vector<double>& dst, double budget,
                       const std::vector<bool>& active) {
    std::vector<double> weights(n, 0.0);
    double sum = 0;
    for (int i = 0; i < n; ++i)
      if (active[i]) sum += (weights[i] = w(rng));
    if (sum <= 0) return;
    for (int i = 0; i < n; ++i) dst[i] = budget * weights[i] / sum;
  };

  const SystemParams& p = inst.params;
  // Half of the shared budget to each direction keeps c_ul, c_dl and the
  // combined constraint satisfied simultaneously at the defaults.
  share_out(a.c_u, 0.45 * std::min(p.c_ul, p.c_total), offloads);
  share_out(a.c_d, 0.45 * std::min(p.c_dl, p.c_total), offloads);
  if (inst.mode == Mode::WithCap)
    share_out(a.f_a, 0.9 * p.f_a_total, uses_cap);
  return a;
}

// Grid-search reference for the allocation module, limited to N <= 2 users
// in the local/cloud setting. The outer grid scans user 0's bandwidth pair;
// the remaining budget goes to user 1, whose uplink/downlink split is convex
// in one variable and resolved by ternary search.
inline double grid_search_cost(const Instance& inst, const Decision& dec,
                               int steps = 200) {
  const int n = inst.n_users();
  std::vector<bool> offloads(n, false);
  for (int i = 0; i < n; ++i)
    for (Placement p : dec.placement[i])
      if (p != Placement::Local) offloads[i] = true;

  auto eval = [&](const Allocation& a) {
    return total_cost(inst, dec, a, BoundKind::Upper).total;
  };

  Allocation a = Allocation::zeros(inst);
  int first = -1, second = -1;
  for (int i = 0; i < n; ++i)
    if (offloads[i]) (first < 0 ? first : second) = i;
  if (first < 0) return eval(a);

  const double budget = inst.params.c_total;
  auto split_second = [&](double remaining) {
    // Convex in the uplink share; 1D ternary search.
    auto cost_at = [&](double frac) {
      a.c_u[second] = frac * remaining;
      a.c_d[second] = (1.0 - frac) * remaining;
      return eval(a);
    };
    double lo = 1e-6, hi = 1.0 - 1e-6;
    for (int it = 0; it < 60; ++it) {
      double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
      if (cost_at(m1) < cost_at(m2))
        hi = m2;
      else
        lo = m1;
    }
    return cost_at(0.5 * (lo + hi));
  };

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < steps; ++i) {
    double s0 = (i + 0.5) / steps * budget;  // user `first` total bandwidth
    for (int j = 0; j < steps; ++j) {
      double frac = (j + 0.5) / steps;  // its uplink share
      a.c_u[first] = frac * s0;
      a.c_d[first] = (1.0 - frac) * s0;
      double cost;
      if (second >= 0)
        cost = split_second(budget - s0);
      else
        cost = eval(a);
      best = std::min(best, cost);
    }
  }
  return best;
}

}  // namespace testutil
