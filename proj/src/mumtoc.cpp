#include "offload/mumtoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace offload {
namespace mumtoc {
namespace {

constexpr double kImproveRel = 1e-9;
constexpr int kMaxAoIterations = 100;
constexpr int kEnumerationGuard = 4096;  // max 3^M for exact per-user search

bool solution_usable(const SdpSolution& sol) {
  if (sol.status == SdpStatus::Optimal) return true;
  return sol.status == SdpStatus::MaxIter && sol.gap <= 1e-4 &&
         sol.primal_residual <= 1e-6;
}

// Cost contribution of user i alone, with that user's resources fixed.
// Returns +inf when the placement needs a resource the user does not hold.
double user_cost(const Instance& inst, int i,
                 const std::vector<Placement>& placement, double c_u, double c_d,
                 double f_a) {
  const UserProfile& u = inst.users[i];
  double energy = 0, t_local = 0;
  double up_bits = 0, down_bits = 0, cap_cycles = 0, cloud_const = 0;
  bool any_off = false, any_cap = false, any_cloud = false;
  for (size_t j = 0; j < u.tasks.size(); ++j) {
    TaskCosts tc = task_costs(u.tasks[j], u.device, inst.params);
    switch (placement[j]) {
      case Placement::Local:
        energy += tc.e_local;
        t_local += tc.t_local;
        break;
      case Placement::Cap:
        energy += tc.e_cap_total(inst.params);
        any_off = any_cap = true;
        up_bits += u.tasks[j].d_in;
        down_bits += u.tasks[j].d_out;
        cap_cycles += u.tasks[j].cycles;
        break;
      case Placement::Cloud:
        energy += tc.e_cloud_total(inst.params);
        any_off = any_cloud = true;
        up_bits += u.tasks[j].d_in;
        down_bits += u.tasks[j].d_out;
        cloud_const += tc.t_ac + tc.t_cloud;
        break;
    }
  }
  double delay = t_local;
  if (any_off) {
    if (c_u <= 0 || c_d <= 0) return std::numeric_limits<double>::infinity();
    double wireless = up_bits / (u.eta_u * c_u) + down_bits / (u.eta_d * c_d);
    if (any_cloud) delay = std::max(delay, wireless + cloud_const);
    if (any_cap) {
      if (f_a <= 0) return std::numeric_limits<double>::infinity();
      delay = std::max(delay, wireless + cap_cycles / f_a);
    }
  }
  return energy + u.rho * delay;
}

std::vector<Placement> placement_options(Mode mode) {
  if (mode == Mode::WithCap)
    return {Placement::Local, Placement::Cap, Placement::Cloud};
  return {Placement::Local, Placement::Cloud};
}

// Exact per-user subproblem by full enumeration over placements; falls back
// to a coordinate sweep when the space exceeds the guard.
std::vector<Placement> best_user_placement(const Instance& inst, int i,
                                           const std::vector<Placement>& current,
                                           double c_u, double c_d, double f_a) {
  const int m = static_cast<int>(current.size());
  const std::vector<Placement> opts = placement_options(inst.mode);
  const int base = static_cast<int>(opts.size());
  double space = std::pow(static_cast<double>(base), m);
  std::vector<Placement> best = current;
  double best_cost = user_cost(inst, i, current, c_u, c_d, f_a);
  if (space <= kEnumerationGuard) {
    std::vector<Placement> cand(m, opts[0]);
    long long total = 1;
    for (int j = 0; j < m; ++j) total *= base;
    for (long long code = 0; code < total; ++code) {
      long long c = code;
      for (int j = 0; j < m; ++j) {
        cand[j] = opts[c % base];
        c /= base;
      }
      double cost = user_cost(inst, i, cand, c_u, c_d, f_a);
      if (cost < best_cost * (1.0 - kImproveRel)) {
        best_cost = cost;
        best = cand;
      }
    }
  } else {
    bool improved = true;
    while (improved) {
      improved = false;
      for (int j = 0; j < m; ++j) {
        for (Placement p : opts) {
          if (p == best[j]) continue;
          std::vector<Placement> cand = best;
          cand[j] = p;
          double cost = user_cost(inst, i, cand, c_u, c_d, f_a);
          if (cost < best_cost * (1.0 - kImproveRel)) {
            best_cost = cost;
            best = cand;
            improved = true;
          }
        }
      }
    }
  }
  return best;
}

double user_resource(const std::vector<double>& v, int i) {
  return i < static_cast<int>(v.size()) ? v[i] : 0.0;
}

}  // namespace

Decision recover_decision_cap(const Instance& inst, const SdpSolution& sol) {
  if (inst.mode != Mode::WithCap)
    throw std::invalid_argument("recover_decision_cap expects WithCap mode");
  Decision dec;
  dec.placement.resize(inst.n_users());
  for (int i = 0; i < inst.n_users(); ++i) {
    VariableLayout lay = VariableLayout::make(Mode::WithCap, BoundKind::Upper,
                                              inst.m_tasks(i));
    const Eigen::MatrixXd& Z = sol.blocks[i];
    dec.placement[i].resize(inst.m_tasks(i));
    for (int j = 0; j < inst.m_tasks(i); ++j) {
      double pl = Z(lay.hom(), lay.x(j, Placement::Local));
      double pa = Z(lay.hom(), lay.x(j, Placement::Cap));
      double pc = Z(lay.hom(), lay.x(j, Placement::Cloud));
      Placement p = Placement::Cloud;
      if (pl >= pa && pl >= pc)
        p = Placement::Local;
      else if (pa >= pc)
        p = Placement::Cap;
      dec.placement[i][j] = p;
    }
  }
  return dec;
}

std::tuple<Decision, Allocation, double, int> step_ao(const Instance& inst,
                                                      const Decision& start_dec,
                                                      const Allocation& start_alloc) {
  Decision dec = start_dec;
  Allocation al = start_alloc;
  double cost = total_cost(inst, dec, al, BoundKind::Upper).total;
  int iterations = 0;
  for (; iterations < kMaxAoIterations; ++iterations) {
    Decision next = dec;
    for (int i = 0; i < inst.n_users(); ++i)
      next.placement[i] = best_user_placement(inst, i, dec.placement[i], al.c_u[i],
                                              al.c_d[i], user_resource(al.f_a, i));
    auto [a2, cb2] = alloc::allocate(inst, next);
    if (cb2.total < cost * (1.0 - kImproveRel)) {
      dec = next;
      al = a2;
      cost = cb2.total;
    } else {
      ++iterations;
      break;
    }
  }
  return {dec, al, cost, iterations};
}

std::tuple<Decision, Allocation, double, int> step_st(const Instance& inst,
                                                      const Decision& start_dec,
                                                      const Allocation& start_alloc,
                                                      std::uint64_t seed) {
  Decision dec = start_dec;
  Allocation al = start_alloc;
  double cost = total_cost(inst, dec, al, BoundKind::Upper).total;
  std::mt19937_64 rng(seed);
  const std::vector<Placement> opts = placement_options(inst.mode);
  std::vector<std::pair<int, int>> order;
  for (int i = 0; i < inst.n_users(); ++i)
    for (int j = 0; j < inst.m_tasks(i); ++j) order.emplace_back(i, j);

  int passes = 0;
  bool improved = true;
  while (improved) {
    improved = false;
    ++passes;
    std::shuffle(order.begin(), order.end(), rng);
    for (auto [i, j] : order) {
      for (Placement p : opts) {
        if (p == dec.placement[i][j]) continue;
        Decision cand = dec;
        cand.placement[i][j] = p;
        auto [a2, cb2] = alloc::allocate(inst, cand);
        if (cb2.total < cost * (1.0 - kImproveRel)) {
          dec = cand;
          al = a2;
          cost = cb2.total;
          improved = true;
          break;
        }
      }
      if (improved) break;  // re-randomize the scan order after each move
    }
  }
  return {dec, al, cost, passes};
}

MumtocResult run(const Instance& inst, std::uint64_t seed) {
  if (inst.mode != Mode::WithCap)
    throw std::invalid_argument("mumtoc::run expects WithCap mode");
  MumtocResult res;
  SeparableQcqp prob = qcqp::build(inst, BoundKind::Upper);
  SdpSolution sol = sdp::solve(prob);
  Decision dec0;
  if (solution_usable(sol)) {
    dec0 = recover_decision_cap(inst, sol);
    res.relaxed_objective = sol.objective + prob.offset;
  } else {
    dec0 = Decision::all_local(inst);
    res.fallback = true;
  }
  auto [al0, cb0] = alloc::allocate(inst, dec0);
  res.j_sdr = cb0.total;

  auto [dec1, al1, j1, iters] = step_ao(inst, dec0, al0);
  res.j_ao = j1;
  res.ao_iterations = iters;

  auto [dec2, al2, j2, passes] = step_st(inst, dec1, al1, seed);
  res.j_st = j2;
  res.st_passes = passes;

  res.decision = dec2;
  res.allocation = al2;
  res.cost = total_cost(inst, dec2, al2, BoundKind::Upper);
  return res;
}

double lower_bound_cap(const Instance& inst) {
  if (inst.mode != Mode::WithCap)
    throw std::invalid_argument("lower_bound_cap expects WithCap mode");
  SeparableQcqp prob = qcqp::build(inst, BoundKind::Lower);
  SdpSolution sol = sdp::solve(prob);
  return sol.dual_objective + prob.offset;
}

}  // namespace mumtoc
}  // namespace offload
