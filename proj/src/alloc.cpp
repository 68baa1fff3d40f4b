#include "offload/alloc.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace offload {
namespace alloc {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Per-user aggregates of the offloaded traffic at a fixed decision.
struct UserAgg {
  double t_local = 0;   // s, sum over Local tasks
  double up_bits = 0;   // total uplink bits of offloaded tasks
  double down_bits = 0; // total downlink bits of offloaded tasks
  double cap_cycles = 0;
  double cloud_const = 0;  // s, sum of t_ac + t_cloud over Cloud tasks
  bool any_offload = false;
  bool any_cap = false;
  bool any_cloud = false;
};

std::vector<UserAgg> aggregate(const Instance& inst, const Decision& dec) {
  std::vector<UserAgg> agg(inst.n_users());
  for (int i = 0; i < inst.n_users(); ++i) {
    const UserProfile& u = inst.users[i];
    for (int j = 0; j < static_cast<int>(u.tasks.size()); ++j) {
      TaskCosts tc = task_costs(u.tasks[j], u.device, inst.params);
      switch (dec.placement[i][j]) {
        case Placement::Local:
          agg[i].t_local += tc.t_local;
          break;
        case Placement::Cap:
          agg[i].any_offload = true;
          agg[i].any_cap = true;
          agg[i].up_bits += u.tasks[j].d_in;
          agg[i].down_bits += u.tasks[j].d_out;
          agg[i].cap_cycles += u.tasks[j].cycles;
          break;
        case Placement::Cloud:
          agg[i].any_offload = true;
          agg[i].any_cloud = true;
          agg[i].up_bits += u.tasks[j].d_in;
          agg[i].down_bits += u.tasks[j].d_out;
          agg[i].cloud_const += tc.t_ac + tc.t_cloud;
          break;
      }
    }
  }
  return agg;
}

struct Term {
  int idx;
  double coef;
};

// sum recip coef/x + sum lin coef*x + c0 <= 0, with all recip coefs > 0.
struct Ineq {
  std::vector<Term> recip;
  std::vector<Term> lin;
  double c0 = 0;

  double value(const VectorXd& x) const {
    double v = c0;
    for (const Term& t : recip) v += t.coef / x[t.idx];
    for (const Term& t : lin) v += t.coef * x[t.idx];
    return v;
  }
};

struct BarrierProblem {
  VectorXd cost;
  std::vector<Ineq> ineqs;
};

bool strictly_feasible(const BarrierProblem& pb, const VectorXd& x) {
  for (const Ineq& q : pb.ineqs) {
    bool pos_recip = false;
    for (const Term& t : q.recip) {
      if (x[t.idx] <= 0) return false;
      pos_recip = true;
    }
    (void)pos_recip;
    if (q.value(x) >= 0) return false;
  }
  return true;
}

double barrier_value(const BarrierProblem& pb, const VectorXd& x, double kappa) {
  double v = kappa * pb.cost.dot(x);
  for (const Ineq& q : pb.ineqs) {
    double g = q.value(x);
    if (g >= 0) return std::numeric_limits<double>::infinity();
    v -= std::log(-g);
  }
  return v;
}

// Minimize cost^T x subject to the smooth inequality set via a standard
// log-barrier path following scheme with damped Newton inner iterations.
VectorXd solve_barrier(const BarrierProblem& pb, VectorXd x) {
  const int n = static_cast<int>(x.size());
  const int m = static_cast<int>(pb.ineqs.size());
  if (n == 0) return x;
  double kappa = 1.0;
  for (int outer = 0; outer < 60; ++outer) {
    for (int inner = 0; inner < 200; ++inner) {
      VectorXd grad = kappa * pb.cost;
      MatrixXd hess = MatrixXd::Zero(n, n);
      for (const Ineq& q : pb.ineqs) {
        double g = q.value(x);
        VectorXd dg = VectorXd::Zero(n);
        for (const Term& t : q.recip) dg[t.idx] -= t.coef / (x[t.idx] * x[t.idx]);
        for (const Term& t : q.lin) dg[t.idx] += t.coef;
        double inv = -1.0 / g;  // g < 0
        grad += inv * dg;
        hess += (inv * inv) * (dg * dg.transpose());
        for (const Term& t : q.recip)
          hess(t.idx, t.idx) += inv * 2.0 * t.coef / (x[t.idx] * x[t.idx] * x[t.idx]);
      }
      hess.diagonal().array() += 1e-12 * (1.0 + hess.diagonal().maxCoeff());
      VectorXd step = hess.ldlt().solve(-grad);
      double decrement = -grad.dot(step);
      if (!(decrement > 0)) break;
      if (decrement * 0.5 < 1e-12 * (1.0 + std::abs(kappa * pb.cost.dot(x)))) break;
      double f0 = barrier_value(pb, x, kappa);
      double a = 1.0;
      while (a > 1e-14) {
        VectorXd xn = x + a * step;
        if (strictly_feasible(pb, xn) &&
            barrier_value(pb, xn, kappa) <= f0 - 0.25 * a * decrement)
          break;
        a *= 0.5;
      }
      if (a <= 1e-14) break;
      x += a * step;
    }
    double obj = std::abs(pb.cost.dot(x));
    if (m / kappa <= 1e-9 * (1.0 + obj)) break;
    kappa *= 20.0;
  }
  return x;
}

// Variable indices for one offloading user within the barrier problem.
struct UserVars {
  int u = -1;  // uplink fraction of c_total
  int d = -1;  // downlink fraction of c_total
  int f = -1;  // CAP fraction of f_a_total (-1 if no Cap task)
  int t = -1;  // epigraph delay, s
};

struct Subproblem {
  BarrierProblem pb;
  std::vector<int> users;  // instance user ids in variable order
  std::vector<UserVars> vars;
};

// Build the epigraph program for the given set of free users. Budgets are
// in absolute fractions of c_total / f_a_total already reduced by whatever
// fixed users consume.
Subproblem build_subproblem(const Instance& inst, const std::vector<UserAgg>& agg,
                            const std::vector<int>& free_users, double bud_u,
                            double bud_d, double bud_tot, double bud_f) {
  const SystemParams& P = inst.params;
  Subproblem sp;
  sp.users = free_users;
  int n = 0;
  for (int i : free_users) {
    UserVars v;
    v.u = n++;
    v.d = n++;
    if (agg[i].any_cap) v.f = n++;
    v.t = n++;
    sp.vars.push_back(v);
  }
  sp.pb.cost = VectorXd::Zero(n);
  const double floor_c = 1e-9;
  const double floor_f = 1e-9;
  for (size_t k = 0; k < free_users.size(); ++k) {
    int i = sp.users[k];
    const UserVars& v = sp.vars[k];
    const UserAgg& a = agg[i];
    sp.pb.cost[v.t] = inst.users[i].rho;
    double au = a.up_bits / (inst.users[i].eta_u * P.c_total);
    double ad = a.down_bits / (inst.users[i].eta_d * P.c_total);
    if (a.any_cloud) {
      Ineq q;
      q.recip = {{v.u, au}, {v.d, ad}};
      q.lin = {{v.t, -1.0}};
      q.c0 = a.cloud_const;
      sp.pb.ineqs.push_back(q);
    }
    if (a.any_cap) {
      Ineq q;
      q.recip = {{v.u, au}, {v.d, ad}, {v.f, a.cap_cycles / P.f_a_total}};
      q.lin = {{v.t, -1.0}};
      sp.pb.ineqs.push_back(q);
    }
    // t_i >= T^L_i and variable floors
    sp.pb.ineqs.push_back({{}, {{v.t, -1.0}}, a.t_local});
    sp.pb.ineqs.push_back({{}, {{v.u, -1.0}}, floor_c});
    sp.pb.ineqs.push_back({{}, {{v.d, -1.0}}, floor_c});
    if (v.f >= 0) sp.pb.ineqs.push_back({{}, {{v.f, -1.0}}, floor_f});
  }
  // Shared budgets.
  Ineq qu, qd, qt, qf;
  for (const UserVars& v : sp.vars) {
    qu.lin.push_back({v.u, 1.0});
    qd.lin.push_back({v.d, 1.0});
    qt.lin.push_back({v.u, 1.0});
    qt.lin.push_back({v.d, 1.0});
    if (v.f >= 0) qf.lin.push_back({v.f, 1.0});
  }
  qu.c0 = -bud_u;
  qd.c0 = -bud_d;
  qt.c0 = -bud_tot;
  qf.c0 = -bud_f;
  sp.pb.ineqs.push_back(qu);
  sp.pb.ineqs.push_back(qd);
  sp.pb.ineqs.push_back(qt);
  if (!qf.lin.empty()) sp.pb.ineqs.push_back(qf);
  return sp;
}

VectorXd initial_point(const Instance& inst, const std::vector<UserAgg>& agg,
                       const Subproblem& sp, double bud_u, double bud_d,
                       double bud_tot, double bud_f) {
  int n = static_cast<int>(sp.pb.cost.size());
  VectorXd x = VectorXd::Zero(n);
  double n_o = static_cast<double>(sp.users.size());
  int n_f = 0;
  for (const UserVars& v : sp.vars)
    if (v.f >= 0) ++n_f;
  double share = 0.9 * std::min({bud_u, bud_d, bud_tot / 2.0}) / n_o;
  double share_f = n_f > 0 ? 0.9 * bud_f / n_f : 0;
  for (size_t k = 0; k < sp.vars.size(); ++k) {
    const UserVars& v = sp.vars[k];
    const UserAgg& a = agg[sp.users[k]];
    x[v.u] = share;
    x[v.d] = share;
    if (v.f >= 0) x[v.f] = share_f;
    double au = a.up_bits / (inst.users[sp.users[k]].eta_u * inst.params.c_total);
    double ad = a.down_bits / (inst.users[sp.users[k]].eta_d * inst.params.c_total);
    double d_cloud = a.any_cloud ? au / share + ad / share + a.cloud_const : 0;
    double d_cap = a.any_cap
                       ? au / share + ad / share + a.cap_cycles / inst.params.f_a_total / x[v.f]
                       : 0;
    x[v.t] = 1.01 * std::max({a.t_local, d_cloud, d_cap}) + 0.1;
  }
  return x;
}

// Smallest scale s in (0,1] such that the user's offload delay at s*r stays
// at or below the target; delay terms scale like 1/s plus a constant.
double shrink_scale(const UserAgg& a, const Instance& inst, int i, double c_u,
                    double c_d, double f_a, double target) {
  auto delay = [&](double s) {
    double au = a.up_bits / (inst.users[i].eta_u * c_u * s);
    double ad = a.down_bits / (inst.users[i].eta_d * c_d * s);
    double dc = a.any_cloud ? au + ad + a.cloud_const : 0;
    double da = a.any_cap ? au + ad + a.cap_cycles / (f_a * s) : 0;
    return std::max(dc, da);
  };
  if (delay(1.0) >= target) return 1.0;
  double lo = 1e-9, hi = 1.0;
  if (delay(lo) <= target) return lo;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    if (delay(mid) > target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

void solve_into(const Instance& inst, const std::vector<UserAgg>& agg,
                const std::vector<int>& free_users, double bud_u, double bud_d,
                double bud_tot, double bud_f, Allocation& out) {
  if (free_users.empty()) return;
  Subproblem sp = build_subproblem(inst, agg, free_users, bud_u, bud_d, bud_tot, bud_f);
  VectorXd x0 = initial_point(inst, agg, sp, bud_u, bud_d, bud_tot, bud_f);
  VectorXd x = solve_barrier(sp.pb, x0);
  for (size_t k = 0; k < sp.users.size(); ++k) {
    int i = sp.users[k];
    out.c_u[i] = x[sp.vars[k].u] * inst.params.c_total;
    out.c_d[i] = x[sp.vars[k].d] * inst.params.c_total;
    if (sp.vars[k].f >= 0) out.f_a[i] = x[sp.vars[k].f] * inst.params.f_a_total;
  }
}

void project_budget(std::vector<double>& v, const std::vector<int>& idx, double budget) {
  double s = 0;
  for (int i : idx) s += v[i];
  if (s > budget && s > 0) {
    double scale = budget / s;
    for (int i : idx) v[i] *= scale;
  }
}

}  // namespace

std::pair<Allocation, CostBreakdown> allocate(const Instance& inst, const Decision& dec) {
  dec.validate(inst);
  Allocation out = Allocation::zeros(inst);
  std::vector<UserAgg> agg = aggregate(inst, dec);
  std::vector<int> offloaders;
  for (int i = 0; i < inst.n_users(); ++i)
    if (agg[i].any_offload) offloaders.push_back(i);

  if (!offloaders.empty()) {
    const SystemParams& P = inst.params;
    double bud_u = P.c_ul / P.c_total;
    double bud_d = P.c_dl / P.c_total;
    solve_into(inst, agg, offloaders, bud_u, bud_d, 1.0, 1.0, out);

    // Users whose local-task time dominates their offload delay can give
    // bandwidth back without changing their cost; shrink them to the point
    // where the offload delay meets the local time, then re-solve the rest
    // over the released budget.
    std::vector<int> fixed, remaining;
    for (int i : offloaders) {
      double s = shrink_scale(agg[i], inst, i, out.c_u[i], out.c_d[i],
                              agg[i].any_cap ? out.f_a[i] : 1.0, agg[i].t_local);
      if (s < 1.0 - 1e-9) {
        s = std::min(1.0, s * 1.000001);
        out.c_u[i] *= s;
        out.c_d[i] *= s;
        if (agg[i].any_cap) out.f_a[i] *= s;
        fixed.push_back(i);
      } else {
        remaining.push_back(i);
      }
    }
    if (!fixed.empty() && !remaining.empty()) {
      double used_u = 0, used_d = 0, used_f = 0;
      for (int i : fixed) {
        used_u += out.c_u[i] / P.c_total;
        used_d += out.c_d[i] / P.c_total;
        if (agg[i].any_cap) used_f += out.f_a[i] / P.f_a_total;
      }
      solve_into(inst, agg, remaining, bud_u - used_u, bud_d - used_d,
                 1.0 - used_u - used_d, 1.0 - used_f, out);
    }

    // Exact feasibility: project onto the budget box if numerics left any
    // sum a hair over.
    project_budget(out.c_u, offloaders, P.c_ul);
    project_budget(out.c_d, offloaders, P.c_dl);
    std::vector<double> tot(inst.n_users(), 0.0);
    for (int i : offloaders) tot[i] = out.c_u[i] + out.c_d[i];
    double s_tot = 0;
    for (int i : offloaders) s_tot += tot[i];
    if (s_tot > P.c_total && s_tot > 0) {
      double scale = P.c_total / s_tot;
      for (int i : offloaders) {
        out.c_u[i] *= scale;
        out.c_d[i] *= scale;
      }
    }
    if (!out.f_a.empty()) {
      std::vector<int> cap_users;
      for (int i : offloaders)
        if (agg[i].any_cap) cap_users.push_back(i);
      project_budget(out.f_a, cap_users, P.f_a_total);
    }
  }

  CostBreakdown cb = total_cost(inst, dec, out, BoundKind::Upper);
  return {out, cb};
}

}  // namespace alloc
}  // namespace offload
