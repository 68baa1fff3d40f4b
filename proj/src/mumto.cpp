#include "offload/mumto.hpp"

#include <stdexcept>

namespace offload {
namespace mumto {
namespace {

bool solution_usable(const SdpSolution& sol) {
  if (sol.status == SdpStatus::Optimal) return true;
  return sol.status == SdpStatus::MaxIter && sol.gap <= 1e-4 &&
         sol.primal_residual <= 1e-6;
}

}  // namespace

Decision recover_decision(const Instance& inst, const SdpSolution& sol) {
  if (inst.mode != Mode::NoCap)
    throw std::invalid_argument("recover_decision expects NoCap mode");
  Decision dec;
  dec.placement.resize(inst.n_users());
  for (int i = 0; i < inst.n_users(); ++i) {
    VariableLayout lay = VariableLayout::make(Mode::NoCap, BoundKind::Upper,
                                              inst.m_tasks(i));
    const Eigen::MatrixXd& Z = sol.blocks[i];
    dec.placement[i].resize(inst.m_tasks(i));
    for (int j = 0; j < inst.m_tasks(i); ++j) {
      double p = Z(lay.hom(), lay.x(j));
      dec.placement[i][j] = p >= 0.5 ? Placement::Cloud : Placement::Local;
    }
  }
  return dec;
}

MumtoResult run(const Instance& inst) {
  if (inst.mode != Mode::NoCap)
    throw std::invalid_argument("mumto::run expects NoCap mode");
  MumtoResult res;
  SeparableQcqp prob = qcqp::build(inst, BoundKind::Upper);
  SdpSolution sol = sdp::solve(prob);
  Decision recovered;
  if (solution_usable(sol)) {
    recovered = recover_decision(inst, sol);
    res.relaxed_objective = sol.objective + prob.offset;
    res.fractional_p.resize(inst.n_users());
    for (int i = 0; i < inst.n_users(); ++i) {
      VariableLayout lay = VariableLayout::make(Mode::NoCap, BoundKind::Upper,
                                                inst.m_tasks(i));
      for (int j = 0; j < inst.m_tasks(i); ++j)
        res.fractional_p[i].push_back(sol.blocks[i](lay.hom(), lay.x(j)));
    }
  } else {
    recovered = Decision::all_local(inst);
    res.fallback = true;
  }

  Decision candidates[3] = {recovered, Decision::all_local(inst),
                            Decision::uniform(inst, Placement::Cloud)};
  bool have = false;
  for (const Decision& d : candidates) {
    auto [a, cb] = alloc::allocate(inst, d);
    if (!have || cb.total < res.cost.total) {
      res.decision = d;
      res.allocation = a;
      res.cost = cb;
      have = true;
    }
  }
  return res;
}

double lower_bound(const Instance& inst) {
  if (inst.mode != Mode::NoCap)
    throw std::invalid_argument("mumto::lower_bound expects NoCap mode");
  SeparableQcqp prob = qcqp::build(inst, BoundKind::Lower);
  SdpSolution sol = sdp::solve(prob);
  return sol.dual_objective + prob.offset;
}

}  // namespace mumto
}  // namespace offload
