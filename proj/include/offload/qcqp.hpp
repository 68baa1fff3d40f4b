#pragma once

#include <Eigen/Dense>

#include "offload/costs.hpp"
#include "offload/model.hpp"

namespace offload {

// Per-user slot layout of the homogenized decision vector.
//
// NoCap / Upper:  [x_1..x_M, c_u, D_u, c_d, D_d, t, hom]        (M + 6)
// NoCap / Lower:  [x_1..x_M, c_u, c_d, t, hom]                  (M + 4)
// WithCap / Upper:[x^l,x^a,x^c per task, c_u, D_u, c_d, D_d,
//                  f_a, D_a, t, hom]                            (3M + 8)
// WithCap / Lower:[x^l,x^a,x^c per task, c_u, c_d, f_a, t, hom] (3M + 5)
//
// The Lower variants bound each best-case delay component against t
// directly, so the pipeline auxiliaries D_u/D_d/D_a are not needed.
//
// Matrix entries are in scaled units: data in Mbit, bandwidth in MHz,
// processing rates in Gcycles/s, time in seconds, energy in joules.
// slot_scale maps a scaled slot value back to SI.
struct VariableLayout {
  Mode mode = Mode::NoCap;
  BoundKind bound = BoundKind::Upper;
  int m_tasks = 0;
  int dim = 0;
  std::vector<double> slot_scale;  // SI value = scaled value * slot_scale[k]

  int x(int j) const;                 // NoCap decision slot
  int x(int j, Placement p) const;    // WithCap decision slot
  int c_u() const;
  int c_d() const;
  int f_a() const;  // -1 in NoCap mode
  int d_u() const;  // -1 in Lower variants
  int d_d() const;
  int d_a() const;
  int t() const;
  int hom() const { return dim - 1; }
  int n_x() const { return mode == Mode::NoCap ? m_tasks : 3 * m_tasks; }

  static VariableLayout make(Mode mode, BoundKind bound, int m_tasks);
};

enum class Sense { LessEq, Eq };

// Constraint categories, used by structural audit tests and debug dumps.
enum class RowKind { Delay, Integer, Placement, Nonneg, TraceCap };

struct QuadConstraint {
  Eigen::MatrixXd mat;  // symmetric, dim x dim
  Sense sense = Sense::LessEq;
  double rhs = 0;
  RowKind kind = RowKind::Delay;
};

struct UserBlock {
  VariableLayout layout;
  Eigen::MatrixXd objective;  // G_i, symmetric
  std::vector<QuadConstraint> constraints;
};

// sum_i z_i^T mats[i] z_i  (sense)  rhs
struct CouplingConstraint {
  std::vector<Eigen::MatrixXd> mats;
  Sense sense = Sense::LessEq;
  double rhs = 0;
  std::string name;
};

struct SeparableQcqp {
  std::vector<UserBlock> users;
  std::vector<CouplingConstraint> coupling;
  double offset = 0;  // constant added back to the quadratic objective, J
};

namespace qcqp {

// Assemble the homogeneous separable QCQP for the requested delay bound.
SeparableQcqp build(const Instance& inst, BoundKind bound);

// Lift a feasible (decision, allocation) pair into the scaled z vectors,
// with auxiliaries set to their tight values. Used by exactness tests.
std::vector<Eigen::VectorXd> embed_point(const Instance& inst,
                                         const SeparableQcqp& prob,
                                         const Decision& dec,
                                         const Allocation& alloc);

// sum_i z_i^T G_i z_i + offset
double eval_objective(const SeparableQcqp& prob,
                      const std::vector<Eigen::VectorXd>& z);

// Plain-text sparse triplet dump of all matrices, for solver cross-checks.
std::string dump(const SeparableQcqp& prob);

}  // namespace qcqp
}  // namespace offload
