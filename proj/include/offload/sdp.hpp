#pragma once

#include <Eigen/Dense>

#include "offload/qcqp.hpp"

namespace offload {

enum class SdpStatus { Optimal, MaxIter, Infeasible };

struct SdpSolution {
  std::vector<Eigen::MatrixXd> blocks;  // Z_i per user, scaled variable space
  double objective = 0;       // primal objective, sum Tr(G_i Z_i) (no offset)
  double dual_objective = 0;  // b^T y, a certified bound modulo dual residual
  SdpStatus status = SdpStatus::MaxIter;
  double gap = 0;             // relative duality gap
  double primal_residual = 0; // max_k |b_k - <A_k,X>| / (1 + |b_k|)
  double dual_residual = 0;
  int iterations = 0;
};

namespace sdp {

inline constexpr double kDefaultTol = 1e-6;
inline constexpr int kMaxIterations = 500;

SdpSolution solve(const SeparableQcqp& problem, double tol = kDefaultTol);

}  // namespace sdp
}  // namespace offload
