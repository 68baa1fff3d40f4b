#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "offload/oracle.hpp"
#include "offload/sdp.hpp"

using namespace offload;

namespace {

void check_solution_shape(const SeparableQcqp& prob, const SdpSolution& sol) {
  REQUIRE(sol.blocks.size() == prob.users.size());
  for (size_t i = 0; i < sol.blocks.size(); ++i) {
    const Eigen::MatrixXd& Z = sol.blocks[i];
    const int dim = prob.users[i].layout.dim;
    REQUIRE(Z.rows() == dim);
    REQUIRE(Z.cols() == dim);
    CHECK((Z - Z.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(Z(dim - 1, dim - 1) == doctest::Approx(1.0).epsilon(1e-8));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Z);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, Z.norm()));
    // decision entries of the last row live in [0, 1]
    const VariableLayout& l = prob.users[i].layout;
    for (int k = 0; k < l.n_x(); ++k) {
      CHECK(Z(dim - 1, k) >= -1e-8);
      CHECK(Z(dim - 1, k) <= 1.0 + 1e-8);
    }
  }
}

}  // namespace

TEST_CASE("relaxation solves cleanly and lower-bounds the oracle") {
  for (int trial = 0; trial < 12; ++trial) {
    Mode mode = trial % 2 ? Mode::WithCap : Mode::NoCap;
    BoundKind bound = trial % 4 < 2 ? BoundKind::Upper : BoundKind::Lower;
    Instance inst = testutil::make_instance(2, 2, 60 + trial, mode);

    SeparableQcqp prob = qcqp::build(inst, bound);
    SdpSolution sol = sdp::solve(prob);
    REQUIRE(sol.status == SdpStatus::Optimal);
    CHECK(sol.gap <= 1e-6);
    CHECK(sol.primal_residual <= 1e-6);
    CHECK(sol.dual_residual <= 1e-6);
    check_solution_shape(prob, sol);

    // relaxation value never exceeds the exhaustive optimum for this bound
    OracleResult best = oracle::exhaustive(inst, bound);
    CHECK(sol.objective + prob.offset <= best.cost * (1 + 1e-6) + 1e-6);
    CHECK(sol.dual_objective + prob.offset <= best.cost * (1 + 1e-6) + 1e-6);
    // and primal/dual values agree to the reported gap
    CHECK(std::abs(sol.objective - sol.dual_objective) <=
          2e-6 * (1 + std::abs(sol.objective)));
  }
}

TEST_CASE("feasible binary points dominate the relaxation value") {
  std::mt19937_64 rng(5);
  Instance inst = testutil::make_instance(2, 2, 77, Mode::WithCap);
  SeparableQcqp prob = qcqp::build(inst, BoundKind::Upper);
  SdpSolution sol = sdp::solve(prob);
  REQUIRE(sol.status == SdpStatus::Optimal);
  for (int k = 0; k < 10; ++k) {
    Decision dec = testutil::random_decision(inst, rng);
    Allocation a = testutil::random_allocation(inst, dec, rng);
    double binary = total_cost(inst, dec, a, BoundKind::Upper).total;
    CHECK(sol.objective + prob.offset <= binary * (1 + 1e-6));
  }
}

TEST_CASE("a cloud-hostile instance relaxes to the all-local cost") {
  // With an enormous beta the only sensible binary point is all-Local, and
  // the relaxation should match its cost tightly.
  auto [p, d] = default_params();
  p.beta = 1.0;  // J per usage-bit, absurdly expensive cloud
  Instance inst = generate_instance(p, d, 2, 2, 31, Mode::NoCap);
  Decision local = Decision::all_local(inst);
  double local_cost =
      total_cost(inst, local, Allocation::zeros(inst), BoundKind::Upper).total;

  SeparableQcqp prob = qcqp::build(inst, BoundKind::Lower);
  SdpSolution sol = sdp::solve(prob);
  REQUIRE(sol.status == SdpStatus::Optimal);
  double value = sol.objective + prob.offset;
  CHECK(value <= local_cost * (1 + 1e-6));
  CHECK(value >= local_cost * (1 - 1e-4));
}
