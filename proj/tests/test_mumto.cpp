#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "offload/mumto.hpp"
#include "offload/oracle.hpp"

using namespace offload;

TEST_CASE("rounding the relaxed fractions, ties go to the cloud") {
  Instance inst = testutil::make_instance(1, 3, 2, Mode::NoCap);
  VariableLayout l = VariableLayout::make(Mode::NoCap, BoundKind::Upper, 3);
  SdpSolution sol;
  sol.blocks.assign(1, Eigen::MatrixXd::Zero(l.dim, l.dim));
  sol.blocks[0](l.hom(), l.x(0)) = 0.21;
  sol.blocks[0](l.hom(), l.x(1)) = 0.5;
  sol.blocks[0](l.hom(), l.x(2)) = 0.73;
  sol.status = SdpStatus::Optimal;

  Decision dec = mumto::recover_decision(inst, sol);
  CHECK(dec.placement[0][0] == Placement::Local);
  CHECK(dec.placement[0][1] == Placement::Cloud);
  CHECK(dec.placement[0][2] == Placement::Cloud);
}

TEST_CASE("single task instances are solved exactly") {
  for (int seed = 1; seed <= 10; ++seed) {
    Instance inst = testutil::make_instance(1, 1, seed, Mode::NoCap);
    MumtoResult r = mumto::run(inst);
    OracleResult best = oracle::exhaustive(inst, BoundKind::Upper);
    CHECK(r.cost.total == doctest::Approx(best.cost).epsilon(1e-9));
  }
}

TEST_CASE("never worse than the trivial baselines") {
  for (int seed = 1; seed <= 10; ++seed) {
    Instance inst = testutil::make_instance(3, 2, 100 + seed, Mode::NoCap);
    MumtoResult r = mumto::run(inst);
    CHECK_FALSE(r.fallback);
    double local = oracle::baseline(inst, BaselineKind::LocalOnly).cost;
    double cloud = oracle::baseline(inst, BaselineKind::CloudOnly).cost;
    CHECK(r.cost.total <= local * (1 + 1e-9));
    CHECK(r.cost.total <= cloud * (1 + 1e-9));
  }
}

TEST_CASE("expensive cloud collapses the pipeline to all-local") {
  auto [p, d] = default_params();
  p.beta = 1e-2;
  for (int seed = 1; seed <= 5; ++seed) {
    Instance inst = generate_instance(p, d, 2, 2, seed, Mode::NoCap);
    MumtoResult r = mumto::run(inst);
    CHECK(r.decision == Decision::all_local(inst));
    // and the certified bound closes on the all-local cost
    double lb = mumto::lower_bound(inst);
    CHECK(lb <= r.cost.total * (1 + 1e-9));
    CHECK(lb >= r.cost.total * (1 - 1e-4));
  }
}

TEST_CASE("sandwich against the exhaustive oracle on small instances") {
  double gap_sum = 0, gap_max = 0;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    Instance inst = testutil::make_instance(2, 2, seed, Mode::NoCap);
    MumtoResult r = mumto::run(inst);
    double lb = mumto::lower_bound(inst);
    OracleResult best_lo = oracle::exhaustive(inst, BoundKind::Lower);
    OracleResult best_up = oracle::exhaustive(inst, BoundKind::Upper);

    const double slack = 1e-6;
    CHECK(lb <= best_lo.cost * (1 + slack));
    CHECK(best_lo.cost <= best_up.cost * (1 + slack));
    CHECK(best_up.cost <= r.cost.total * (1 + slack));

    double gap = (r.cost.total - best_up.cost) / best_up.cost;
    gap_sum += gap;
    gap_max = std::max(gap_max, gap);
  }
  CHECK(gap_sum / seeds <= 0.05);
  CHECK(gap_max <= 0.15);
}

TEST_CASE("cap-mode instances are rejected") {
  Instance inst = testutil::make_instance(2, 2, 1, Mode::WithCap);
  CHECK_THROWS_AS(mumto::run(inst), std::invalid_argument);
  CHECK_THROWS_AS(mumto::lower_bound(inst), std::invalid_argument);
}
