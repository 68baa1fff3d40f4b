#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "offload/alloc.hpp"

using namespace offload;

TEST_CASE("all-local decisions need no resources") {
  Instance inst = testutil::make_instance(3, 2, 12, Mode::WithCap);
  Decision dec = Decision::all_local(inst);
  auto [a, cb] = alloc::allocate(inst, dec);
  for (int i = 0; i < inst.n_users(); ++i) {
    CHECK(a.c_u[i] == 0.0);
    CHECK(a.c_d[i] == 0.0);
    CHECK(a.f_a[i] == 0.0);
  }
  double expected = 0;
  for (const UserProfile& u : inst.users) {
    double t_sum = 0;
    for (const TaskSpec& t : u.tasks) {
      expected += u.device.local_energy_per_bit * t.d_in;
      t_sum += u.device.local_time_per_bit * t.d_in;
    }
    expected += u.rho * t_sum;
  }
  CHECK(cb.total == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("a lone offloader saturates the shared bandwidth budget") {
  Instance inst = testutil::make_instance(1, 2, 8, Mode::NoCap);
  Decision dec = Decision::uniform(inst, Placement::Cloud);
  auto [a, cb] = alloc::allocate(inst, dec);
  CHECK_NOTHROW(a.validate(inst));
  CHECK(a.c_u[0] + a.c_d[0] == doctest::Approx(inst.params.c_total).epsilon(1e-6));
  CHECK(cb.total == doctest::Approx(
            total_cost(inst, dec, a, BoundKind::Upper).total));
}

TEST_CASE("symmetric users get a symmetric split") {
  auto [p, d] = default_params();
  Instance inst;
  inst.params = p;
  inst.mode = Mode::NoCap;
  UserProfile u;
  u.eta_u = u.eta_d = 3.5;
  u.rho = 1.0;
  u.device = d;
  u.tasks = {testutil::reference_task()};
  inst.users = {u, u};
  inst.validate();

  Decision dec = Decision::uniform(inst, Placement::Cloud);
  auto [a, cb] = alloc::allocate(inst, dec);
  CHECK(a.c_u[0] == doctest::Approx(a.c_u[1]).epsilon(1e-5));
  CHECK(a.c_d[0] == doctest::Approx(a.c_d[1]).epsilon(1e-5));

  double grid = testutil::grid_search_cost(inst, dec, 200);
  CHECK(cb.total <= grid * (1 + 1e-6));
  CHECK(cb.total >= grid * (1 - 1e-3));
}

TEST_CASE("matches a dense grid search on small random decisions") {
  std::mt19937_64 rng(314);
  int nontrivial = 0;
  for (int trial = 0; trial < 6; ++trial) {
    Instance inst = testutil::make_instance(2, 2, 40 + trial, Mode::NoCap);
    Decision dec = testutil::random_decision(inst, rng);
    auto [a, cb] = alloc::allocate(inst, dec);
    CHECK_NOTHROW(a.validate(inst));
    double grid = testutil::grid_search_cost(inst, dec, 120);
    CHECK(cb.total <= grid * (1 + 1e-6));     // never worse than the grid
    CHECK(cb.total >= grid * (1 - 1e-3));     // and within 0.1% of it
    bool any = false;
    for (const auto& row : dec.placement)
      for (Placement pl : row) any = any || pl != Placement::Local;
    nontrivial += any;
  }
  CHECK(nontrivial >= 3);  // the sample actually exercised offloading
}

TEST_CASE("permuting users permutes the allocation") {
  Instance inst = testutil::make_instance(3, 2, 21, Mode::WithCap);
  std::mt19937_64 rng(6);
  Decision dec = testutil::random_decision(inst, rng);
  auto [a, cb] = alloc::allocate(inst, dec);

  // swap users 0 and 2
  Instance swapped = inst;
  std::swap(swapped.users[0], swapped.users[2]);
  Decision sdec = dec;
  std::swap(sdec.placement[0], sdec.placement[2]);
  auto [b, cb2] = alloc::allocate(swapped, sdec);

  CHECK(cb2.total == doctest::Approx(cb.total).epsilon(1e-6));
  CHECK(b.c_u[0] == doctest::Approx(a.c_u[2]).epsilon(1e-4));
  CHECK(b.c_u[2] == doctest::Approx(a.c_u[0]).epsilon(1e-4));
  CHECK(b.f_a[1] == doctest::Approx(a.f_a[1]).epsilon(1e-4));
}

TEST_CASE("output is feasible on larger instances") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 10; ++trial) {
    Mode mode = trial % 2 ? Mode::WithCap : Mode::NoCap;
    Instance inst = testutil::make_instance(5, 4, 70 + trial, mode);
    Decision dec = testutil::random_decision(inst, rng);
    auto [a, cb] = alloc::allocate(inst, dec);
    CHECK_NOTHROW(a.validate(inst));
    CHECK(std::isfinite(cb.total));
    CHECK(cb.total > 0);
    // non-offloading users hold no resources
    for (int i = 0; i < inst.n_users(); ++i) {
      bool any = false;
      for (Placement pl : dec.placement[i]) any = any || pl != Placement::Local;
      if (!any) {
        CHECK(a.c_u[i] == 0.0);
        CHECK(a.c_d[i] == 0.0);
      }
    }
  }
}
