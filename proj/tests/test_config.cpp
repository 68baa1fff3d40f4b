#include <string>

#include "doctest.h"
#include "helpers.hpp"
#include "offload/config.hpp"

using namespace offload;

TEST_CASE("serialize then parse reproduces the instance field-for-field") {
  for (int seed : {1, 17, 392}) {
    Instance orig = testutil::make_instance(3, 2, seed, Mode::WithCap);
    orig.params.alpha = 3.25e-7;
    orig.users[1].rho = 2.5;
    orig.users[2].device.tx_energy_per_bit = 9e-8;

    InstanceConfig cfg = parse_config(serialize_instance(orig));
    REQUIRE(cfg.fixed);
    Instance back = cfg.instantiate();

    REQUIRE(back.n_users() == orig.n_users());
    CHECK(back.mode == orig.mode);
    CHECK(back.params.alpha == orig.params.alpha);
    CHECK(back.params.beta == orig.params.beta);
    CHECK(back.params.c_total == orig.params.c_total);
    CHECK(back.params.r_ac == orig.params.r_ac);
    CHECK(back.params.lambda1 == orig.params.lambda1);
    CHECK(back.params.usage_d_in_bytes == orig.params.usage_d_in_bytes);
    for (int i = 0; i < orig.n_users(); ++i) {
      CHECK(back.users[i].eta_u == orig.users[i].eta_u);
      CHECK(back.users[i].rho == orig.users[i].rho);
      CHECK(back.users[i].device.tx_energy_per_bit ==
            orig.users[i].device.tx_energy_per_bit);
      REQUIRE(back.users[i].tasks.size() == orig.users[i].tasks.size());
      for (size_t j = 0; j < orig.users[i].tasks.size(); ++j) {
        CHECK(back.users[i].tasks[j].d_in == orig.users[i].tasks[j].d_in);
        CHECK(back.users[i].tasks[j].d_out == orig.users[i].tasks[j].d_out);
        CHECK(back.users[i].tasks[j].cycles == orig.users[i].tasks[j].cycles);
      }
    }
  }
}

TEST_CASE("generated configs honour overrides and comments") {
  InstanceConfig cfg = parse_config(
      "# system\n"
      "mode = cap\n"
      "n_users = 3\n"
      "m_tasks = 2\n"
      "seed = 9\n"
      "rho = 0.5   # delay weight\n"
      "eta_u = 4.0\n"
      "f_c_cps = 2e10\n");
  CHECK_FALSE(cfg.fixed);
  Instance inst = cfg.instantiate();
  CHECK(inst.mode == Mode::WithCap);
  CHECK(inst.n_users() == 3);
  CHECK(inst.m_tasks(0) == 2);
  CHECK(inst.params.f_c == 2e10);
  for (const UserProfile& u : inst.users) {
    CHECK(u.rho == 0.5);
    CHECK(u.eta_u == 4.0);
    CHECK(u.eta_d == 3.5);
  }
  // same seed, same data
  Instance again = cfg.instantiate();
  CHECK(again.users[2].tasks[1].d_in == inst.users[2].tasks[1].d_in);
}

TEST_CASE("diagnostics carry line numbers") {
  auto message = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };

  CHECK(message("mode = nocap\nwhat is this\n").find("line 2") != std::string::npos);
  CHECK(message("n_users = 2\nbogus_key = 1\n").find("unknown key") != std::string::npos);
  CHECK(message("n_users = 2\nbogus_key = 1\n").find("line 2") != std::string::npos);
  CHECK(message("rho = fast\n").find("line 1") != std::string::npos);
  CHECK(message("rho = 1\nrho = 2\n").find("duplicate") != std::string::npos);
  CHECK(message("user.0.d_in_bits = [1e8\n").find("unterminated") != std::string::npos);
  CHECK(message("mode = sideways\n").find("mode") != std::string::npos);
}

TEST_CASE("explicit user blocks require matching array lengths") {
  const char* good =
      "mode = nocap\n"
      "user.0.d_in_bits = [1.6e8, 8e7]\n"
      "user.0.d_out_bits = [1.6e7, 8e6]\n"
      "user.0.cycles = [3.8e10, 1.9e10]\n";
  InstanceConfig cfg = parse_config(good);
  REQUIRE(cfg.fixed);
  Instance inst = cfg.instantiate();
  CHECK(inst.n_users() == 1);
  CHECK(inst.users[0].tasks[1].d_out == 8e6);

  const char* bad =
      "user.0.d_in_bits = [1.6e8, 8e7]\n"
      "user.0.d_out_bits = [1.6e7]\n"
      "user.0.cycles = [3.8e10, 1.9e10]\n";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}
