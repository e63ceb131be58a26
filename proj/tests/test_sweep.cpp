#include <doctest.h>

#include <cmath>

#include "ringrc/errors.hpp"
#include "ringrc/maps.hpp"
#include "ringrc/sweep.hpp"

using namespace ringrc;

namespace {

ExperimentSettings quick() {
  ExperimentSettings s;
  s.check_self_pulsing = false;
  return s;
}

SweepGrid tiny(std::vector<double> powers) {
  SweepGrid g;
  g.bitrates_mbps = {1000};
  g.detunings_ghz = {-20};
  g.powers_dbm = std::move(powers);
  g.n_v_list = {5};
  g.tasks = {TaskSpec::parse("AND:1:1"), TaskSpec::parse("XOR:1:2")};
  return g;
}

}  // namespace

TEST_SUITE("sweep") {
  TEST_CASE("detuning convention") {
    CHECK(laser_offset_hz(20.0) == -20e9);
    CHECK(laser_offset_hz(-5.0) == 5e9);
  }

  TEST_CASE("warm-up covers one period and five thermal lifetimes") {
    const ExperimentSettings s;
    CHECK(warmup_bits(50e6, s) == 255);
    CHECK(warmup_bits(1000e6, s) == 510);
    CHECK(warmup_bits(4000e6, s) == 2040);
  }

  TEST_CASE("grid sizes") {
    const auto desk = SweepGrid::desk();
    CHECK(desk.tasks.size() == 9);
    CHECK(desk.point_count() == 36);
    CHECK(desk.row_count() == 9 * 4 * 3 * 3);
    const auto full = SweepGrid::full();
    CHECK(full.bitrates_mbps.size() == 13);
    CHECK(full.detunings_ghz.size() == 13);
    CHECK(full.powers_dbm.size() == 11);
    CHECK(full.n_v_list == std::vector<int>{3, 4, 5, 10, 15, 20, 30});
    CHECK(full.row_count() == full.tasks.size() * 7 * 13 * 13 * 11);
  }

  TEST_CASE("invalid grids and settings") {
    auto g = tiny({8});
    g.powers_dbm.clear();
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = tiny({8});
    g.n_v_list = {0};
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = tiny({8});
    g.bitrates_mbps = {30000};
    CHECK_THROWS_AS(run_sweep(g, quick()), ConfigError);
    auto s = quick();
    s.prbs_seed = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = quick();
    s.sim_sample_rate = 10e9;
    CHECK_THROWS_AS(s.validate(), ConfigError);
  }

  TEST_CASE("empty task list gives an empty result set") {
    auto g = tiny({8});
    g.tasks.clear();
    CHECK(run_sweep(g, quick()).empty());
  }

  TEST_CASE("both branches are scored on the same test bits") {
    auto s = quick();
    const auto t = simulate_point({1000, -20, 12, 1}, s);
    CHECK(t.warmup == 510);
    CHECK(t.eval_bits == 5100);
    CHECK(t.bits.size() == 510 + 5100 + 2);
    CHECK(t.detected_in.size() == t.detected_out.size());
    const auto r = evaluate_readout(t, TaskSpec::parse("XOR:2:3"), 5, s);
    CHECK(r.in.test_bits == r.out.test_bits);
    CHECK(r.in.test_bits.size() == 2550);
    CHECK(r.in.test_bits.front() == 510 + 2550);
    CHECK(r.out.evaluation.n_test == 2550);
  }

  TEST_CASE("linear task with an ideal modulator is solved by both branches") {
    auto s = quick();
    s.modulator = ModulatorModel::ideal();
    const auto r = run_configuration(TaskSpec::parse("AND:1:2"), 5, {1000, 0, 8, 1}, s);
    CHECK_FALSE(r.failed);
    CHECK(r.ber_out.at_floor);
    CHECK(r.ber_in.at_floor);
    CHECK(r.rb_log10() == doctest::Approx(0.0));
  }

  TEST_CASE("worker count, ordering and failure isolation") {
    const auto s = quick();
    const auto g = tiny({8, 300});
    SweepOptions one, three;
    three.workers = 3;
    std::size_t calls = 0;
    one.progress = [&](std::size_t, std::size_t total) {
      ++calls;
      CHECK(total == 2);
    };
    const auto a = run_sweep(g, s, one);
    const auto b = run_sweep(g, s, three);
    CHECK(calls == 2);
    REQUIRE(a.size() == 4);
    CHECK(results_to_csv(a) == results_to_csv(b));

    // Order: task, n_v, bitrate, detuning, power.
    CHECK(a[0].task == g.tasks[0]);
    CHECK(a[0].point.power_dbm == 8);
    CHECK(a[1].point.power_dbm == 300);
    CHECK(a[2].task == g.tasks[1]);

    CHECK_FALSE(a[0].failed);
    CHECK(a[1].failed);
    CHECK(a[1].failure.find("non-finite") != std::string::npos);
    CHECK(std::isnan(a[1].ber_out.ber));

    const auto alone = run_sweep(tiny({8}), s);
    REQUIRE(alone.size() == 2);
    CHECK(results_to_csv(std::vector{alone[0], alone[1]}) == results_to_csv(std::vector{a[0], a[2]}));
  }
}
