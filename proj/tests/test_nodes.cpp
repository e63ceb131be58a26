#include <doctest.h>

#include <random>

#include "ringrc/errors.hpp"
#include "ringrc/nodes.hpp"

using namespace ringrc;

namespace {

OpticalWaveform ramp(std::size_t n, double rate) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return OpticalWaveform::from_power(v, rate);
}

}  // namespace

TEST_SUITE("nodes") {
  TEST_CASE("samples per bit") {
    CHECK(samples_per_bit(20e6, 20e9) == 1000);
    CHECK(samples_per_bit(4000e6, 20e9) == 5);
    CHECK(samples_per_bit(2000e6, 20e9) == 10);
    CHECK(samples_per_bit(3000e6, 20e9) == 6);
    CHECK_THROWS_AS(samples_per_bit(30e9, 20e9), ConfigError);
  }

  TEST_CASE("rebinning 1000 samples into 10 nodes averages blocks of 100") {
    const auto w = ramp(3000, 20e9);
    const auto m = rebin_to_nodes(w, 20e6, 10, 0);
    REQUIRE(m.rows() == 3);
    CHECK(m.samples_per_bit_raw == 1000);
    for (int r = 0; r < 3; ++r)
      for (int q = 0; q < 10; ++q) CHECK(m.values(r, q) == doctest::Approx(1000.0 * r + 100.0 * q + 49.5));
  }

  TEST_CASE("equal sample and node counts keep the samples") {
    const auto w = ramp(100, 20e9);
    const auto m = rebin_to_nodes(w, 2000e6, 10, 0);
    REQUIRE(m.rows() == 10);
    for (int r = 0; r < 10; ++r)
      for (int q = 0; q < 10; ++q) CHECK(m.values(r, q) == 10.0 * r + q);
  }

  TEST_CASE("fewer samples than nodes are zero filled") {
    const auto w = ramp(50, 20e9);
    const auto m = rebin_to_nodes(w, 4000e6, 10, 0);
    REQUIRE(m.rows() == 10);
    CHECK(m.samples_per_bit_raw == 5);
    for (int r = 0; r < 10; ++r) {
      for (int q = 0; q < 5; ++q) CHECK(m.values(r, q) == 5.0 * r + q);
      for (int q = 5; q < 10; ++q) CHECK(m.values(r, q) == 0.0);
    }
  }

  TEST_CASE("uneven bins put the extra samples first") {
    // 7 samples per bit into 3 nodes: 3, 2, 2.
    const auto w = ramp(14, 7e9);
    const auto m = rebin_to_nodes(w, 1e9, 3, 0);
    REQUIRE(m.rows() == 2);
    CHECK(m.values(0, 0) == doctest::Approx(1.0));
    CHECK(m.values(0, 1) == doctest::Approx(3.5));
    CHECK(m.values(0, 2) == doctest::Approx(5.5));
    CHECK(m.values(1, 0) == doctest::Approx(8.0));
  }

  TEST_CASE("offset, skip and limit") {
    const auto w = ramp(1000, 20e9);
    const auto m = rebin_to_nodes(w, 1e9, 5, 3, Branch::input, 2, 4);
    REQUIRE(m.rows() == 4);
    CHECK(m.first_bit == 2);
    CHECK(m.branch == Branch::input);
    CHECK(m.values(0, 0) == doctest::Approx(3 + 40 + 1.5));
    CHECK_THROWS_AS(rebin_to_nodes(OpticalWaveform::from_power({}, 20e9), 1e9, 5, 0), ConfigError);
    CHECK_THROWS_AS(rebin_to_nodes(ramp(10, 20e9), 1e9, 5, 0), ConfigError);
  }

  TEST_CASE("fractional samples per bit follow the true bit boundaries") {
    // 20 GSa/s at 3 Gb/s: bits start at floor(k * 20 / 3).
    const auto w = ramp(200, 20e9);
    const auto m = rebin_to_nodes(w, 3e9, 1, 0);
    CHECK(m.values(1, 0) == doctest::Approx((6 + 7 + 8 + 9 + 10 + 11) / 6.0));
    CHECK(m.values(2, 0) == doctest::Approx((13 + 14 + 15 + 16 + 17 + 18) / 6.0));
  }

  TEST_CASE("rebinning conserves the per-bit mean") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(0.0, 2.0);
    std::vector<double> v(4000);
    for (auto& x : v) x = u(rng);
    const auto m = rebin_to_nodes(OpticalWaveform::from_power(v, 20e9), 50e6, 8, 0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      double raw = 0;
      for (int i = 0; i < 400; ++i) raw += v[r * 400 + i];
      CHECK(m.values.row(r).mean() == doctest::Approx(raw / 400).epsilon(1e-12));
    }
  }

  TEST_CASE("design matrix layout") {
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    NodeMatrix nodes;
    nodes.values = Eigen::MatrixXd::NullaryExpr(30, 5, [&] { return g(rng); });
    nodes.n_v_desired = 5;
    nodes.first_bit = 100;

    const auto d1 = assemble_design_matrix(nodes, 1);
    CHECK(d1.x.cols() == 6);
    CHECK(d1.x.rows() == 30);
    CHECK(d1.x.leftCols(5) == nodes.values);
    CHECK((d1.x.col(5).array() == 1.0).all());
    CHECK(d1.row_bit_index.front() == 100);

    const auto d2 = assemble_design_matrix(nodes, 2);
    CHECK(d2.x.cols() == 11);
    REQUIRE(d2.x.rows() == 29);
    for (Eigen::Index r = 0; r < d2.x.rows(); ++r) {
      const auto j = d2.row_bit_index[r] - 100;
      CHECK(d2.x.row(r).segment(5, 5) == nodes.values.row(j));
      CHECK(d2.x.row(r).segment(0, 5) == nodes.values.row(j - 1));
      CHECK(d2.x(r, 10) == 1.0);
    }
    CHECK(d2.row_bit_index.front() == 101);
    CHECK_THROWS_AS(assemble_design_matrix(nodes, 31), ConfigError);
  }

  TEST_CASE("constant trace gives identical rows") {
    const auto w = OpticalWaveform::from_power(std::vector<double>(2000, 0.7), 20e9);
    const auto d = assemble_design_matrix(rebin_to_nodes(w, 500e6, 4, 0), 3);
    for (Eigen::Index r = 1; r < d.x.rows(); ++r) CHECK(d.x.row(r) == d.x.row(0));
  }
}
