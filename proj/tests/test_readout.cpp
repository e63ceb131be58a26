#include <doctest.h>

#include <random>

#include "ringrc/errors.hpp"
#include "ringrc/readout.hpp"

using namespace ringrc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Ridge through an augmented least-squares problem [X; sqrt(lambda) P] w = [y; 0],
// solved by column-pivoted QR, with P the identity minus the bias entry.
VectorXd ridge_oracle(const MatrixXd& x, const VectorXd& y, double lambda) {
  const auto n = x.rows(), p = x.cols();
  MatrixXd a = MatrixXd::Zero(n + p, p);
  a.topRows(n) = x;
  for (Eigen::Index j = 0; j + 1 < p; ++j) a(n + j, j) = std::sqrt(lambda);
  VectorXd b = VectorXd::Zero(n + p);
  b.head(n) = y;
  return a.colPivHouseholderQr().solve(b);
}

MatrixXd with_bias(MatrixXd x) {
  x.conservativeResize(Eigen::NoChange, x.cols() + 1);
  x.col(x.cols() - 1).setOnes();
  return x;
}

}  // namespace

TEST_SUITE("readout") {
  TEST_CASE("interpolation with lambda = 0") {
    std::mt19937 rng(1);
    std::normal_distribution<double> g;
    const MatrixXd x = with_bias(MatrixXd::NullaryExpr(6, 5, [&] { return g(rng); }));
    const VectorXd y = VectorXd::NullaryExpr(6, [&] { return g(rng) > 0 ? 1.0 : 0.0; });
    const auto w = ridge_solve(x, y, 0.0);
    CHECK((x * w - y).norm() <= 1e-8 * y.norm());
  }

  TEST_CASE("heavy shrinkage leaves the mean in the bias") {
    std::mt19937 rng(2);
    std::normal_distribution<double> g;
    const MatrixXd x = with_bias(MatrixXd::NullaryExpr(200, 4, [&] { return g(rng); }));
    const VectorXd y = VectorXd::NullaryExpr(200, [&] { return g(rng) > 0.3 ? 1.0 : 0.0; });
    const auto w = ridge_solve(x, y, 1e9);
    CHECK(w.head(4).norm() < 1e-6);
    CHECK(w(4) == doctest::Approx(y.mean()).epsilon(1e-6));
  }

  TEST_CASE("matches an independent least-squares oracle") {
    std::mt19937 rng(3);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> lam(-4, 2);
    for (int k = 0; k < 100; ++k) {
      const MatrixXd x = with_bias(MatrixXd::NullaryExpr(50, 5, [&] { return g(rng); }));
      const VectorXd y = VectorXd::NullaryExpr(50, [&] { return g(rng) > 0 ? 1.0 : 0.0; });
      const double l = k == 0 ? 0.1 : std::pow(10.0, lam(rng));
      const auto w = ridge_solve(x, y, l);
      const auto ref = ridge_oracle(x, y, l);
      CHECK((w - ref).norm() / ref.norm() < 1e-8);
    }
  }

  TEST_CASE("row permutation does not change the solution") {
    std::mt19937 rng(4);
    std::normal_distribution<double> g;
    const MatrixXd x = with_bias(MatrixXd::NullaryExpr(80, 6, [&] { return g(rng); }));
    const VectorXd y = VectorXd::NullaryExpr(80, [&] { return g(rng) > 0 ? 1.0 : 0.0; });
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(80);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 80, rng);
    const auto a = ridge_solve(x, y, 0.3);
    const auto b = ridge_solve(perm * x, perm * y, 0.3);
    CHECK((a - b).norm() <= 1e-10 * a.norm());
  }

  TEST_CASE("shrinkage is monotone in lambda") {
    std::mt19937 rng(5);
    std::normal_distribution<double> g;
    const MatrixXd x = with_bias(MatrixXd::NullaryExpr(100, 8, [&] { return g(rng); }));
    const VectorXd y = VectorXd::NullaryExpr(100, [&] { return g(rng) > 0 ? 1.0 : 0.0; });
    double prev = 1e300;
    for (double l = 1e-6; l < 1e6; l *= 10) {
      const double n = ridge_solve(x, y, l).head(8).norm();
      CHECK(n <= prev * (1 + 1e-12));
      prev = n;
    }
  }

  TEST_CASE("rank-deficient system without regularization") {
    MatrixXd x(4, 3);
    x << 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8, 1;
    const VectorXd y = VectorXd::Ones(4);
    CHECK_THROWS_AS(ridge_solve(x, y, 0.0), SingularSystem);
    CHECK_NOTHROW(ridge_solve(x, y, 1e-3));
  }

  TEST_CASE("lambda grid scales with the data") {
    const MatrixXd x = MatrixXd::Constant(10, 2, 2.0);
    const auto grid = default_lambda_grid(x, 25, 1e-8, 1e2);
    REQUIRE(grid.size() == 25);
    const double scale = (x.transpose() * x).trace() / 2;
    CHECK(grid.front() == doctest::Approx(1e-8 * scale));
    CHECK(grid.back() == doctest::Approx(1e2 * scale));
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] / grid[i - 1] == doctest::Approx(grid[1] / grid[0]));
  }

  TEST_CASE("cross-validation picks the largest of tied lambdas") {
    // Separable data: one informative feature, clean labels.
    MatrixXd x(100, 2);
    VectorXd y(100);
    for (int i = 0; i < 100; ++i) {
      const int b = (i * 7) % 3 == 0;
      x(i, 0) = b ? 1.0 : 0.0;
      x(i, 1) = 1.0;
      y(i) = b;
    }
    const std::vector<double> single{0.5};
    CHECK(kfold_lambda_select(x, y, 5, single) == 0.5);
    const std::vector<double> grid{1e-6, 1e-3, 1e-1, 1.0, 1e6};
    // 1e6 shrinks the feature to nothing and misclassifies; the others tie at zero.
    CHECK(kfold_lambda_select(x, y, 5, grid) == 1.0);
    CHECK_THROWS_AS(kfold_lambda_select(x, y, 5, std::vector<double>{}), ConfigError);
    CHECK_THROWS_AS(kfold_lambda_select(x.topRows(3), y.head(3), 5, grid), ConfigError);
  }

  TEST_CASE("pure-noise targets still yield a finite lambda") {
    std::mt19937 rng(6);
    std::normal_distribution<double> g;
    const MatrixXd x = with_bias(MatrixXd::NullaryExpr(300, 5, [&] { return g(rng); }));
    const VectorXd y = VectorXd::NullaryExpr(300, [&] { return g(rng) > 0 ? 1.0 : 0.0; });
    std::vector<double> grid;
    for (double l = 1e-6; l <= 1e3 * 1.0001; l *= 10) grid.push_back(l);
    const double l = kfold_lambda_select(x, y, 5, grid);
    CHECK(std::isfinite(l));
  }

  TEST_CASE("threshold prediction") {
    MatrixXd x(4, 2);
    x << 0.1, 1, 0.4, 1, 0.5, 1, 0.9, 1;
    VectorXd w(2);
    w << 0, 1;
    for (auto b : threshold_predict(x, w)) CHECK(b == 1);
    w << 0, 0;
    for (auto b : threshold_predict(x, w)) CHECK(b == 0);
    w << 1, 0;
    const auto p = threshold_predict(x, w);
    for (int i = 0; i < 4; ++i) CHECK(p[i] == (x(i, 0) >= 0.5 ? 1 : 0));
  }

  TEST_CASE("bit error rate and the statistical floor") {
    std::vector<std::uint8_t> y(2550);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = (i * 31 % 7) < 3;
    const auto e = bit_error_rate(y, y);
    CHECK(e.at_floor);
    CHECK(e.errors == 0);
    CHECK(e.ber == doctest::Approx(1.0 / 2550));
    CHECK(std::log10(e.ber) == doctest::Approx(-3.41).epsilon(1e-3));
    auto inv = y;
    for (auto& b : inv) b ^= 1;
    CHECK(bit_error_rate(inv, y).ber == 1.0);
    CHECK_FALSE(bit_error_rate(inv, y).at_floor);
    std::vector<std::uint8_t> a(100, 0), b(100, 0);
    b[3] = 1;
    CHECK(bit_error_rate(a, b).ber == doctest::Approx(0.01));
    CHECK_THROWS_AS(bit_error_rate(a, std::span(b).first(99)), ConfigError);
    CHECK_THROWS_AS(bit_error_rate(std::span(a).first(0), std::span(b).first(0)), ConfigError);
    CHECK(statistical_floor(2550) == doctest::Approx(3.92e-4).epsilon(1e-3));
    CHECK(statistical_floor(255) == doctest::Approx(3.92e-3).epsilon(1e-3));
    CHECK(statistical_floor(1) == 1.0);
  }

  TEST_CASE("split plan keeps a guard before the test block") {
    const auto s = plan_split(5100, 2550, 3);
    CHECK(s.test_end == 5100);
    CHECK(s.test_begin == 2550);
    CHECK(s.train_begin == 0);
    CHECK(s.train_end == 2547);
    CHECK_THROWS_AS(plan_split(100, 95, 10), ConfigError);
  }

  TEST_CASE("test rows never influence the fitted weights") {
    std::mt19937 rng(8);
    std::normal_distribution<double> g;
    MatrixXd x = with_bias(MatrixXd::NullaryExpr(400, 3, [&] { return g(rng); }));
    std::vector<std::uint8_t> y(400);
    for (int i = 0; i < 400; ++i) y[i] = x(i, 0) + 0.3 * g(rng) > 0;
    const auto split = plan_split(400, 150, 2);
    const ReadoutSettings rs;
    const auto a = train_and_test(x, y, split, rs);
    MatrixXd x2 = x;
    auto y2 = y;
    for (std::size_t i = split.train_end; i < 400; ++i) {
      x2.row(i).head(3).setRandom();
      y2[i] ^= 1;
    }
    const auto b = train_and_test(x2, y2, split, rs);
    CHECK(a.weights.w == b.weights.w);
    CHECK(a.weights.lambda == b.weights.lambda);
    CHECK(a.evaluation.n_test == 150);
  }
}
