#include "ringrc/readout.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

namespace {

Eigen::VectorXd solve_regularized(Eigen::MatrixXd gram, const Eigen::VectorXd& rhs, double lambda, int bias_col) {
  const Eigen::Index n = gram.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    if (i != bias_col) gram(i, i) += lambda;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw SingularSystem("ridge normal equations could not be factored");
  const auto d = ldlt.vectorD();
  const double dmax = d.cwiseAbs().maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmax > 0.0) || dmin <= 1e-13 * dmax * static_cast<double>(n))
    throw SingularSystem(fmt::format("ridge normal equations are singular (lambda = {:.3g})", lambda));
  Eigen::VectorXd w = ldlt.solve(rhs);
  if (!w.allFinite()) throw SingularSystem("ridge solution is not finite");
  return w;
}

int resolve_bias(int bias_col, Eigen::Index cols) {
  if (bias_col == -2) return static_cast<int>(cols) - 1;
  return bias_col;
}

}  // namespace

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda, int bias_col) {
  if (x.rows() != y.size()) throw ConfigError(fmt::format("ridge: {} rows vs {} targets", x.rows(), y.size()));
  if (!(lambda >= 0.0)) throw ConfigError("ridge: lambda must be >= 0");
  if (x.cols() == 0 || x.rows() == 0) throw ConfigError("ridge: empty design matrix");
  const Eigen::MatrixXd gram = x.transpose() * x;
  const Eigen::VectorXd rhs = x.transpose() * y;
  return solve_regularized(gram, rhs, lambda, resolve_bias(bias_col, x.cols()));
}

std::vector<double> default_lambda_grid(const Eigen::MatrixXd& x, int points, double lo, double hi) {
  if (points < 1) return {};
  const double scale = x.cols() > 0 ? x.colwise().squaredNorm().sum() / static_cast<double>(x.cols()) : 1.0;
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double f = points == 1 ? 0.0 : static_cast<double>(i) / (points - 1);
    grid[static_cast<std::size_t>(i)] = scale * lo * std::pow(hi / lo, f);
  }
  return grid;
}

double kfold_lambda_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int folds,
                           std::span<const double> grid) {
  if (grid.empty()) throw ConfigError("empty lambda grid");
  if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
  const Eigen::Index n = x.rows();
  if (n < folds) throw ConfigError(fmt::format("cross-validation: {} rows for {} folds", n, folds));
  if (y.size() != n) throw ConfigError("cross-validation: X and y disagree in length");
  if (grid.size() == 1) return grid.front();

  const int bias = static_cast<int>(x.cols()) - 1;
  const Eigen::MatrixXd gram_all = x.transpose() * x;
  const Eigen::VectorXd rhs_all = x.transpose() * y;
  std::vector<double> mean_err(grid.size(), 0.0);
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index begin = n * f / folds, end = n * (f + 1) / folds;
    const auto xv = x.middleRows(begin, end - begin);
    const auto yv = y.segment(begin, end - begin);
    const Eigen::MatrixXd gram = gram_all - xv.transpose() * xv;
    const Eigen::VectorXd rhs = rhs_all - xv.transpose() * yv;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double rate = 1.0;
      try {
        const Eigen::VectorXd w = solve_regularized(gram, rhs, grid[g], bias);
        const Eigen::VectorXd score = xv * w;
        Eigen::Index wrong = 0;
        for (Eigen::Index i = 0; i < score.size(); ++i) wrong += (score(i) >= 0.5 ? 1.0 : 0.0) != yv(i);
        rate = static_cast<double>(wrong) / static_cast<double>(score.size());
      } catch (const SingularSystem&) {
      }
      mean_err[g] += rate / folds;
    }
  }
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const bool better = mean_err[g] < mean_err[best] - 1e-12;
    const bool tie_larger = std::abs(mean_err[g] - mean_err[best]) <= 1e-12 && grid[g] > grid[best];
    if (better || tie_larger) best = g;
  }
  return grid[best];
}

std::vector<std::uint8_t> threshold_predict(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, double threshold) {
  if (x.cols() != w.size()) throw ConfigError("threshold_predict: shape mismatch");
  const Eigen::VectorXd score = x * w;
  std::vector<std::uint8_t> out(static_cast<std::size_t>(score.size()));
  for (Eigen::Index i = 0; i < score.size(); ++i) out[static_cast<std::size_t>(i)] = score(i) >= threshold ? 1 : 0;
  return out;
}

double statistical_floor(std::size_t n_test) {
  if (n_test == 0) throw ConfigError("statistical floor needs n_test > 0");
  return 1.0 / static_cast<double>(n_test);
}

Evaluation bit_error_rate(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> y) {
  if (pred.size() != y.size())
    throw ConfigError(fmt::format("length mismatch: {} predictions vs {} targets", pred.size(), y.size()));
  if (pred.empty()) throw ConfigError("bit_error_rate needs at least one bit");
  Evaluation e;
  e.n_test = pred.size();
  for (std::size_t i = 0; i < pred.size(); ++i) e.errors += (pred[i] != 0) != (y[i] != 0);
  e.at_floor = e.errors == 0;
  e.ber = e.at_floor ? statistical_floor(e.n_test) : static_cast<double>(e.errors) / static_cast<double>(e.n_test);
  return e;
}

SplitPlan plan_split(std::size_t rows, std::size_t test_bits, std::size_t guard) {
  if (test_bits == 0) throw ConfigError("test block must hold at least one bit");
  if (rows < test_bits + guard + 2)
    throw ConfigError(fmt::format("too few rows ({}) for {} test bits plus a {}-bit guard", rows, test_bits, guard));
  SplitPlan s;
  s.test_end = rows;
  s.test_begin = rows - test_bits;
  s.train_begin = 0;
  s.train_end = s.test_begin - guard;
  return s;
}

ReadoutResult train_and_test(const Eigen::MatrixXd& x, std::span<const std::uint8_t> y, const SplitPlan& split,
                             const ReadoutSettings& settings) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ConfigError("train_and_test: X and y disagree in length");
  const auto train_rows = static_cast<Eigen::Index>(split.train_end - split.train_begin);
  const auto test_rows = static_cast<Eigen::Index>(split.test_end - split.test_begin);
  const Eigen::MatrixXd xt = x.middleRows(static_cast<Eigen::Index>(split.train_begin), train_rows);
  Eigen::VectorXd yt(train_rows);
  for (Eigen::Index i = 0; i < train_rows; ++i) yt(i) = y[split.train_begin + static_cast<std::size_t>(i)];

  const auto grid = default_lambda_grid(xt, settings.lambda_points, settings.lambda_lo, settings.lambda_hi);
  ReadoutResult r;
  r.weights.lambda = kfold_lambda_select(xt, yt, settings.folds, grid);
  r.weights.threshold = settings.threshold;
  r.weights.w = ridge_solve(xt, yt, r.weights.lambda);

  const Eigen::MatrixXd xs = x.middleRows(static_cast<Eigen::Index>(split.test_begin), test_rows);
  const auto pred = threshold_predict(xs, r.weights.w, settings.threshold);
  r.evaluation = bit_error_rate(pred, y.subspan(split.test_begin, split.test_end - split.test_begin));
  return r;
}

}  // namespace ringrc
