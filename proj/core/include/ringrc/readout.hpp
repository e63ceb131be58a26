#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ringrc {

struct ReadoutWeights {
  Eigen::VectorXd w;
  double lambda = 0.0;
  double threshold = 0.5;
};

struct Evaluation {
  std::size_t errors = 0;
  std::size_t n_test = 0;
  double ber = 1.0;
  bool at_floor = false;
};

/// Minimizes |Xw - y|^2 + lambda |w without bias|^2 through the normal
/// equations, factored with LDL^T. `bias_col` (default: last column) is not
/// penalized; pass -1 to penalize every column. Throws SingularSystem when
/// the regularized Gram matrix is rank deficient.
Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double lambda,
                            int bias_col = -2);

/// `points` values geometric from lo to hi, multiplied by trace(X^T X)/cols.
std::vector<double> default_lambda_grid(const Eigen::MatrixXd& x, int points = 25, double lo = 1e-8,
                                        double hi = 1e2);

/// Contiguous k-fold cross-validation of the 0.5-threshold misclassification
/// rate. Ties resolve to the larger lambda. Throws ConfigError for an empty
/// grid or fewer rows than folds.
double kfold_lambda_select(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int folds,
                           std::span<const double> grid);

std::vector<std::uint8_t> threshold_predict(const Eigen::MatrixXd& x, const Eigen::VectorXd& w,
                                            double threshold = 0.5);

/// Zero errors report 1/n_test with at_floor set. Throws ConfigError on
/// length mismatch or empty input.
Evaluation bit_error_rate(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> y);

double statistical_floor(std::size_t n_test);

struct ReadoutSettings {
  int folds = 5;
  int lambda_points = 25;
  double lambda_lo = 1e-8;
  double lambda_hi = 1e2;
  double threshold = 0.5;
  std::size_t test_bits = 2550;
};

struct SplitPlan {
  std::size_t train_begin = 0;
  std::size_t train_end = 0;  // exclusive
  std::size_t test_begin = 0;
  std::size_t test_end = 0;   // exclusive
};

/// Last `test_bits` rows are the test block; `guard` rows before it are
/// dropped; everything earlier trains. Throws ConfigError when too short.
SplitPlan plan_split(std::size_t rows, std::size_t test_bits, std::size_t guard);

struct ReadoutResult {
  ReadoutWeights weights;
  Evaluation evaluation;
};

/// Cross-validates lambda on the training block, refits on it, and scores
/// the test block only.
ReadoutResult train_and_test(const Eigen::MatrixXd& x, std::span<const std::uint8_t> y,
                             const SplitPlan& split, const ReadoutSettings& settings);

}  // namespace ringrc
