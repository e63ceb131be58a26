#include "ringrc/filters.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

std::vector<double> reverse_bessel_coefficients(int order) {
  // a_k = (2n - k)! / (2^(n-k) k! (n-k)!)
  std::vector<double> a(static_cast<std::size_t>(order) + 1);
  for (int k = 0; k <= order; ++k) {
    const double log_a = std::lgamma(2.0 * order - k + 1) - (order - k) * std::log(2.0) - std::lgamma(k + 1.0) -
                         std::lgamma(order - k + 1.0);
    a[static_cast<std::size_t>(k)] = std::round(std::exp(log_a));
  }
  return a;
}

namespace {

// Poles of theta_n(s) scaled so |H(j)| = 1/sqrt(2).
std::vector<std::complex<double>> unit_bandwidth_poles(int order) {
  const auto a = reverse_bessel_coefficients(order);
  std::vector<std::complex<double>> roots;
  if (order == 1) {
    roots.emplace_back(-a[0] / a[1], 0.0);
  } else {
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(order, order);
    for (int i = 1; i < order; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < order; ++i) companion(i, order - 1) = -a[static_cast<std::size_t>(i)] / a.back();
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion);
    for (int i = 0; i < order; ++i) roots.push_back(es.eigenvalues()(i));
  }
  auto magnitude = [&](double w) {
    std::complex<double> h = 1.0;
    for (const auto& p : roots) h *= -p / (std::complex<double>(0.0, w) - p);
    return std::abs(h);
  };
  double lo = 1e-3, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (magnitude(mid) > std::sqrt(0.5) ? lo : hi) = mid;
  }
  const double w3 = std::sqrt(lo * hi);
  for (auto& p : roots) p /= w3;
  return roots;
}

}  // namespace

BesselLowPass::BesselLowPass(int order, double bandwidth_3db_hz, double sample_rate)
    : order_(order), omega_c_(2.0 * std::numbers::pi * bandwidth_3db_hz) {
  if (order < 1 || order > 10) throw ConfigError(fmt::format("filter order {} outside 1..10", order));
  if (!(bandwidth_3db_hz > 0.0) || !std::isfinite(bandwidth_3db_hz))
    throw ConfigError("filter bandwidth must be positive and finite");
  if (!(sample_rate > 0.0)) throw ConfigError("filter sample rate must be positive");
  dt_norm_ = omega_c_ / sample_rate;

  const auto unit = unit_bandwidth_poles(order);
  for (const auto& p : unit) poles_.push_back(p * omega_c_);

  // Monic denominator prod(s - p) in normalized time, controllable canonical form.
  std::vector<std::complex<double>> poly{1.0};
  for (const auto& p : unit) {
    std::vector<std::complex<double>> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] -= p * poly[i];
    }
    poly = std::move(next);
  }
  const int n = order;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
  for (int i = 0; i < n; ++i) a(n - 1, i) = -poly[static_cast<std::size_t>(i)].real();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b(n - 1) = 1.0;
  c_ = Eigen::RowVectorXd::Zero(n);
  c_(0) = poly[0].real();  // unit DC gain

  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = a * dt_norm_;
  aug.topRightCorner(n, 1) = b * dt_norm_;
  const Eigen::MatrixXd e = aug.exp();
  ad_ = e.topLeftCorner(n, n);
  bd_ = e.topRightCorner(n, 1);
  x_unit_ = -a.partialPivLu().solve(b);
}

double BesselLowPass::dc_group_delay() const {
  double tau = 0.0;
  for (const auto& p : poles_) tau += -p.real() / std::norm(p);
  return tau;
}

void BesselLowPass::run(State& s, std::span<const double> in, std::span<double> out) const {
  if (in.empty()) return;
  if (!s.primed) {
    s.x = x_unit_ * in[0];
    s.scratch.resize(order_);
    s.primed = true;
  }
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = c_.dot(s.x);
    s.scratch.noalias() = ad_ * s.x;
    s.scratch += bd_ * in[i];
    s.x.swap(s.scratch);
  }
}

std::vector<double> BesselLowPass::apply(std::span<const double> x) const {
  std::vector<double> y(x.size());
  State s;
  run(s, x, y);
  return y;
}

}  // namespace ringrc
