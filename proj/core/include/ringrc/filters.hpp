#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace ringrc {

/// Analog Bessel low-pass prototype scaled to a -3 dB bandwidth, discretized
/// with an exact zero-order-hold state-space transform at a fixed rate.
class BesselLowPass {
 public:
  BesselLowPass(int order, double bandwidth_3db_hz, double sample_rate);

  int order() const { return order_; }
  /// Poles in rad/s.
  const std::vector<std::complex<double>>& poles() const { return poles_; }
  /// Group delay at DC in seconds.
  double dc_group_delay() const;
  /// Filter state carried across calls to `run`.
  struct State {
    Eigen::VectorXd x;
    Eigen::VectorXd scratch;
    bool primed = false;
  };

  /// Filters one chunk; out.size() must equal in.size(). An unprimed state
  /// starts at the steady state of in[0].
  void run(State& s, std::span<const double> in, std::span<double> out) const;
  /// Whole-signal convenience wrapper around `run`.
  std::vector<double> apply(std::span<const double> x) const;

 private:
  int order_;
  double omega_c_;
  double dt_norm_;
  std::vector<std::complex<double>> poles_;
  Eigen::MatrixXd ad_;
  Eigen::VectorXd bd_;
  Eigen::RowVectorXd c_;
  Eigen::VectorXd x_unit_;  // steady state for unit input
};

/// Coefficients of the reverse Bessel polynomial of `order`, lowest power first.
std::vector<double> reverse_bessel_coefficients(int order);

}  // namespace ringrc
