#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace ringrc {

using Complex = std::complex<double>;

/// Uniformly sampled optical trace. Holds either the complex field
/// amplitude (|E|^2 in W) or a detected, real power-like signal.
class OpticalWaveform {
 public:
  enum class Kind { field, power };

  OpticalWaveform() = default;
  static OpticalWaveform from_field(std::vector<Complex> samples, double sample_rate, double t0 = 0.0);
  static OpticalWaveform from_power(std::vector<double> samples, double sample_rate, double t0 = 0.0);

  Kind kind() const { return kind_; }
  bool is_field() const { return kind_ == Kind::field; }
  bool is_power() const { return kind_ == Kind::power; }
  double sample_rate() const { return sample_rate_; }
  double dt() const { return 1.0 / sample_rate_; }
  double t0() const { return t0_; }
  std::size_t size() const;
  double duration() const { return static_cast<double>(size()) / sample_rate_; }

  /// Throws ConfigError when the waveform is not of the requested kind.
  std::span<const Complex> field() const;
  std::span<const double> power() const;
  std::vector<Complex>& mutable_field();
  std::vector<double>& mutable_power();

  /// |field|^2 for field waveforms, the samples themselves otherwise.
  std::vector<double> intensity() const;
  double mean_intensity() const;

 private:
  Kind kind_ = Kind::power;
  double sample_rate_ = 1.0;
  double t0_ = 0.0;
  std::vector<Complex> field_;
  std::vector<double> power_;
};

/// Text dump: header lines `sample_rate_hz=..`, `kind=field|power`,
/// `t0_s=..`, then one `re,im` or `p` per line.
void write_waveform_csv(const OpticalWaveform& w, const std::string& path);
OpticalWaveform read_waveform_csv(const std::string& path);

double dbm_to_watt(double dbm);
double watt_to_dbm(double watt);

}  // namespace ringrc
