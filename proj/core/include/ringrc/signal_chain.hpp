#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ringrc/filters.hpp"
#include "ringrc/waveform.hpp"

namespace ringrc {

using Bits = std::vector<std::uint8_t>;

/// One period of a maximal-length sequence.
struct BitSequence {
  Bits bits;
  int order = 8;
  std::size_t period = 255;

  /// `repeats` back-to-back copies of the period.
  Bits repeated(std::size_t repeats) const;
};

/// PRBS-8 from a Fibonacci LFSR with taps x^8 + x^6 + x^5 + x^4 + 1.
/// Throws ConfigError for seed 0.
BitSequence prbs8_generate(std::uint8_t seed);

enum class TransferShape { linear, sinusoidal };

struct ModulatorModel {
  static constexpr double infinite = std::numeric_limits<double>::infinity();

  double bandwidth_3db_hz = 10e9;  // infinite disables the drive filter
  int filter_order = 4;
  double extinction_ratio_db = 20.0;  // infinite gives a true zero level
  TransferShape transfer_shape = TransferShape::sinusoidal;
  double awg_sample_rate = 65e9;  // 0 models ideal bit edges

  static ModulatorModel ideal();
  void validate() const;
};

/// On-off keyed optical field. The NRZ drive is held on the AWG grid,
/// low-pass filtered, and mapped through the optical transfer; the
/// result is scaled so the mean power is exactly avg_power_w.
OpticalWaveform encode_ook(std::span<const std::uint8_t> bits, double bitrate, double avg_power_w,
                           const ModulatorModel& mod, double sample_rate);
OpticalWaveform encode_ook(const BitSequence& seq, std::size_t repeats, double bitrate,
                           double avg_power_w, const ModulatorModel& mod, double sample_rate);

/// Chunked generator behind encode_ook for traces too long to hold at the
/// simulation rate. The constructor makes one pass to fix the power scale;
/// `next` then yields consecutive samples.
class OokSource {
 public:
  OokSource(std::span<const std::uint8_t> bits, double bitrate, double avg_power_w, const ModulatorModel& mod,
            double sample_rate);

  std::size_t size() const { return n_; }
  std::size_t remaining() const { return n_ - pos_; }
  double sample_rate() const { return sample_rate_; }
  /// Fills `out` (at most remaining() samples); returns the count written.
  std::size_t next(std::span<Complex> out);

 private:
  void drive_chunk(std::size_t begin, std::span<double> out) const;
  void shape_chunk(std::span<double> drive_to_power) const;

  Bits bits_;
  double bitrate_, sample_rate_;
  ModulatorModel mod_;
  std::size_t n_ = 0, pos_ = 0;
  double inv_er_ = 0.0, v0_ = 0.0, gain_ = 0.0;
  std::optional<BesselLowPass> filter_;
  BesselLowPass::State filter_state_;
  std::vector<double> scratch_;
};

struct DetectorModel {
  double bandwidth_3db_hz = 16e9;  // infinite disables the filter
  int filter_order = 4;
  double adc_sample_rate = 20e9;
  double noise_rms_rel = 0.02;
  double target_mean = 1.0;

  void validate() const;
};

/// |field|^2 -> low-pass -> ADC resampling -> gain to target_mean -> AWGN.
OpticalWaveform photodetect(const OpticalWaveform& optical, const DetectorModel& det,
                            std::uint64_t rng_seed);

/// Chunked photodetection: keeps only the ADC-rate samples, applies the
/// mean normalization and noise when finished.
class DetectorStream {
 public:
  DetectorStream(const DetectorModel& det, double sample_rate);
  void feed(std::span<const Complex> field);
  OpticalWaveform finish(std::uint64_t rng_seed, double t0 = 0.0);

 private:
  DetectorModel det_;
  double rate_, ratio_;
  bool integer_ratio_;
  std::size_t step_ = 1;
  std::size_t consumed_ = 0;
  double prev_ = 0.0;  // last filtered sample, for fractional resampling
  std::optional<BesselLowPass> filter_;
  BesselLowPass::State filter_state_;
  std::vector<double> scratch_;
  std::vector<double> adc_;
};

/// DC group delay of the modulator drive filter (0 when unfiltered).
double modulator_delay(const ModulatorModel& mod, double sample_rate);
/// DC group delay of the detector filter (0 when unfiltered).
double detector_delay(const DetectorModel& det, double sample_rate);

}  // namespace ringrc
