#include "ringrc/signal_chain.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

Bits BitSequence::repeated(std::size_t repeats) const {
  Bits out;
  out.reserve(bits.size() * repeats);
  for (std::size_t r = 0; r < repeats; ++r) out.insert(out.end(), bits.begin(), bits.end());
  return out;
}

BitSequence prbs8_generate(std::uint8_t seed) {
  if (seed == 0) throw ConfigError("PRBS seed must be nonzero");
  BitSequence seq;
  seq.bits.reserve(255);
  unsigned state = seed;
  for (int i = 0; i < 255; ++i) {
    // Fibonacci form of x^8 + x^6 + x^5 + x^4 + 1: feedback from stages 8, 6, 5, 4.
    const unsigned out = (state >> 7) & 1u;
    const unsigned fb = ((state >> 7) ^ (state >> 5) ^ (state >> 4) ^ (state >> 3)) & 1u;
    seq.bits.push_back(static_cast<std::uint8_t>(out));
    state = ((state << 1) | fb) & 0xffu;
  }
  return seq;
}

ModulatorModel ModulatorModel::ideal() {
  ModulatorModel m;
  m.bandwidth_3db_hz = infinite;
  m.extinction_ratio_db = infinite;
  m.transfer_shape = TransferShape::linear;
  m.awg_sample_rate = 0.0;
  return m;
}

void ModulatorModel::validate() const {
  if (!(bandwidth_3db_hz > 0.0)) throw ConfigError("modulator bandwidth_3db must be > 0");
  if (!(extinction_ratio_db > 0.0)) throw ConfigError("modulator extinction_ratio_db must be > 0");
  if (filter_order < 1 || filter_order > 10) throw ConfigError("modulator filter_order must lie in 1..10");
  if (!(awg_sample_rate >= 0.0)) throw ConfigError("modulator awg_sample_rate must be >= 0");
}

void DetectorModel::validate() const {
  if (!(bandwidth_3db_hz > 0.0)) throw ConfigError("detector bandwidth_3db must be > 0");
  if (filter_order < 1 || filter_order > 10) throw ConfigError("detector filter_order must lie in 1..10");
  if (!(adc_sample_rate > 0.0) || !std::isfinite(adc_sample_rate))
    throw ConfigError("detector adc_sample_rate must be > 0");
  if (!(noise_rms_rel >= 0.0)) throw ConfigError("detector noise_rms_rel must be >= 0");
  if (!(target_mean > 0.0)) throw ConfigError("detector target_mean must be > 0");
}

namespace {

// Index of the interval of length 1/rate containing t, robust to rounding
// at exact boundaries.
std::size_t slot(double t, double rate) {
  const double x = t * rate;
  const double r = std::round(x);
  const double v = std::abs(x - r) < 1e-9 * std::max(1.0, std::abs(x)) ? r : std::floor(x);
  return v < 0.0 ? 0 : static_cast<std::size_t>(v);
}

}  // namespace

OokSource::OokSource(std::span<const std::uint8_t> bits, double bitrate, double avg_power_w,
                     const ModulatorModel& mod, double sample_rate)
    : bits_(bits.begin(), bits.end()), bitrate_(bitrate), sample_rate_(sample_rate), mod_(mod) {
  mod.validate();
  if (bits.empty()) throw ConfigError("encode_ook needs at least one bit");
  if (!(bitrate > 0.0) || !(sample_rate > 0.0) || sample_rate < bitrate)
    throw ConfigError(fmt::format("invalid rate: bitrate {:.6g} b/s with sample rate {:.6g} Sa/s", bitrate, sample_rate));
  if (!(avg_power_w >= 0.0)) throw ConfigError("average power must be >= 0");

  n_ = static_cast<std::size_t>(std::llround(static_cast<double>(bits.size()) / bitrate * sample_rate));
  inv_er_ = std::isfinite(mod.extinction_ratio_db) ? std::pow(10.0, -mod.extinction_ratio_db / 10.0) : 0.0;
  v0_ = 2.0 / std::numbers::pi * std::asin(std::sqrt(inv_er_));
  if (std::isfinite(mod.bandwidth_3db_hz)) filter_.emplace(mod.filter_order, mod.bandwidth_3db_hz, sample_rate);

  // First pass: mean of the unscaled optical power.
  constexpr std::size_t chunk = 1 << 15;
  std::vector<double> drive(chunk), filtered(chunk);
  BesselLowPass::State st;
  double sum = 0.0;
  for (std::size_t b = 0; b < n_; b += chunk) {
    const std::size_t len = std::min(chunk, n_ - b);
    std::span<double> d(drive.data(), len);
    drive_chunk(b, d);
    if (filter_) {
      std::span<double> f(filtered.data(), len);
      filter_->run(st, d, f);
      std::copy(f.begin(), f.end(), d.begin());
    }
    shape_chunk(d);
    for (double p : d) sum += p;
  }
  const double mean = sum / static_cast<double>(n_);
  gain_ = mean > 0.0 ? avg_power_w / mean : 0.0;
}

void OokSource::drive_chunk(std::size_t begin, std::span<double> out) const {
  for (std::size_t i = 0; i < out.size(); ++i) {
    double t = static_cast<double>(begin + i) / sample_rate_;
    if (mod_.awg_sample_rate > 0.0) t = static_cast<double>(slot(t, mod_.awg_sample_rate)) / mod_.awg_sample_rate;
    const std::size_t b = std::min(slot(t, bitrate_), bits_.size() - 1);
    out[i] = bits_[b] ? 1.0 : 0.0;
  }
}

void OokSource::shape_chunk(std::span<double> x) const {
  if (mod_.transfer_shape == TransferShape::linear) {
    for (double& v : x) v = inv_er_ + (1.0 - inv_er_) * v;
  } else {
    // Mach-Zehnder intensity transfer sin^2, biased so the 0 level sits at 1/ER.
    for (double& v : x) {
      const double s = std::sin(0.5 * std::numbers::pi * (v0_ + (1.0 - v0_) * v));
      v = s * s;
    }
  }
}

std::size_t OokSource::next(std::span<Complex> out) {
  const std::size_t len = std::min(out.size(), remaining());
  scratch_.resize(2 * len);
  std::span<double> d(scratch_.data(), len);
  drive_chunk(pos_, d);
  if (filter_) {
    std::span<double> f(scratch_.data() + len, len);
    filter_->run(filter_state_, d, f);
    std::copy(f.begin(), f.end(), d.begin());
  }
  shape_chunk(d);
  for (std::size_t i = 0; i < len; ++i) out[i] = Complex(std::sqrt(std::max(0.0, d[i] * gain_)), 0.0);
  pos_ += len;
  return len;
}

OpticalWaveform encode_ook(std::span<const std::uint8_t> bits, double bitrate, double avg_power_w,
                           const ModulatorModel& mod, double sample_rate) {
  OokSource src(bits, bitrate, avg_power_w, mod, sample_rate);
  std::vector<Complex> field(src.size());
  src.next(field);
  return OpticalWaveform::from_field(std::move(field), sample_rate);
}

OpticalWaveform encode_ook(const BitSequence& seq, std::size_t repeats, double bitrate, double avg_power_w,
                           const ModulatorModel& mod, double sample_rate) {
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  const auto bits = seq.repeated(repeats);
  return encode_ook(bits, bitrate, avg_power_w, mod, sample_rate);
}

DetectorStream::DetectorStream(const DetectorModel& det, double sample_rate)
    : det_(det), rate_(sample_rate), ratio_(sample_rate / det.adc_sample_rate) {
  det.validate();
  if (!(sample_rate > 0.0)) throw ConfigError("detector input sample rate must be positive");
  const double nearest = std::round(ratio_);
  integer_ratio_ = std::abs(ratio_ - nearest) < 1e-9 && nearest >= 1.0;
  if (integer_ratio_) step_ = static_cast<std::size_t>(nearest);
  if (std::isfinite(det.bandwidth_3db_hz)) filter_.emplace(det.filter_order, det.bandwidth_3db_hz, sample_rate);
}

void DetectorStream::feed(std::span<const Complex> field) {
  if (field.empty()) return;
  const std::size_t len = field.size();
  scratch_.resize(2 * len);
  std::span<double> p(scratch_.data(), len);
  for (std::size_t i = 0; i < len; ++i) p[i] = std::norm(field[i]);
  if (filter_) {
    std::span<double> f(scratch_.data() + len, len);
    filter_->run(filter_state_, p, f);
    p = f;
  }
  const std::size_t begin = consumed_, end = consumed_ + len;
  if (integer_ratio_) {
    std::size_t next = (begin + step_ - 1) / step_ * step_;
    for (; next < end; next += step_) adc_.push_back(p[next - begin]);
  } else {
    // Sample i sits at input position i * ratio; interpolate linearly.
    for (;;) {
      const double x = static_cast<double>(adc_.size()) * ratio_;
      const auto j = static_cast<std::size_t>(x);
      if (j + 1 >= end) break;
      const double f = x - static_cast<double>(j);
      const double pj = j >= begin ? p[j - begin] : prev_;
      adc_.push_back((1.0 - f) * pj + f * p[j + 1 - begin]);
    }
  }
  prev_ = p[len - 1];
  consumed_ = end;
}

OpticalWaveform DetectorStream::finish(std::uint64_t rng_seed, double t0) {
  const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(consumed_) / ratio_ + 1e-9));
  if (m == 0) throw ConfigError("trace shorter than one ADC sample");
  while (adc_.size() < m) adc_.push_back(prev_);
  adc_.resize(m);
  double mean = 0.0;
  for (double v : adc_) mean += v;
  mean /= static_cast<double>(m);
  const double gain = mean > 0.0 ? det_.target_mean / mean : 0.0;
  for (double& v : adc_) v *= gain;
  if (det_.noise_rms_rel > 0.0) {
    std::mt19937_64 rng(rng_seed);
    std::normal_distribution<double> noise(0.0, det_.noise_rms_rel * det_.target_mean);
    for (double& v : adc_) v += noise(rng);
  }
  return OpticalWaveform::from_power(std::move(adc_), det_.adc_sample_rate, t0);
}

OpticalWaveform photodetect(const OpticalWaveform& optical, const DetectorModel& det, std::uint64_t rng_seed) {
  if (!optical.is_field()) throw ConfigError("photodetect expects a field-valued waveform");
  DetectorStream stream(det, optical.sample_rate());
  stream.feed(optical.field());
  return stream.finish(rng_seed, optical.t0());
}

double modulator_delay(const ModulatorModel& mod, double sample_rate) {
  if (!std::isfinite(mod.bandwidth_3db_hz)) return 0.0;
  return BesselLowPass(mod.filter_order, mod.bandwidth_3db_hz, sample_rate).dc_group_delay();
}

double detector_delay(const DetectorModel& det, double sample_rate) {
  if (!std::isfinite(det.bandwidth_3db_hz)) return 0.0;
  return BesselLowPass(det.filter_order, det.bandwidth_3db_hz, sample_rate).dc_group_delay();
}

}  // namespace ringrc
