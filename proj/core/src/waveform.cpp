#include "ringrc/waveform.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

OpticalWaveform OpticalWaveform::from_field(std::vector<Complex> samples, double sample_rate, double t0) {
  if (!(sample_rate > 0.0)) throw ConfigError("waveform sample_rate must be positive");
  if (samples.empty()) throw ConfigError("waveform must not be empty");
  OpticalWaveform w;
  w.kind_ = Kind::field;
  w.sample_rate_ = sample_rate;
  w.t0_ = t0;
  w.field_ = std::move(samples);
  return w;
}

OpticalWaveform OpticalWaveform::from_power(std::vector<double> samples, double sample_rate, double t0) {
  if (!(sample_rate > 0.0)) throw ConfigError("waveform sample_rate must be positive");
  if (samples.empty()) throw ConfigError("waveform must not be empty");
  OpticalWaveform w;
  w.kind_ = Kind::power;
  w.sample_rate_ = sample_rate;
  w.t0_ = t0;
  w.power_ = std::move(samples);
  return w;
}

std::size_t OpticalWaveform::size() const { return is_field() ? field_.size() : power_.size(); }

std::span<const Complex> OpticalWaveform::field() const {
  if (!is_field()) throw ConfigError("expected a field-valued waveform");
  return field_;
}

std::span<const double> OpticalWaveform::power() const {
  if (!is_power()) throw ConfigError("expected a power-valued waveform");
  return power_;
}

std::vector<Complex>& OpticalWaveform::mutable_field() {
  if (!is_field()) throw ConfigError("expected a field-valued waveform");
  return field_;
}

std::vector<double>& OpticalWaveform::mutable_power() {
  if (!is_power()) throw ConfigError("expected a power-valued waveform");
  return power_;
}

std::vector<double> OpticalWaveform::intensity() const {
  if (is_power()) return power_;
  std::vector<double> out(field_.size());
  for (std::size_t i = 0; i < field_.size(); ++i) out[i] = std::norm(field_[i]);
  return out;
}

double OpticalWaveform::mean_intensity() const {
  const auto p = intensity();
  if (p.empty()) return 0.0;
  return std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

void write_waveform_csv(const OpticalWaveform& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path));
  out << fmt::format("sample_rate_hz={:.17g}\n", w.sample_rate());
  out << "kind=" << (w.is_field() ? "field" : "power") << '\n';
  out << fmt::format("t0_s={:.17g}\n", w.t0());
  if (w.is_field()) {
    for (const auto& c : w.field()) out << fmt::format("{:.17g},{:.17g}\n", c.real(), c.imag());
  } else {
    for (double p : w.power()) out << fmt::format("{:.17g}\n", p);
  }
  if (!out) throw IoError(fmt::format("write to '{}' failed", path));
}

namespace {

std::string header_value(std::istream& in, const std::string& key, const std::string& path) {
  std::string line;
  if (!std::getline(in, line) || line.rfind(key + "=", 0) != 0)
    throw ConfigError(fmt::format("'{}': expected header '{}='", path, key));
  return line.substr(key.size() + 1);
}

}  // namespace

OpticalWaveform read_waveform_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path));
  const double rate = std::stod(header_value(in, "sample_rate_hz", path));
  const std::string kind = header_value(in, "kind", path);
  const double t0 = std::stod(header_value(in, "t0_s", path));
  std::string line;
  if (kind == "field") {
    std::vector<Complex> v;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto comma = line.find(',');
      if (comma == std::string::npos) throw ConfigError(fmt::format("'{}': malformed sample '{}'", path, line));
      v.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return OpticalWaveform::from_field(std::move(v), rate, t0);
  }
  if (kind == "power") {
    std::vector<double> v;
    while (std::getline(in, line))
      if (!line.empty()) v.push_back(std::stod(line));
    return OpticalWaveform::from_power(std::move(v), rate, t0);
  }
  throw ConfigError(fmt::format("'{}': unknown kind '{}'", path, kind));
}

double dbm_to_watt(double dbm) { return 1e-3 * std::pow(10.0, dbm / 10.0); }
double watt_to_dbm(double watt) { return 10.0 * std::log10(watt / 1e-3); }

}  // namespace ringrc
