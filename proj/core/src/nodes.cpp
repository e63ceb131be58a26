#include "ringrc/nodes.hpp"

#include <cmath>

#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

int samples_per_bit(double bitrate, double adc_rate) {
  if (!(bitrate > 0.0) || !(adc_rate > 0.0)) throw ConfigError("rates must be positive");
  if (adc_rate < bitrate)
    throw ConfigError(fmt::format("rate mismatch: ADC rate {:.6g} Sa/s below bitrate {:.6g} b/s", adc_rate, bitrate));
  return static_cast<int>(std::floor(adc_rate / bitrate * (1.0 + 1e-12)));
}

NodeMatrix rebin_to_nodes(const OpticalWaveform& trace, double bitrate, int n_v_desired, std::size_t bit_alignment,
                          Branch branch, std::size_t skip_bits, std::size_t max_bits) {
  if (n_v_desired < 1) throw ConfigError("n_v_desired must be >= 1");
  const auto samples = trace.power();
  const double rate = trace.sample_rate();
  const int spb = samples_per_bit(bitrate, rate);
  const double per_bit = rate / bitrate;
  auto bit_start = [&](std::size_t k) {
    return bit_alignment + static_cast<std::size_t>(std::floor(static_cast<double>(k) * per_bit * (1.0 + 1e-15)));
  };

  std::size_t whole = 0;
  while (bit_start(whole) + static_cast<std::size_t>(spb) <= samples.size()) ++whole;
  if (whole <= skip_bits) throw ConfigError("empty trace: no whole bit after alignment and warm-up");
  std::size_t rows = whole - skip_bits;
  if (max_bits > 0) rows = std::min(rows, max_bits);

  NodeMatrix m;
  m.values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), n_v_desired);
  m.bitrate = bitrate;
  m.n_v_desired = n_v_desired;
  m.samples_per_bit_raw = spb;
  m.branch = branch;
  m.first_bit = skip_bits;

  const auto s = static_cast<std::size_t>(spb);
  const auto nv = static_cast<std::size_t>(n_v_desired);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t start = bit_start(skip_bits + r);
    if (s < nv) {
      for (std::size_t i = 0; i < s; ++i) m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = samples[start + i];
      continue;
    }
    const std::size_t base = s / nv, extra = s % nv;
    std::size_t pos = start;
    for (std::size_t b = 0; b < nv; ++b) {
      const std::size_t len = base + (b < extra ? 1 : 0);
      double acc = 0.0;
      for (std::size_t i = 0; i < len; ++i) acc += samples[pos + i];
      m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(b)) = acc / static_cast<double>(len);
      pos += len;
    }
  }
  return m;
}

DesignMatrix assemble_design_matrix(const NodeMatrix& nodes, int n2) {
  if (n2 < 1) throw ConfigError("n2 must be >= 1");
  const auto rows = static_cast<Eigen::Index>(nodes.rows());
  if (rows < n2) throw ConfigError(fmt::format("too few bits: {} rows for {} R-bits", rows, n2));
  const Eigen::Index nv = nodes.n_v_desired;
  const Eigen::Index out_rows = rows - n2 + 1;
  DesignMatrix d;
  d.x.resize(out_rows, n2 * nv + 1);
  d.row_bit_index.resize(static_cast<std::size_t>(out_rows));
  for (Eigen::Index r = 0; r < out_rows; ++r) {
    const Eigen::Index j = r + n2 - 1;
    for (Eigen::Index q = 0; q < n2; ++q) d.x.block(r, q * nv, 1, nv) = nodes.values.row(j - n2 + 1 + q);
    d.x(r, n2 * nv) = 1.0;
    d.row_bit_index[static_cast<std::size_t>(r)] = nodes.first_bit + static_cast<std::size_t>(j);
  }
  return d;
}

}  // namespace ringrc
