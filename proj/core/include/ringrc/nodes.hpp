#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "ringrc/waveform.hpp"

namespace ringrc {

enum class Branch { input, output };

struct NodeMatrix {
  Eigen::MatrixXd values;  // bits x n_v_desired
  double bitrate = 0.0;
  int n_v_desired = 0;
  int samples_per_bit_raw = 0;
  Branch branch = Branch::output;
  std::size_t first_bit = 0;  // absolute bit index of row 0

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
};

/// floor(adc_rate / bitrate). Throws ConfigError when adc_rate < bitrate.
int samples_per_bit(double bitrate, double adc_rate);

/// Splits each bit into n_v_desired contiguous bins (earlier bins get the
/// extra sample when the split is uneven) and averages them. With fewer
/// raw samples than nodes the samples are copied and the rest zero-filled.
///
/// Bit k starts at sample offset + floor(k * adc_rate / bitrate). The first
/// `skip_bits` bits are dropped (warm-up); at most `max_bits` rows are kept
/// (0 = all whole bits).
NodeMatrix rebin_to_nodes(const OpticalWaveform& trace, double bitrate, int n_v_desired,
                          std::size_t bit_alignment, Branch branch = Branch::output,
                          std::size_t skip_bits = 0, std::size_t max_bits = 0);

struct DesignMatrix {
  Eigen::MatrixXd x;                   // rows x (n2 * n_v + 1), bias last
  std::vector<std::size_t> row_bit_index;  // absolute index of the present bit
};

/// Row for present bit j concatenates nodes of bits j-n2+1 .. j (oldest
/// first) and a trailing 1. Throws ConfigError when nodes has < n2 rows.
DesignMatrix assemble_design_matrix(const NodeMatrix& nodes, int n2);

}  // namespace ringrc
