#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ringrc/nodes.hpp"
#include "ringrc/readout.hpp"
#include "ringrc/ring_dynamics.hpp"
#include "ringrc/signal_chain.hpp"
#include "ringrc/tasks.hpp"

namespace ringrc {

enum class OutputPort { through, drop };

std::string_view to_string(OutputPort port);
OutputPort parse_output_port(std::string_view text);

/// Everything that stays fixed across a sweep.
struct ExperimentSettings {
  RingParams ring = RingParams::silicon_default();
  ModulatorModel modulator{};
  DetectorModel detector{};
  SolverSettings solver{};
  ReadoutSettings readout{};
  CalibrationSettings self_pulsing{};
  OutputPort port = OutputPort::through;
  double sim_sample_rate = 80e9;
  std::uint8_t prbs_seed = 1;
  std::size_t train_bits = 2550;
  /// Warm-up covers at least one PRBS period and this many thermal lifetimes.
  double warmup_tau_th = 5.0;
  bool check_self_pulsing = true;

  void validate() const;
};

/// One physical operating point. Detuning follows the wavelength-style
/// convention: positive means the laser sits on the red (long-wavelength)
/// side of the cold resonance, where heating pulls the resonance onto it.
struct OperatingPoint {
  double bitrate_mbps = 100.0;
  double detuning_ghz = 0.0;
  double power_dbm = 8.0;
  std::uint64_t seed = 1;
};

/// Laser offset from the cold resonance in Hz (laser minus resonance).
double laser_offset_hz(double detuning_ghz);

/// Number of warm-up bits discarded before the training block.
std::size_t warmup_bits(double bitrate_bps, const ExperimentSettings& s);

struct PointTraces {
  OperatingPoint point;
  Bits bits;                   // every simulated bit, warm-up included
  std::size_t warmup = 0;      // bits before the first training bit
  std::size_t eval_bits = 0;   // training + test bits after the warm-up
  OpticalWaveform detected_in;
  OpticalWaveform detected_out;
  std::size_t align_in = 0;    // ADC sample where bit 0 starts
  std::size_t align_out = 0;
  bool self_pulsing = false;
  std::size_t solver_steps = 0;
};

/// PRBS -> OOK -> ring -> photodetection for both branches. The input branch
/// detects the modulated signal directly; the output branch detects the
/// selected ring port. Throws NonFiniteState on integrator failure.
PointTraces simulate_point(const OperatingPoint& point, const ExperimentSettings& s);

struct BranchOutcome {
  Evaluation evaluation;
  double lambda = 0.0;
  std::vector<std::size_t> test_bits;  // absolute indices of the tested bits
};

struct ReadoutOutcome {
  BranchOutcome out;
  BranchOutcome in;
};

/// Trains and tests the readout on both branches with identical splits.
ReadoutOutcome evaluate_readout(const PointTraces& traces, const TaskSpec& task, int n_v,
                                const ExperimentSettings& s);

struct ConfigResult {
  TaskSpec task;
  int n_v = 0;
  OperatingPoint point;
  Evaluation ber_out;
  Evaluation ber_in;
  double lambda_out = 0.0;
  double lambda_in = 0.0;
  bool self_pulsing = false;
  bool failed = false;
  std::string failure;

  double rb_log10() const;
};

/// Scores already simulated traces; numeric failures give a failed result.
ConfigResult evaluate_configuration(const PointTraces& traces, const TaskSpec& task, int n_v,
                                    const ExperimentSettings& s);

ConfigResult run_configuration(const TaskSpec& task, int n_v, const OperatingPoint& point,
                               const ExperimentSettings& s);

struct SweepGrid {
  std::vector<double> bitrates_mbps;
  std::vector<double> detunings_ghz;
  std::vector<double> powers_dbm;
  std::vector<int> n_v_list;
  std::vector<TaskSpec> tasks;
  std::vector<std::uint64_t> seeds{1};

  /// 4 bitrates x 3 detunings x 3 powers, N_v = 5, nine logic tasks.
  static SweepGrid desk();
  /// The measured grid: 13 bitrates x 13 detunings x 11 powers x 7 node counts.
  static SweepGrid full();

  void validate() const;
  std::size_t point_count() const;
  std::size_t row_count() const;
};

struct SweepOptions {
  unsigned workers = 1;
  /// Called after each physical point finishes (done, total); may run on any worker.
  std::function<void(std::size_t, std::size_t)> progress;
};

/// Runs every (task, n_v, bitrate, detuning, power, seed) combination. Each
/// physical point is one unit of work: it is simulated once and evaluated for
/// every task and node count. Results come back in grid order, independent of
/// the worker count. A failing point yields failed rows, never an exception.
std::vector<ConfigResult> run_sweep(const SweepGrid& grid, const ExperimentSettings& s,
                                    const SweepOptions& opts = {});

}  // namespace ringrc
