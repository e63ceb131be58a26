#include "ringrc/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

std::string_view to_string(OutputPort port) { return port == OutputPort::through ? "through" : "drop"; }

OutputPort parse_output_port(std::string_view text) {
  if (text == "through") return OutputPort::through;
  if (text == "drop") return OutputPort::drop;
  throw ConfigError(fmt::format("unknown output port '{}' (expected through or drop)", text));
}

void ExperimentSettings::validate() const {
  ring.validate();
  modulator.validate();
  detector.validate();
  solver.validate();
  if (!(sim_sample_rate > 0.0)) throw ConfigError("simulation sample rate must be positive");
  if (sim_sample_rate < detector.adc_sample_rate)
    throw ConfigError("simulation sample rate must not be below the ADC rate");
  if (prbs_seed == 0) throw ConfigError("PRBS seed must be nonzero");
  if (train_bits < static_cast<std::size_t>(2 * readout.folds))
    throw ConfigError("training block too short for cross-validation");
  if (readout.test_bits == 0) throw ConfigError("test block must hold at least one bit");
  if (!(warmup_tau_th >= 0.0)) throw ConfigError("warm-up multiple must be >= 0");
}

double laser_offset_hz(double detuning_ghz) { return -detuning_ghz * 1e9; }

std::size_t warmup_bits(double bitrate_bps, const ExperimentSettings& s) {
  const auto period = static_cast<std::size_t>(prbs8_generate(s.prbs_seed).period);
  const double needed = s.warmup_tau_th * s.ring.tau_th_s * bitrate_bps;
  const auto periods = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(needed / period - 1e-9)));
  return periods * period;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t noise_seed(const OperatingPoint& p, std::uint64_t branch) {
  std::uint64_t h = splitmix64(p.seed);
  for (double v : {p.bitrate_mbps, p.detuning_ghz, p.power_dbm}) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
  return splitmix64(h ^ branch);
}

constexpr std::size_t chunk_samples = 1 << 14;
// Trailing bits absorb the filter delays so the last evaluated bit is whole.
constexpr std::size_t tail_bits = 2;

}  // namespace

PointTraces simulate_point(const OperatingPoint& point, const ExperimentSettings& s) {
  const double bitrate = point.bitrate_mbps * 1e6;
  if (!(bitrate > 0.0)) throw ConfigError("bitrate must be positive");
  if (bitrate > s.detector.adc_sample_rate)
    throw ConfigError(fmt::format("rate mismatch: {} Mbps exceeds the ADC rate", point.bitrate_mbps));

  PointTraces t;
  t.point = point;
  t.warmup = warmup_bits(bitrate, s);
  t.eval_bits = s.train_bits + s.readout.test_bits;
  const std::size_t total = t.warmup + t.eval_bits + tail_bits;
  const auto seq = prbs8_generate(s.prbs_seed);
  t.bits.reserve(total);
  while (t.bits.size() < total) t.bits.push_back(seq.bits[t.bits.size() % seq.bits.size()]);

  const double rate = s.sim_sample_rate;
  const double watts = dbm_to_watt(point.power_dbm - s.ring.coupling_loss_db);
  OokSource source(t.bits, bitrate, watts, s.modulator, rate);
  RingIntegrator ring(s.ring, laser_offset_hz(point.detuning_ghz), s.solver, rate);
  DetectorStream det_in(s.detector, rate), det_out(s.detector, rate);

  std::vector<Complex> drive(chunk_samples), through(chunk_samples), drop(chunk_samples);
  while (source.remaining() > 0) {
    const std::size_t n = source.next(drive);
    const std::span<const Complex> in(drive.data(), n);
    ring.process(in, std::span(through.data(), n), std::span(drop.data(), n));
    det_in.feed(in);
    det_out.feed(std::span<const Complex>(s.port == OutputPort::through ? through.data() : drop.data(), n));
  }
  t.solver_steps = ring.steps();
  t.detected_in = det_in.finish(noise_seed(point, 1));
  t.detected_out = det_out.finish(noise_seed(point, 2));

  const double adc = s.detector.adc_sample_rate;
  const double delay = modulator_delay(s.modulator, rate) + detector_delay(s.detector, rate);
  t.align_in = static_cast<std::size_t>(std::llround(delay * adc));
  t.align_out = static_cast<std::size_t>(std::llround((delay + s.ring.photon_lifetime()) * adc));

  if (s.check_self_pulsing)
    t.self_pulsing = cw_self_pulsing(s.ring, point.power_dbm, laser_offset_hz(point.detuning_ghz), s.self_pulsing)
                         .is_pulsing;
  return t;
}

namespace {

BranchOutcome evaluate_branch(const OpticalWaveform& trace, std::size_t align, Branch branch,
                              const PointTraces& t, const TaskSpec& task, int n_v, const Targets& targets,
                              const ExperimentSettings& s) {
  const double bitrate = t.point.bitrate_mbps * 1e6;
  const std::size_t pre = task.valid_from();
  if (pre > t.warmup) throw ConfigError(fmt::format("task {} reaches past the warm-up", task.to_string()));
  const auto nodes = rebin_to_nodes(trace, bitrate, n_v, align, branch, t.warmup - pre, pre + t.eval_bits);
  if (nodes.rows() < pre + t.eval_bits)
    throw ConfigError(fmt::format("trace holds {} bits, {} needed", nodes.rows(), pre + t.eval_bits));
  const auto design = assemble_design_matrix(nodes, task.n2);

  // Keep the rows whose present bit lies after the warm-up.
  const auto first = static_cast<Eigen::Index>(pre - static_cast<std::size_t>(task.n2 - 1));
  const auto rows = static_cast<Eigen::Index>(t.eval_bits);
  const Eigen::MatrixXd x = design.x.middleRows(first, rows);
  std::vector<std::uint8_t> y(t.eval_bits);
  std::vector<std::size_t> index(t.eval_bits);
  for (std::size_t r = 0; r < t.eval_bits; ++r) {
    index[r] = design.row_bit_index[static_cast<std::size_t>(first) + r];
    y[r] = targets.y[index[r]];
  }

  const std::size_t guard = static_cast<std::size_t>(std::max(task.n1, task.n2));
  const auto split = plan_split(t.eval_bits, s.readout.test_bits, guard);
  const auto result = train_and_test(x, y, split, s.readout);
  BranchOutcome b;
  b.evaluation = result.evaluation;
  b.lambda = result.weights.lambda;
  b.test_bits.assign(index.begin() + static_cast<std::ptrdiff_t>(split.test_begin),
                     index.begin() + static_cast<std::ptrdiff_t>(split.test_end));
  return b;
}

}  // namespace

ReadoutOutcome evaluate_readout(const PointTraces& t, const TaskSpec& task, int n_v, const ExperimentSettings& s) {
  task.validate();
  const auto targets = build_targets(t.bits, task);
  ReadoutOutcome r;
  r.out = evaluate_branch(t.detected_out, t.align_out, Branch::output, t, task, n_v, targets, s);
  r.in = evaluate_branch(t.detected_in, t.align_in, Branch::input, t, task, n_v, targets, s);
  if (r.out.test_bits != r.in.test_bits) throw NumericError("input and output branches tested different bits");
  return r;
}

double ConfigResult::rb_log10() const { return std::log10(ber_in.ber) - std::log10(ber_out.ber); }

namespace {

ConfigResult failed_result(const TaskSpec& task, int n_v, const OperatingPoint& point, const std::string& why) {
  ConfigResult c;
  c.task = task;
  c.n_v = n_v;
  c.point = point;
  c.failed = true;
  c.failure = why;
  c.ber_out.ber = c.ber_in.ber = std::nan("");
  c.lambda_out = c.lambda_in = std::nan("");
  return c;
}

}  // namespace

ConfigResult evaluate_configuration(const PointTraces& t, const TaskSpec& task, int n_v, const ExperimentSettings& s) {
  try {
    const auto r = evaluate_readout(t, task, n_v, s);
    ConfigResult c;
    c.task = task;
    c.n_v = n_v;
    c.point = t.point;
    c.ber_out = r.out.evaluation;
    c.ber_in = r.in.evaluation;
    c.lambda_out = r.out.lambda;
    c.lambda_in = r.in.lambda;
    c.self_pulsing = t.self_pulsing;
    return c;
  } catch (const NumericError& e) {
    return failed_result(task, n_v, t.point, e.what());
  }
}

ConfigResult run_configuration(const TaskSpec& task, int n_v, const OperatingPoint& point,
                               const ExperimentSettings& s) {
  s.validate();
  task.validate();
  PointTraces t;
  try {
    t = simulate_point(point, s);
  } catch (const NumericError& e) {
    return failed_result(task, n_v, point, e.what());
  }
  return evaluate_configuration(t, task, n_v, s);
}

SweepGrid SweepGrid::desk() {
  SweepGrid g;
  g.bitrates_mbps = {50, 100, 250, 1000};
  g.detunings_ghz = {-20, 0, 20};
  g.powers_dbm = {8, 12, 16};
  g.n_v_list = {5};
  for (const char* t : {"AND:1:1", "AND:1:2", "AND:2:1", "AND:3:1", "XOR:1:1", "XOR:1:2", "XOR:2:1", "XOR:2:2",
                        "XOR:2:3"})
    g.tasks.push_back(TaskSpec::parse(t));
  return g;
}

SweepGrid SweepGrid::full() {
  SweepGrid g = desk();
  g.bitrates_mbps = {20, 40, 50, 80, 100, 200, 250, 400, 500, 800, 1000, 2000, 4000};
  g.detunings_ghz.clear();
  for (int d = -30; d <= 30; d += 5) g.detunings_ghz.push_back(d);
  g.powers_dbm.clear();
  for (int p = 8; p <= 18; ++p) g.powers_dbm.push_back(p);
  g.n_v_list = {3, 4, 5, 10, 15, 20, 30};
  return g;
}

void SweepGrid::validate() const {
  if (bitrates_mbps.empty() || detunings_ghz.empty() || powers_dbm.empty() || n_v_list.empty() || seeds.empty())
    throw ConfigError("sweep grid lists must be non-empty");
  for (double b : bitrates_mbps)
    if (!(b > 0.0)) throw ConfigError("bitrates must be positive");
  for (int n : n_v_list)
    if (n < 1) throw ConfigError("node counts must be >= 1");
  for (const auto& t : tasks) t.validate();
}

std::size_t SweepGrid::point_count() const {
  return bitrates_mbps.size() * detunings_ghz.size() * powers_dbm.size() * seeds.size();
}

std::size_t SweepGrid::row_count() const { return tasks.size() * n_v_list.size() * point_count(); }

std::vector<ConfigResult> run_sweep(const SweepGrid& grid, const ExperimentSettings& s, const SweepOptions& opts) {
  if (grid.tasks.empty()) return {};
  grid.validate();
  s.validate();
  for (double b : grid.bitrates_mbps)
    if (b * 1e6 > s.detector.adc_sample_rate)
      throw ConfigError(fmt::format("rate mismatch: {} Mbps exceeds the ADC rate", b));

  std::vector<OperatingPoint> points;
  points.reserve(grid.point_count());
  for (double b : grid.bitrates_mbps)
    for (double d : grid.detunings_ghz)
      for (double p : grid.powers_dbm)
        for (auto seed : grid.seeds) points.push_back({b, d, p, seed});

  const std::size_t per_point = grid.tasks.size() * grid.n_v_list.size();
  // results[point][task * n_v_count + n_v_index]
  std::vector<std::vector<ConfigResult>> results(points.size());
  std::atomic<std::size_t> next{0}, done{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;

  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      try {
        auto& out = results[i];
        out.reserve(per_point);
        std::optional<PointTraces> traces;
        std::string failure;
        try {
          traces = simulate_point(points[i], s);
        } catch (const NumericError& e) {
          failure = e.what();
        }
        for (const auto& task : grid.tasks)
          for (int n_v : grid.n_v_list)
            out.push_back(traces ? evaluate_configuration(*traces, task, n_v, s)
                                 : failed_result(task, n_v, points[i], failure));
      } catch (...) {
        std::lock_guard lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
        next.store(points.size());
        return;
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (opts.progress) opts.progress(d, points.size());
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(opts.workers, static_cast<unsigned>(points.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (fatal) std::rethrow_exception(fatal);

  std::vector<ConfigResult> ordered;
  ordered.reserve(grid.row_count());
  const std::size_t nv_count = grid.n_v_list.size();
  for (std::size_t task = 0; task < grid.tasks.size(); ++task)
    for (std::size_t v = 0; v < nv_count; ++v)
      for (auto& r : results) ordered.push_back(std::move(r[task * nv_count + v]));
  return ordered;
}

}  // namespace ringrc
