#include "ringrc_cli/commands.hpp"

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ringrc/config.hpp"
#include "ringrc/errors.hpp"
#include "ringrc/heatmap.hpp"
#include "ringrc/maps.hpp"
#include "ringrc/sweep.hpp"
#include "ringrc/waveform.hpp"

namespace ringrc::cli {

namespace fs = std::filesystem;

namespace {

struct SimulateArgs {
  double bitrate = 0.0;
  double detuning = 0.0;
  double power = 0.0;
  std::string task;
  int n_v = 5;
  std::uint64_t seed = 1;
  bool dump_traces = false;
};

struct SweepArgs {
  bool desk = false;
  bool full = false;
  unsigned workers = 1;
};

struct PlotArgs {
  std::string csv;
  std::string channel = "ber_out";
  std::string task;
  int n_v = 0;
  std::string out;
  std::string map_csv;
};

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string config_path;
  std::optional<std::string> config_text;  // set by replay
  std::string out_dir;
};

std::string fmt_num(double v) { return fmt::format("{}", v); }

RunConfig resolve_config(Context& ctx) {
  if (!ctx.config_text) {
    if (ctx.config_path.empty()) {
      ctx.config_text = to_config_text(RunConfig{});
    } else {
      if (!fs::is_regular_file(ctx.config_path))
        throw ConfigError(fmt::format("config file '{}' not found", ctx.config_path));
      ctx.config_text = read_text_file(ctx.config_path);
    }
  }
  return parse_config(*ctx.config_text);
}

void prepare(RunConfig& c, std::ostream& err) {
  if (!c.calibrate) return;
  const auto r = calibrate_nonlinear(c.settings.ring, c.settings.self_pulsing);
  c.settings.ring = r.params;
  err << fmt::format("calibrated: scale {:.4f}, self-pulsing threshold {:.2f} dBm\n", r.scale, r.threshold_dbm);
}

fs::path prepare_out_dir(const std::string& dir, std::string_view command) {
  const fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw IoError(fmt::format("cannot create output directory '{}': {}", dir, ec.message()));
  const auto manifest = p / manifest_name;
  if (fs::exists(manifest)) {
    const auto m = manifest_from_json(read_text_file(manifest));
    if (m.command != command)
      throw ConfigError(fmt::format("'{}' already holds a manifest of a '{}' run; choose another --out-dir", dir, m.command));
  }
  return p;
}

std::string hex_hash(const RunConfig& c) { return fmt::format("{:016x}", grid_hash(c)); }

void write_manifest(const fs::path& dir, RunManifest m) {
  m.finished_utc = utc_timestamp();
  write_text_file(dir / manifest_name, manifest_to_json(m));
}

std::string describe(const ConfigResult& r) {
  if (r.failed)
    return fmt::format("{} n_v={} bitrate={}Mbps detuning={}GHz power={}dBm: failed: {}", r.task.to_string(), r.n_v,
                       fmt_num(r.point.bitrate_mbps), fmt_num(r.point.detuning_ghz), fmt_num(r.point.power_dbm),
                       r.failure);
  return fmt::format(
      "{} n_v={} bitrate={}Mbps detuning={}GHz power={}dBm ber_out={:.4g} ({}/{}{}) ber_in={:.4g} ({}/{}{}) "
      "log10_rb={:.3f} self_pulsing={}",
      r.task.to_string(), r.n_v, fmt_num(r.point.bitrate_mbps), fmt_num(r.point.detuning_ghz),
      fmt_num(r.point.power_dbm), r.ber_out.ber, r.ber_out.errors, r.ber_out.n_test, r.ber_out.at_floor ? ", floor" : "",
      r.ber_in.ber, r.ber_in.errors, r.ber_in.n_test, r.ber_in.at_floor ? ", floor" : "", r.rb_log10(),
      int(r.self_pulsing));
}

int cmd_simulate(Context& ctx, const SimulateArgs& a, const std::vector<std::string>& recorded) {
  const auto started = utc_timestamp();
  auto cfg = resolve_config(ctx);
  const auto task = TaskSpec::parse(a.task);
  if (a.n_v < 1) throw ConfigError("--nv must be >= 1");
  std::optional<fs::path> dir;
  if (!ctx.out_dir.empty()) dir = prepare_out_dir(ctx.out_dir, "simulate");
  prepare(cfg, ctx.err);

  const OperatingPoint point{a.bitrate, a.detuning, a.power, a.seed};
  cfg.settings.validate();
  if (a.bitrate * 1e6 > cfg.settings.detector.adc_sample_rate)
    throw ConfigError("--bitrate exceeds the ADC sample rate");
  const auto traces = simulate_point(point, cfg.settings);
  const auto r = evaluate_configuration(traces, task, a.n_v, cfg.settings);
  ctx.out << describe(r) << '\n';

  if (dir) {
    const std::vector<ConfigResult> rows{r};
    export_results_csv(*dir / results_name, rows);
    if (a.dump_traces) {
      write_waveform_csv(traces.detected_in, (*dir / "trace_in.csv").string());
      write_waveform_csv(traces.detected_out, (*dir / "trace_out.csv").string());
    }
    RunManifest m;
    m.command = "simulate";
    m.args = recorded;
    m.config_text = *ctx.config_text;
    m.grid_hash = hex_hash(cfg);
    m.started_utc = started;
    m.seeds = {a.seed};
    m.prbs_seed = cfg.settings.prbs_seed;
    m.rows = 1;
    m.failed_rows = r.failed ? 1 : 0;
    write_manifest(*dir, m);
  }
  return r.failed ? exit_numeric : exit_ok;
}

int cmd_sweep(Context& ctx, const SweepArgs& a, const std::vector<std::string>& recorded) {
  const auto started = utc_timestamp();
  auto cfg = resolve_config(ctx);
  if (a.desk || a.full) {
    const auto g = a.full ? SweepGrid::full() : SweepGrid::desk();
    cfg.grid.bitrates_mbps = g.bitrates_mbps;
    cfg.grid.detunings_ghz = g.detunings_ghz;
    cfg.grid.powers_dbm = g.powers_dbm;
    cfg.grid.n_v_list = g.n_v_list;
  }
  const auto dir = prepare_out_dir(ctx.out_dir, "sweep");
  prepare(cfg, ctx.err);

  std::mutex progress_mutex;
  SweepOptions opts;
  opts.workers = a.workers;
  opts.progress = [&](std::size_t done, std::size_t total) {
    std::lock_guard lock(progress_mutex);
    ctx.err << fmt::format("[{}/{}] points\n", done, total);
  };
  const auto rows = run_sweep(cfg.grid, cfg.settings, opts);
  export_results_csv(dir / results_name, rows);

  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.failed ? 1 : 0;
  ctx.out << fmt::format("{} rows, {} failed, written to {}\n", rows.size(), failed, (dir / results_name).string());
  std::set<std::string> reported;
  for (const auto& r : rows) {
    if (!r.failed) continue;
    const auto key = fmt::format("{}|{}|{}|{}", r.point.bitrate_mbps, r.point.detuning_ghz, r.point.power_dbm, r.failure);
    if (reported.insert(key).second)
      ctx.out << fmt::format("  failed point {} Mbps, {} GHz, {} dBm, seed {}: {}\n", fmt_num(r.point.bitrate_mbps),
                             fmt_num(r.point.detuning_ghz), fmt_num(r.point.power_dbm), r.point.seed, r.failure);
  }

  RunManifest m;
  m.command = "sweep";
  m.args = recorded;
  m.config_text = *ctx.config_text;
  m.grid_hash = hex_hash(cfg);
  m.started_utc = started;
  m.seeds = cfg.grid.seeds;
  m.prbs_seed = cfg.settings.prbs_seed;
  m.workers = a.workers;
  m.rows = rows.size();
  m.failed_rows = failed;
  write_manifest(dir, m);
  return (!rows.empty() && failed == rows.size()) ? exit_numeric : exit_ok;
}

int cmd_plot(Context& ctx, const PlotArgs& a, const std::vector<std::string>& recorded) {
  const auto started = utc_timestamp();
  const auto channel = parse_map_channel(a.channel);
  std::vector<ConfigResult> rows;
  try {
    rows = read_results_csv(a.csv);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }

  std::vector<std::pair<TaskSpec, int>> combos;
  for (const auto& r : rows) {
    const std::pair<TaskSpec, int> k{r.task, r.n_v};
    if (std::find(combos.begin(), combos.end(), k) == combos.end()) combos.push_back(k);
  }
  std::optional<TaskSpec> want_task;
  if (!a.task.empty()) want_task = TaskSpec::parse(a.task);
  std::vector<std::pair<TaskSpec, int>> pick;
  for (const auto& c : combos)
    if ((!want_task || c.first == *want_task) && (a.n_v == 0 || c.second == a.n_v)) pick.push_back(c);
  if (pick.empty()) throw ConfigError(fmt::format("no rows in '{}' match the task/--nv filter", a.csv));
  if (pick.size() > 1) {
    std::string list;
    for (const auto& c : pick) list += fmt::format(" {}/n_v={}", c.first.to_string(), c.second);
    throw ConfigError(fmt::format("several maps match; pass --task and --nv:{}", list));
  }

  const auto map = build_map(rows, pick[0].first, pick[0].second);
  fs::path base = ctx.out_dir.empty() ? fs::path{} : prepare_out_dir(ctx.out_dir, "plot");
  const auto svg_path = base / a.out;
  write_text_file(svg_path, render_heatmap_svg(map, channel));
  if (!a.map_csv.empty()) write_text_file(base / a.map_csv, map_to_csv(map));
  ctx.out << fmt::format("{} n_v={} {}: {}x{} cells written to {}\n", map.task.to_string(), map.n_v,
                         to_string(channel), map.bitrates_mbps.size(), map.detunings_ghz.size(), svg_path.string());

  if (!ctx.out_dir.empty()) {
    RunManifest m;
    m.command = "plot";
    m.args = recorded;
    m.grid_hash = fmt::format("{:016x}", 0);
    m.started_utc = started;
    m.rows = rows.size();
    write_manifest(base, m);
  }
  return exit_ok;
}

unsigned default_workers() {
  if (const char* env = std::getenv("RINGRC_WORKERS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("RINGRC_WORKERS must be a positive integer, got '{}'", env));
  }
  return 1;
}

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
             std::optional<std::string> config_text) {
  CLI::App app{"Microring reservoir computing simulator"};
  app.set_version_flag("--version", std::string(tool_version));
  app.require_subcommand(1);

  Context ctx{out, err, {}, std::move(config_text), {}};

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "Run one configuration and report both branches");
  s->add_option("--config", ctx.config_path, "INI configuration file");
  s->add_option("--bitrate", sim.bitrate, "Bitrate in Mbps")->required();
  s->add_option("--detuning", sim.detuning, "Laser detuning in GHz (positive: red side)")->required();
  s->add_option("--power", sim.power, "Average input power in dBm")->required();
  s->add_option("--task", sim.task, "Task as OP:n1:n2, e.g. XOR:2:3")->required();
  s->add_option("--nv", sim.n_v, "Virtual nodes per bit")->capture_default_str();
  s->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();
  s->add_option("--out-dir", ctx.out_dir, "Directory for the manifest, results and traces");
  s->add_flag("--dump-traces", sim.dump_traces, "Write the detected input and output traces")->needs("--out-dir");

  SweepArgs sw;
  sw.workers = 0;
  auto* w = app.add_subcommand("sweep", "Run the factorial sweep and write results.csv");
  w->add_option("--config", ctx.config_path, "INI configuration file");
  w->add_option("--out-dir", ctx.out_dir, "Output directory")->required();
  w->add_option("--workers", sw.workers, "Worker threads (default: RINGRC_WORKERS or 1)")->check(CLI::PositiveNumber);
  auto* desk = w->add_flag("--desk", sw.desk, "Use the desk-scale grid axes");
  w->add_flag("--full", sw.full, "Use the full measured grid axes")->excludes(desk);

  PlotArgs pl;
  auto* p = app.add_subcommand("plot", "Render one map from a results CSV as SVG");
  p->add_option("--csv", pl.csv, "Results CSV")->required();
  p->add_option("--channel", pl.channel, "ber_out, power or rb")->capture_default_str();
  p->add_option("--task", pl.task, "Task filter as OP:n1:n2");
  p->add_option("--nv", pl.n_v, "Node count filter");
  p->add_option("--out", pl.out, "SVG file, relative to --out-dir when given")->required();
  p->add_option("--map-csv", pl.map_csv, "Also write the reduced map as CSV");
  p->add_option("--out-dir", ctx.out_dir, "Output directory");

  std::string manifest_path;
  auto* r = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  r->add_option("manifest", manifest_path, "manifest.json of an earlier run")->required();
  r->add_option("--out-dir", ctx.out_dir, "Output directory")->required();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_config;
  }

  // Flags that define the computation; replay supplies config and out-dir itself.
  auto recorded = [&](const CLI::App* sub, std::initializer_list<std::string_view> skip) {
    std::vector<std::string> rec;
    for (const auto* opt : sub->get_options()) {
      const auto name = opt->get_name();
      if (opt->count() == 0 || name == "--help") continue;
      if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
      if (opt->get_expected_max() == 0) {
        rec.push_back(name);
        continue;
      }
      for (const auto& v : opt->results()) {
        rec.push_back(name);
        rec.push_back(v);
      }
    }
    return rec;
  };

  try {
    if (*s) return cmd_simulate(ctx, sim, recorded(s, {"--config", "--out-dir"}));
    if (*w) {
      if (sw.workers == 0) sw.workers = default_workers();
      return cmd_sweep(ctx, sw, recorded(w, {"--config", "--out-dir", "--workers"}));
    }
    if (*p) {
      pl.csv = fs::absolute(pl.csv).string();
      auto rec = recorded(p, {"--out-dir", "--csv"});
      rec.insert(rec.begin(), {"--csv", pl.csv});
      return cmd_plot(ctx, pl, rec);
    }
    const auto m = manifest_from_json(read_text_file(manifest_path));
    std::vector<std::string> again{m.command};
    again.insert(again.end(), m.args.begin(), m.args.end());
    again.insert(again.end(), {"--out-dir", ctx.out_dir});
    return run_impl(again, out, err, m.command == "plot" ? std::nullopt : std::optional(m.config_text));
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return exit_config;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return exit_numeric;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return run_impl(args, out, err, std::nullopt);
}

}  // namespace ringrc::cli
