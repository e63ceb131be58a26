#include "ringrc/config.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "ringrc/errors.hpp"

namespace ringrc {

namespace {

namespace pt = boost::property_tree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = s.find(',', start);
    auto item = trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(fmt::format("config key '{}': '{}' is not a number", key, v));
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size())
    throw ConfigError(fmt::format("config key '{}': '{}' is not an integer", key, v));
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(fmt::format("config key '{}': '{}' is not a boolean", key, v));
}

// Declarative binding of every config key to a field.
struct Binding {
  std::string section, key;
  std::function<void(const std::string&, const std::string&)> set;
  std::function<std::string()> get;
};

std::string fmt_double(double v) { return fmt::format("{}", v); }

template <class T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_same_v<T, TaskSpec>)
      out += v[i].to_string();
    else
      out += fmt::format("{}", v[i]);
  }
  return out;
}

std::vector<Binding> bindings(RunConfig& c) {
  auto& s = c.settings;
  auto& g = c.grid;
  std::vector<Binding> b;
  auto real = [&](std::string sec, std::string key, double& field) {
    b.push_back({sec, key, [&field](const std::string& k, const std::string& v) { field = to_double(k, v); },
                 [&field] { return fmt_double(field); }});
  };
  auto integer = [&](std::string sec, std::string key, auto& field) {
    using T = std::remove_reference_t<decltype(field)>;
    b.push_back({sec, key, [&field](const std::string& k, const std::string& v) { field = to_int<T>(k, v); },
                 [&field] { return fmt::format("{}", field); }});
  };
  auto boolean = [&](std::string sec, std::string key, bool& field) {
    b.push_back({sec, key, [&field](const std::string& k, const std::string& v) { field = to_bool(k, v); },
                 [&field] { return std::string(field ? "true" : "false"); }});
  };
  auto real_list = [&](std::string sec, std::string key, std::vector<double>& field) {
    b.push_back({sec, key,
                 [&field](const std::string& k, const std::string& v) {
                   field.clear();
                   for (const auto& item : split_list(v)) field.push_back(to_double(k, item));
                 },
                 [&field] { return join(field); }});
  };

  real("ring", "f0_hz", s.ring.f0_hz);
  real("ring", "q_loaded", s.ring.q_loaded);
  real("ring", "eta_drop", s.ring.eta_drop);
  real("ring", "eta_in", s.ring.eta_in);
  real("ring", "tau_fc_s", s.ring.tau_fc_s);
  real("ring", "tau_th_s", s.ring.tau_th_s);
  real("ring", "g_tpa", s.ring.g_tpa);
  real("ring", "k_fcd", s.ring.k_fcd);
  real("ring", "k_th", s.ring.k_th);
  real("ring", "h_abs", s.ring.h_abs);
  real("ring", "c_lin", s.ring.c_lin);
  real("ring", "c_fca", s.ring.c_fca);
  real("ring", "coupling_loss_db", s.ring.coupling_loss_db);
  boolean("ring", "calibrate", c.calibrate);

  real("modulator", "bandwidth_3db_hz", s.modulator.bandwidth_3db_hz);
  integer("modulator", "filter_order", s.modulator.filter_order);
  real("modulator", "extinction_ratio_db", s.modulator.extinction_ratio_db);
  b.push_back({"modulator", "transfer",
               [&s](const std::string& k, const std::string& v) {
                 if (v == "linear")
                   s.modulator.transfer_shape = TransferShape::linear;
                 else if (v == "sinusoidal")
                   s.modulator.transfer_shape = TransferShape::sinusoidal;
                 else
                   throw ConfigError(fmt::format("config key '{}': expected linear or sinusoidal, got '{}'", k, v));
               },
               [&s] {
                 return std::string(s.modulator.transfer_shape == TransferShape::linear ? "linear" : "sinusoidal");
               }});
  real("modulator", "awg_sample_rate_hz", s.modulator.awg_sample_rate);

  real("detector", "bandwidth_3db_hz", s.detector.bandwidth_3db_hz);
  integer("detector", "filter_order", s.detector.filter_order);
  real("detector", "adc_sample_rate_hz", s.detector.adc_sample_rate);
  real("detector", "noise_rms_rel", s.detector.noise_rms_rel);
  real("detector", "target_mean", s.detector.target_mean);

  real("solver", "max_step_s", s.solver.max_step_s);
  real("solver", "rel_tol", s.solver.rel_tol);
  real("solver", "sim_sample_rate_hz", s.sim_sample_rate);

  real_list("sweep", "bitrates_mbps", g.bitrates_mbps);
  real_list("sweep", "detunings_ghz", g.detunings_ghz);
  real_list("sweep", "powers_dbm", g.powers_dbm);
  b.push_back({"sweep", "n_v",
               [&g](const std::string& k, const std::string& v) {
                 g.n_v_list.clear();
                 for (const auto& item : split_list(v)) g.n_v_list.push_back(to_int<int>(k, item));
               },
               [&g] { return join(g.n_v_list); }});
  b.push_back({"sweep", "tasks",
               [&g](const std::string&, const std::string& v) {
                 g.tasks.clear();
                 for (const auto& item : split_list(v)) g.tasks.push_back(TaskSpec::parse(item));
               },
               [&g] { return join(g.tasks); }});
  b.push_back({"sweep", "seeds",
               [&g](const std::string& k, const std::string& v) {
                 g.seeds.clear();
                 for (const auto& item : split_list(v)) g.seeds.push_back(to_int<std::uint64_t>(k, item));
               },
               [&g] { return join(g.seeds); }});
  b.push_back({"sweep", "port", [&s](const std::string&, const std::string& v) { s.port = parse_output_port(v); },
               [&s] { return std::string(to_string(s.port)); }});
  b.push_back({"sweep", "prbs_seed",
               [&s](const std::string& k, const std::string& v) {
                 const auto seed = to_int<unsigned>(k, v);
                 if (seed == 0 || seed > 255) throw ConfigError("config key 'prbs_seed': must lie in 1..255");
                 s.prbs_seed = static_cast<std::uint8_t>(seed);
               },
               [&s] { return fmt::format("{}", unsigned{s.prbs_seed}); }});
  integer("sweep", "train_bits", s.train_bits);
  real("sweep", "warmup_tau_th", s.warmup_tau_th);
  boolean("sweep", "check_self_pulsing", s.check_self_pulsing);

  integer("readout", "folds", s.readout.folds);
  integer("readout", "lambda_points", s.readout.lambda_points);
  real("readout", "lambda_lo", s.readout.lambda_lo);
  real("readout", "lambda_hi", s.readout.lambda_hi);
  real("readout", "threshold", s.readout.threshold);
  integer("readout", "test_bits", s.readout.test_bits);
  return b;
}

std::string section_text(std::vector<Binding>& b, std::string_view only = {}) {
  std::string out, current;
  for (const auto& x : b) {
    if (!only.empty() && x.section != only) continue;
    if (x.section != current) {
      if (!current.empty()) out += '\n';
      out += fmt::format("[{}]\n", x.section);
      current = x.section;
    }
    out += fmt::format("{} = {}\n", x.key, x.get());
  }
  return out;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(fmt::format("malformed config: {} (line {})", e.message(), e.line()));
  }
  RunConfig c;
  auto b = bindings(c);
  std::set<std::string> sections;
  for (const auto& x : b) sections.insert(x.section);
  for (const auto& [name, sec] : tree) {
    if (!sections.count(name)) {
      if (sec.empty()) throw ConfigError(fmt::format("config key '{}' outside any section", name));
      throw ConfigError(fmt::format("unknown config section [{}]", name));
    }
    for (const auto& [key, value] : sec) {
      auto it = std::find_if(b.begin(), b.end(), [&](const Binding& x) { return x.section == name && x.key == key; });
      if (it == b.end()) throw ConfigError(fmt::format("unknown config key '{}' in [{}]", key, name));
      it->set(key, trim(value.data()));
    }
  }
  c.settings.validate();
  c.grid.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw ConfigError(fmt::format("config file '{}' not found", path.string()));
  return parse_config(read_text_file(path));
}

std::string to_config_text(const RunConfig& c) {
  RunConfig copy = c;
  auto b = bindings(copy);
  return section_text(b);
}

std::uint64_t grid_hash(const RunConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_config_text(c)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["args"] = m.args;
  j["tool_version"] = m.tool_version;
  j["grid_hash"] = m.grid_hash;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  j["seeds"] = m.seeds;
  j["prbs_seed"] = m.prbs_seed;
  j["workers"] = m.workers;
  j["rows"] = m.rows;
  j["failed_rows"] = m.failed_rows;
  j["config"] = m.config_text;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args").get<std::vector<std::string>>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.grid_hash = j.at("grid_hash").get<std::string>();
    m.started_utc = j.at("started_utc").get<std::string>();
    m.finished_utc = j.at("finished_utc").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.prbs_seed = j.at("prbs_seed").get<unsigned>();
    m.workers = j.at("workers").get<unsigned>();
    m.rows = j.at("rows").get<std::size_t>();
    m.failed_rows = j.at("failed_rows").get<std::size_t>();
    m.config_text = j.at("config").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed manifest: {}", e.what()));
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

}  // namespace ringrc
