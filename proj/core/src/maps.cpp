#include "ringrc/maps.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

double rb_ratio(const Evaluation& ber_in, const Evaluation& ber_out) {
  return std::log10(ber_in.ber) - std::log10(ber_out.ber);
}

MapCell best_over_power(std::span<const ConfigResult> results) {
  if (results.empty()) throw ConfigError("best_over_power: empty input");
  MapCell c;
  c.bitrate_mbps = results.front().point.bitrate_mbps;
  c.detuning_ghz = results.front().point.detuning_ghz;
  const ConfigResult* best_out = nullptr;
  const ConfigResult* best_in = nullptr;
  for (const auto& r : results) {
    if (r.failed) continue;
    auto better = [&](const ConfigResult* cur, double v, double cur_v) {
      return !cur || v < cur_v || (v == cur_v && r.point.power_dbm < cur->point.power_dbm);
    };
    if (better(best_out, r.ber_out.ber, best_out ? best_out->ber_out.ber : 0.0)) best_out = &r;
    if (better(best_in, r.ber_in.ber, best_in ? best_in->ber_in.ber : 0.0)) best_in = &r;
  }
  if (!best_out) {
    c.failed = true;
    c.best_log10_ber_out = c.best_log10_ber_in = c.log10_rb = c.log10_rb_at_power = std::nan("");
    c.argmin_power_dbm = std::nan("");
    return c;
  }
  c.best_log10_ber_out = std::log10(best_out->ber_out.ber);
  c.argmin_power_dbm = best_out->point.power_dbm;
  c.best_log10_ber_in = std::log10(best_in->ber_in.ber);
  c.log10_rb = rb_ratio(best_in->ber_in, best_out->ber_out);
  c.log10_rb_at_power = rb_ratio(best_out->ber_in, best_out->ber_out);
  c.floor_out = best_out->ber_out.at_floor;
  c.floor_in = best_in->ber_in.at_floor;
  return c;
}

MapGrid build_map(std::span<const ConfigResult> results, const TaskSpec& task, int n_v) {
  MapGrid m;
  m.task = task;
  m.n_v = n_v;
  std::vector<ConfigResult> rows;
  for (const auto& r : results)
    if (r.task == task && r.n_v == n_v) rows.push_back(r);
  for (const auto& r : rows) {
    m.bitrates_mbps.push_back(r.point.bitrate_mbps);
    m.detunings_ghz.push_back(r.point.detuning_ghz);
  }
  for (auto* axis : {&m.bitrates_mbps, &m.detunings_ghz}) {
    std::sort(axis->begin(), axis->end());
    axis->erase(std::unique(axis->begin(), axis->end()), axis->end());
  }
  for (double d : m.detunings_ghz) {
    for (double b : m.bitrates_mbps) {
      std::vector<ConfigResult> cell;
      for (const auto& r : rows)
        if (r.point.bitrate_mbps == b && r.point.detuning_ghz == d) cell.push_back(r);
      m.cells.push_back(best_over_power(cell));
    }
  }
  return m;
}

std::string_view results_csv_header() {
  return "task,n1,n2,n_v,bitrate_mbps,detuning_ghz,power_dbm,ber_out,errors_out,ntest,at_floor_out,ber_in,"
         "errors_in,at_floor_in,lambda_out,lambda_in,rb_log10,self_pulsing,seed";
}

std::string results_to_csv(std::span<const ConfigResult> results) {
  std::string out(results_csv_header());
  out += '\n';
  for (const auto& r : results) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.task.op), r.task.n1,
                       r.task.n2, r.n_v, r.point.bitrate_mbps, r.point.detuning_ghz, r.point.power_dbm, r.ber_out.ber,
                       r.ber_out.errors, r.ber_out.n_test, int(r.ber_out.at_floor), r.ber_in.ber, r.ber_in.errors,
                       int(r.ber_in.at_floor), r.lambda_out, r.lambda_in, r.failed ? std::nan("") : r.rb_log10(),
                       int(r.self_pulsing), r.point.seed);
  }
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> f;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    f.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return f;
}

template <class T>
T parse_number(std::string_view s, std::size_t line_no) {
  if (s == "nan" || s == "-nan") {
    if constexpr (std::is_floating_point_v<T>) return std::nan("");
  }
  T v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ConfigError(fmt::format("schema mismatch: line {}: bad number '{}'", line_no, s));
  return v;
}

}  // namespace

std::vector<ConfigResult> results_from_csv(std::string_view text) {
  std::vector<ConfigResult> out;
  std::size_t pos = 0, line_no = 0;
  bool header = true;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (header) {
      if (line != results_csv_header()) throw ConfigError("schema mismatch: unexpected results header");
      header = false;
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 19)
      throw ConfigError(fmt::format("schema mismatch: line {} has {} fields, expected 19", line_no, f.size()));
    ConfigResult r;
    r.task = TaskSpec::parse(fmt::format("{}:{}:{}", f[0], f[1], f[2]));
    r.n_v = parse_number<int>(f[3], line_no);
    r.point.bitrate_mbps = parse_number<double>(f[4], line_no);
    r.point.detuning_ghz = parse_number<double>(f[5], line_no);
    r.point.power_dbm = parse_number<double>(f[6], line_no);
    r.ber_out.ber = parse_number<double>(f[7], line_no);
    r.ber_out.errors = parse_number<std::size_t>(f[8], line_no);
    r.ber_out.n_test = r.ber_in.n_test = parse_number<std::size_t>(f[9], line_no);
    r.ber_out.at_floor = parse_number<int>(f[10], line_no) != 0;
    r.ber_in.ber = parse_number<double>(f[11], line_no);
    r.ber_in.errors = parse_number<std::size_t>(f[12], line_no);
    r.ber_in.at_floor = parse_number<int>(f[13], line_no) != 0;
    r.lambda_out = parse_number<double>(f[14], line_no);
    r.lambda_in = parse_number<double>(f[15], line_no);
    r.self_pulsing = parse_number<int>(f[17], line_no) != 0;
    r.point.seed = parse_number<std::uint64_t>(f[18], line_no);
    r.failed = std::isnan(r.ber_out.ber);
    if (r.failed) r.failure = "failed in the recorded run";
    out.push_back(std::move(r));
  }
  if (header) throw ConfigError("schema mismatch: empty file");
  return out;
}

void export_results_csv(const std::filesystem::path& path, std::span<const ConfigResult> results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << results_to_csv(results);
  if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

std::vector<ConfigResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return results_from_csv(buf.str());
}

std::string map_to_csv(const MapGrid& map) {
  std::string out =
      "task,n_v,bitrate_mbps,detuning_ghz,failed,best_log10_ber_out,argmin_power_dbm,best_log10_ber_in,log10_rb,"
      "log10_rb_at_power,floor_out,floor_in\n";
  const std::string task = map.task.to_string();
  for (const auto& c : map.cells)
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", task, map.n_v, c.bitrate_mbps, c.detuning_ghz,
                       int(c.failed), c.best_log10_ber_out, c.argmin_power_dbm, c.best_log10_ber_in, c.log10_rb,
                       c.log10_rb_at_power, int(c.floor_out), int(c.floor_in));
  return out;
}

}  // namespace ringrc
