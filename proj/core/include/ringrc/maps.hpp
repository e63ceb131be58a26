#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ringrc/sweep.hpp"

namespace ringrc {

/// One (bitrate, detuning) cell of a parameter map, reduced over power.
struct MapCell {
  double bitrate_mbps = 0.0;
  double detuning_ghz = 0.0;
  bool failed = false;               // every power failed
  double best_log10_ber_out = 0.0;
  double argmin_power_dbm = 0.0;     // lowest power reaching the best ber_out
  double best_log10_ber_in = 0.0;    // input branch optimized over power on its own
  double log10_rb = 0.0;             // best ber_in against best ber_out
  double log10_rb_at_power = 0.0;    // ber_in taken at argmin_power_dbm
  bool floor_out = false;
  bool floor_in = false;
};

struct MapGrid {
  TaskSpec task;
  int n_v = 0;
  std::vector<double> bitrates_mbps;  // ascending
  std::vector<double> detunings_ghz;  // ascending
  std::vector<MapCell> cells;         // detuning-major: cells[d * bitrates + b]

  const MapCell& at(std::size_t bitrate_index, std::size_t detuning_index) const {
    return cells[detuning_index * bitrates_mbps.size() + bitrate_index];
  }
  bool empty() const { return cells.empty(); }
};

/// log10(ber_in) - log10(ber_out); positive when the ring helps.
double rb_ratio(const Evaluation& ber_in, const Evaluation& ber_out);

/// Reduces the results of one task/bitrate/detuning over power. Failed rows
/// are skipped; ties resolve to the lowest power. Throws ConfigError when
/// `results` is empty.
MapCell best_over_power(std::span<const ConfigResult> results);

/// Builds the bitrate x detuning map of one task and node count.
MapGrid build_map(std::span<const ConfigResult> results, const TaskSpec& task, int n_v);

/// Header of the results table.
std::string_view results_csv_header();
std::string results_to_csv(std::span<const ConfigResult> results);
/// Throws ConfigError (schema mismatch) on a wrong header or malformed row.
std::vector<ConfigResult> results_from_csv(std::string_view text);

void export_results_csv(const std::filesystem::path& path, std::span<const ConfigResult> results);
std::vector<ConfigResult> read_results_csv(const std::filesystem::path& path);

/// One row per cell with both RB variants.
std::string map_to_csv(const MapGrid& map);

}  // namespace ringrc
