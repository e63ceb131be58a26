#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ringrc/sweep.hpp"

namespace ringrc {

inline constexpr std::string_view tool_version = "0.1.0";

struct RunConfig {
  ExperimentSettings settings;
  SweepGrid grid = SweepGrid::desk();
  /// Re-run the self-pulsing calibration on the [ring] values before use.
  bool calibrate = false;
};

/// INI text with sections [ring], [modulator], [detector], [solver],
/// [sweep] and [readout]. Missing keys keep their defaults; unknown
/// sections or keys are errors. Lists are comma separated; tasks use the
/// OP:n1:n2 form. Throws ConfigError with the offending key.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Canonical text listing every key; parse_config(to_config_text(c)) == c.
std::string to_config_text(const RunConfig& c);

/// FNV-1a over the canonical text of the grid and the experiment settings.
std::uint64_t grid_hash(const RunConfig& c);

struct RunManifest {
  std::string command;            // subcommand name
  std::vector<std::string> args;  // subcommand flags, without config and output paths
  std::string tool_version{ringrc::tool_version};
  std::string config_text;
  std::string grid_hash;  // 16 hex digits
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::uint64_t> seeds;
  unsigned prbs_seed = 1;
  unsigned workers = 1;
  std::size_t rows = 0;
  std::size_t failed_rows = 0;
};

std::string manifest_to_json(const RunManifest& m);
/// Throws ConfigError on malformed JSON or missing fields.
RunManifest manifest_from_json(std::string_view text);

std::string utc_timestamp();
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace ringrc
