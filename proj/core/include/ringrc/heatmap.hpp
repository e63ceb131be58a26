#pragma once

#include <string>
#include <string_view>

#include "ringrc/maps.hpp"

namespace ringrc {

enum class MapChannel { ber_out, power, rb };

std::string_view to_string(MapChannel c);
/// Accepts "ber_out", "power" or "rb"; throws ConfigError otherwise.
MapChannel parse_map_channel(std::string_view text);

/// SVG heatmap with a log-scaled bitrate axis and a linear detuning axis.
/// ber_out cells at the statistical floor carry a filled red dot; on the rb
/// channel hollow red circles mark the input floor and crosses the output
/// floor. Failed cells are hatched. Output is byte-deterministic. Throws
/// ConfigError for an empty map.
std::string render_heatmap_svg(const MapGrid& map, MapChannel channel);

}  // namespace ringrc
