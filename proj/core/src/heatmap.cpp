#include "ringrc/heatmap.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

#include "ringrc/errors.hpp"

namespace ringrc {

std::string_view to_string(MapChannel c) {
  switch (c) {
    case MapChannel::ber_out: return "ber_out";
    case MapChannel::power: return "power";
    case MapChannel::rb: return "rb";
  }
  return "ber_out";
}

MapChannel parse_map_channel(std::string_view text) {
  if (text == "ber_out") return MapChannel::ber_out;
  if (text == "power") return MapChannel::power;
  if (text == "rb") return MapChannel::rb;
  throw ConfigError(fmt::format("unknown channel '{}' (expected ber_out, power or rb)", text));
}

namespace {

struct Rgb {
  double r, g, b;
};

Rgb mix(Rgb a, Rgb b, double t) { return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t}; }

std::string hex(Rgb c) {
  auto q = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  return fmt::format("#{:02x}{:02x}{:02x}", q(c.r), q(c.g), q(c.b));
}

Rgb viridis(double t) {
  static constexpr std::array<Rgb, 5> stops{{{0.267, 0.005, 0.329},
                                             {0.231, 0.322, 0.545},
                                             {0.129, 0.569, 0.549},
                                             {0.369, 0.788, 0.384},
                                             {0.992, 0.906, 0.145}}};
  t = std::clamp(t, 0.0, 1.0) * (stops.size() - 1);
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(t), stops.size() - 2);
  return mix(stops[i], stops[i + 1], t - static_cast<double>(i));
}

struct Scale {
  MapChannel channel;
  double lo, hi;

  Rgb color(double v) const {
    if (channel == MapChannel::rb) {
      // No gain is black fading to white for losses; gains run blue to yellow.
      if (v > 0.0) return mix({0.13, 0.25, 1.0}, {1.0, 0.88, 0.0}, hi > 0.0 ? v / hi : 1.0);
      return mix({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, lo < 0.0 ? v / lo : 0.0);
    }
    return viridis(hi > lo ? (v - lo) / (hi - lo) : 0.5);
  }
};

double cell_value(const MapCell& c, MapChannel ch) {
  switch (ch) {
    case MapChannel::ber_out: return c.best_log10_ber_out;
    case MapChannel::power: return c.argmin_power_dbm;
    case MapChannel::rb: return c.log10_rb;
  }
  return 0.0;
}

std::string_view channel_label(MapChannel ch) {
  switch (ch) {
    case MapChannel::ber_out: return "log10 BER out (best over power)";
    case MapChannel::power: return "input power at best BER (dBm)";
    case MapChannel::rb: return "log10 RB";
  }
  return "";
}

// Cell edges between neighbouring axis values; `log_axis` uses geometric midpoints.
std::vector<double> edges(const std::vector<double>& v, bool log_axis) {
  std::vector<double> t(v);
  if (log_axis)
    for (double& x : t) x = std::log10(x);
  std::vector<double> e(t.size() + 1);
  const double half = t.size() > 1 ? 0.0 : (log_axis ? 0.15 : 2.5);
  for (std::size_t i = 1; i < t.size(); ++i) e[i] = 0.5 * (t[i - 1] + t[i]);
  e.front() = t.size() > 1 ? t[0] - (e[1] - t[0]) : t[0] - half;
  e.back() = t.size() > 1 ? t.back() + (t.back() - e[t.size() - 1]) : t.back() + half;
  return e;
}

std::string num(double v) { return fmt::format("{:.2f}", v); }

std::string axis_label(double v) {
  if (v == std::round(v)) return fmt::format("{:.0f}", v);
  return fmt::format("{:g}", v);
}

}  // namespace

std::string render_heatmap_svg(const MapGrid& map, MapChannel channel) {
  if (map.empty() || map.bitrates_mbps.empty() || map.detunings_ghz.empty())
    throw ConfigError("cannot render an empty map");

  constexpr double width = 720, height = 420, x0 = 80, y0 = 50, pw = 480, ph = 300;
  constexpr double legend_x = 600, legend_w = 20;

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (const auto& c : map.cells) {
    if (c.failed) continue;
    const double v = cell_value(c, channel);
    if (!std::isfinite(v)) continue;
    lo = any ? std::min(lo, v) : v;
    hi = any ? std::max(hi, v) : v;
    any = true;
  }
  if (channel == MapChannel::rb) {
    lo = std::min(lo, 0.0);
    hi = std::max(hi, 0.0);
  } else if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const Scale scale{channel, lo, hi};

  const auto xe = edges(map.bitrates_mbps, true);
  const auto ye = edges(map.detunings_ghz, false);
  auto px = [&](double t) { return x0 + (t - xe.front()) / (xe.back() - xe.front()) * pw; };
  auto py = [&](double t) { return y0 + ph - (t - ye.front()) / (ye.back() - ye.front()) * ph; };

  std::string s;
  s += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n",
      width, height, width, height);
  s += "<defs><pattern id=\"hatch\" width=\"6\" height=\"6\" patternUnits=\"userSpaceOnUse\" "
       "patternTransform=\"rotate(45)\"><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#808080\" "
       "stroke-width=\"2\"/></pattern></defs>\n";
  s += fmt::format("<rect width=\"{:.0f}\" height=\"{:.0f}\" fill=\"#ffffff\"/>\n", width, height);
  s += fmt::format("<text x=\"{}\" y=\"24\" font-size=\"14\">{} N_v={}: {}</text>\n", num(x0), map.task.to_string(),
                   map.n_v, channel_label(channel));

  s += "<g class=\"cells\">\n";
  for (std::size_t d = 0; d < map.detunings_ghz.size(); ++d) {
    for (std::size_t b = 0; b < map.bitrates_mbps.size(); ++b) {
      const auto& c = map.at(b, d);
      const double left = px(xe[b]), right = px(xe[b + 1]);
      const double top = py(ye[d + 1]), bottom = py(ye[d]);
      const std::string geom =
          fmt::format("x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"", num(left), num(top), num(right - left),
                      num(bottom - top));
      const double v = cell_value(c, channel);
      if (c.failed || !std::isfinite(v)) {
        s += fmt::format("<rect class=\"failed\" {} fill=\"#ffffff\" stroke=\"#808080\"/>\n", geom);
        s += fmt::format("<rect {} fill=\"url(#hatch)\"/>\n", geom);
        continue;
      }
      s += fmt::format("<rect class=\"cell\" {} fill=\"{}\"><title>{} Mbps, {} GHz: {}</title></rect>\n", geom,
                       hex(scale.color(v)), axis_label(c.bitrate_mbps), axis_label(c.detuning_ghz), num(v));
      const double cx = 0.5 * (left + right), cy = 0.5 * (top + bottom);
      const double r = std::min(6.0, 0.18 * std::min(right - left, bottom - top));
      if (channel == MapChannel::ber_out && c.floor_out) {
        s += fmt::format("<circle class=\"floor-out\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"#e00000\"/>\n", num(cx),
                         num(cy), num(r));
      } else if (channel == MapChannel::rb) {
        if (c.floor_in)
          s += fmt::format(
              "<circle class=\"floor-in\" cx=\"{}\" cy=\"{}\" r=\"{}\" fill=\"none\" stroke=\"#e00000\" "
              "stroke-width=\"1.5\"/>\n",
              num(cx), num(cy), num(r));
        if (c.floor_out)
          s += fmt::format(
              "<path class=\"floor-out\" d=\"M{} {}L{} {}M{} {}L{} {}\" stroke=\"#e00000\" stroke-width=\"1.5\"/>\n",
              num(cx - r), num(cy - r), num(cx + r), num(cy + r), num(cx - r), num(cy + r), num(cx + r), num(cy - r));
      }
    }
  }
  s += "</g>\n";

  // Axes.
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n", num(x0),
                   num(y0), num(pw), num(ph));
  for (std::size_t b = 0; b < map.bitrates_mbps.size(); ++b) {
    const double x = px(std::log10(map.bitrates_mbps[b]));
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#000000\"/>\n", num(x), num(y0 + ph),
                     num(y0 + ph + 4));
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(x), num(y0 + ph + 16),
                     axis_label(map.bitrates_mbps[b]));
  }
  for (std::size_t d = 0; d < map.detunings_ghz.size(); ++d) {
    const double y = py(map.detunings_ghz[d]);
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#000000\"/>\n", num(x0 - 4), num(y),
                     num(x0));
    s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(x0 - 7), num(y + 4),
                     axis_label(map.detunings_ghz[d]));
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">bitrate (Mbps, log scale)</text>\n",
                   num(x0 + pw / 2), num(y0 + ph + 36));
  s += fmt::format(
      "<text x=\"{0}\" y=\"{1}\" text-anchor=\"middle\" transform=\"rotate(-90 {0} {1})\">detuning (GHz)</text>\n",
      num(x0 - 45), num(y0 + ph / 2));

  // Legend.
  constexpr int steps = 48;
  s += "<g class=\"legend\">\n";
  for (int i = 0; i < steps; ++i) {
    const double v = lo + (hi - lo) * (i + 0.5) / steps;
    const double y = y0 + ph - ph * (i + 1) / steps;
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", num(legend_x), num(y),
                     num(legend_w), num(ph / steps + 0.5), hex(scale.color(v)));
  }
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n",
                   num(legend_x), num(y0), num(legend_w), num(ph));
  for (int i = 0; i <= 4; ++i) {
    const double v = lo + (hi - lo) * i / 4.0;
    const double y = y0 + ph - ph * i / 4.0;
    s += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(legend_x + legend_w + 4), num(y + 4), num(v));
  }
  s += "</g>\n</svg>\n";
  return s;
}

}  // namespace ringrc
