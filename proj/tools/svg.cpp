#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "commands.hpp"

namespace linebots::cli {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#2ca02c", "#9467bd", "#8c564b",
                                    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
                                    "#ff7f0e"};

std::string Fixed(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

}  // namespace

std::vector<std::size_t> downsample(std::size_t count, std::size_t max_points) {
  std::vector<std::size_t> out;
  if (count == 0) return out;
  if (count <= max_points || max_points < 2) {
    if (count <= max_points) {
      for (std::size_t i = 0; i < count; ++i) out.push_back(i);
    } else {
      out = {0, count - 1};
    }
    return out;
  }
  const double stride = static_cast<double>(count - 1) /
                        static_cast<double>(max_points - 1);
  for (std::size_t k = 0; k < max_points; ++k) {
    const auto i = static_cast<std::size_t>(std::llround(stride * static_cast<double>(k)));
    if (out.empty() || out.back() != i) out.push_back(std::min(i, count - 1));
  }
  out.back() = count - 1;
  return out;
}

std::string render_svg(const Trace& trace,
                       const std::optional<std::map<RobotId, double>>& limits,
                       const PlotOptions& options) {
  const std::size_t count = trace.configurations.size();
  double lo = trace.initial().position(0);
  double hi = lo;
  for (const Configuration& c : trace.configurations) {
    for (const Robot& r : c.robots()) {
      lo = std::min(lo, r.position);
      hi = std::max(hi, r.position);
    }
  }
  if (limits) {
    for (const auto& [id, x] : *limits) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (hi - lo <= 0) {
    lo -= 0.5;
    hi += 0.5;
  }

  const double margin = 40;
  const double w = options.width - 2 * margin;
  const double h = options.height - 2 * margin;
  const double t_max = count > 1 ? static_cast<double>(count - 1) : 1.0;
  auto px = [&](double t) { return margin + w * t / t_max; };
  auto py = [&](double x) { return margin + h * (1 - (x - lo) / (hi - lo)); };

  // Samples per robot id, in time order.
  const std::size_t budget = std::max<std::size_t>(options.max_points, 2);
  const auto times = downsample(count, budget - 1);
  std::map<RobotId, std::vector<std::pair<std::size_t, double>>> series;
  std::map<RobotId, std::pair<std::size_t, double>> last_seen;
  std::map<RobotId, bool> faulty;
  std::size_t next_sample = 0;
  for (std::size_t t = 0; t < count; ++t) {
    const bool sampled = next_sample < times.size() && times[next_sample] == t;
    if (sampled) ++next_sample;
    for (const Robot& r : trace.configurations[t].robots()) {
      last_seen[r.id] = {t, r.position};
      faulty[r.id] = r.faulty;
      if (sampled) series[r.id].push_back({t, r.position});
    }
  }
  for (const auto& [id, seen] : last_seen) {
    auto& s = series[id];
    if (s.empty() || s.back().first != seen.first) s.push_back(seen);
  }

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 "
      << options.width << ' ' << options.height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n"
      << "<text x=\"" << Fixed(margin) << "\" y=\"" << Fixed(options.height - 12)
      << "\">t = 0</text>\n"
      << "<text x=\"" << Fixed(margin + w) << "\" y=\""
      << Fixed(options.height - 12) << "\" text-anchor=\"end\">t = "
      << count - 1 << "</text>\n"
      << "<text x=\"4\" y=\"" << Fixed(py(hi) + 4) << "\">"
      << Fixed(hi) << "</text>\n"
      << "<text x=\"4\" y=\"" << Fixed(py(lo) + 4) << "\">"
      << Fixed(lo) << "</text>\n"
      << "</g>\n";

  for (const Robot& r : trace.initial().robots()) {
    if (!r.faulty) continue;
    svg << "<line class=\"fault\" x1=\"" << Fixed(px(0)) << "\" y1=\""
        << Fixed(py(r.position)) << "\" x2=\"" << Fixed(px(t_max))
        << "\" y2=\"" << Fixed(py(r.position))
        << "\" stroke=\"#d62728\" stroke-width=\"1\" opacity=\"0.5\"/>\n";
  }
  if (limits) {
    for (const auto& [id, x] : *limits) {
      svg << "<line class=\"limit\" data-id=\"" << id << "\" x1=\""
          << Fixed(px(0)) << "\" y1=\"" << Fixed(py(x)) << "\" x2=\""
          << Fixed(px(t_max)) << "\" y2=\"" << Fixed(py(x))
          << "\" stroke=\"#555\" stroke-width=\"0.8\" "
             "stroke-dasharray=\"6 4\"/>\n";
    }
  }
  std::size_t color = 0;
  for (const auto& [id, points] : series) {
    const char* stroke =
        faulty[id] ? "#d62728" : kPalette[color++ % std::size(kPalette)];
    svg << "<polyline class=\"robot\" data-id=\"" << id
        << "\" fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"1.2\" points=\"";
    for (std::size_t k = 0; k < points.size(); ++k) {
      if (k) svg << ' ';
      svg << Fixed(px(static_cast<double>(points[k].first))) << ','
          << Fixed(py(points[k].second));
    }
    svg << "\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace linebots::cli
