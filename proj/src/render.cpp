#include "bohmsteer/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>

#include "bohmsteer/error.hpp"

namespace bohmsteer {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kMargin = 60.0;

struct Bounds {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  double map(double v, double out_lo, double out_hi) const {
    const double span = hi > lo ? hi - lo : 1.0;
    return out_lo + (v - lo) / span * (out_hi - out_lo);
  }
};

std::string num(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.2f", v);
  return buffer;
}

std::string label(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.4g", v);
  return buffer;
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
         "<text x=\"" + num(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\">" + title + "</text>\n";
}

std::string axes(const Bounds& z, const Bounds& x) {
  std::string s = "<rect x=\"" + num(kMargin) + "\" y=\"" + num(kMargin) + "\" width=\"" + num(kWidth - 2 * kMargin) +
                  "\" height=\"" + num(kHeight - 2 * kMargin) + "\" fill=\"none\" stroke=\"black\"/>\n";
  s += "<text x=\"" + num(kMargin) + "\" y=\"" + num(kHeight - kMargin + 18) + "\">" + label(z.lo) + "</text>\n";
  s += "<text x=\"" + num(kWidth - kMargin) + "\" y=\"" + num(kHeight - kMargin + 18) + "\" text-anchor=\"end\">" +
       label(z.hi) + "</text>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"" + num(kHeight - 15) + "\" text-anchor=\"middle\">z (m)</text>\n";
  s += "<text x=\"" + num(kMargin - 5) + "\" y=\"" + num(kMargin + 4) + "\" text-anchor=\"end\">" + label(x.hi) +
       "</text>\n";
  s += "<text x=\"" + num(kMargin - 5) + "\" y=\"" + num(kHeight - kMargin) + "\" text-anchor=\"end\">" +
       label(x.lo) + "</text>\n";
  s += "<text x=\"15\" y=\"" + num(kHeight / 2) + "\">x (m)</text>\n";
  return s;
}

const char* palette(std::size_t i) {
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return colours[i % 8];
}

}  // namespace

std::string render_trajectories_svg(const std::vector<TrajectoryRow>& rows) {
  if (rows.empty()) fail(ErrorKind::InvalidArgument, "nothing to render");
  Bounds z, x;
  for (const auto& r : rows) {
    z.add(r.z);
    x.add(r.x);
  }
  x.add(0.0);
  const auto px = [&](double zv) { return z.map(zv, kMargin, kWidth - kMargin); };
  const auto py = [&](double xv) { return x.map(xv, kHeight - kMargin, kMargin); };

  std::map<std::pair<double, int>, std::size_t> groups;  // (theta, outcome) -> colour
  const auto group_of = [&](const TrajectoryRow& r) {
    const auto key = std::make_pair(r.theta_deg.value_or(-1.0), r.outcome ? static_cast<int>(*r.outcome) : -1);
    return groups.emplace(key, groups.size()).first->second;
  };

  std::string svg = header("trajectories") + axes(z, x);
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(py(0.0)) + "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" +
         num(py(0.0)) + "\" stroke=\"grey\" stroke-dasharray=\"6,4\"/>\n";

  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    std::string points;
    while (j < rows.size() && rows[j].trajectory_id == rows[i].trajectory_id) {
      points += num(px(rows[j].z)) + "," + num(py(rows[j].x)) + " ";
      ++j;
    }
    svg += "<polyline fill=\"none\" stroke-width=\"1\" stroke=\"" + std::string(palette(group_of(rows[i]))) +
           "\" points=\"" + points + "\"/>\n";
    i = j;
  }
  return svg + "</svg>\n";
}

std::string render_map_svg(const std::vector<MapRow>& rows) {
  if (rows.empty()) fail(ErrorKind::InvalidArgument, "nothing to render");
  std::set<double> zs, xs;
  double vmax = 0.0;
  for (const auto& r : rows) {
    zs.insert(r.z);
    xs.insert(r.x);
    if (r.value) vmax = std::max(vmax, std::abs(*r.value));
  }
  Bounds z, x;
  z.add(*zs.begin());
  z.add(*zs.rbegin());
  x.add(*xs.begin());
  x.add(*xs.rbegin());
  const double cell_w = (kWidth - 2 * kMargin) / static_cast<double>(zs.size());
  const double cell_h = (kHeight - 2 * kMargin) / static_cast<double>(xs.size());
  const std::vector<double> zv(zs.begin(), zs.end());
  const std::vector<double> xv(xs.begin(), xs.end());

  std::string svg = header("scale +-" + label(vmax));
  for (const auto& r : rows) {
    const auto iz = std::lower_bound(zv.begin(), zv.end(), r.z) - zv.begin();
    const auto ix = std::lower_bound(xv.begin(), xv.end(), r.x) - xv.begin();
    std::string fill = "#bbbbbb";
    if (r.value) {
      const double t = vmax > 0.0 ? std::clamp(*r.value / vmax, -1.0, 1.0) : 0.0;
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(t))));
      char colour[8];
      if (t >= 0.0)
        std::snprintf(colour, sizeof colour, "#ff%02x%02x", fade, fade);
      else
        std::snprintf(colour, sizeof colour, "#%02x%02xff", fade, fade);
      fill = colour;
    }
    const double left = kMargin + static_cast<double>(iz) * cell_w;
    const double top = kHeight - kMargin - static_cast<double>(ix + 1) * cell_h;
    svg += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(cell_w + 0.5) + "\" height=\"" +
           num(cell_h + 0.5) + "\" fill=\"" + fill + "\"/>\n";
  }
  svg += axes(z, x);
  const double mid = x.map(0.0, kHeight - kMargin, kMargin);
  svg += "<line x1=\"" + num(kMargin) + "\" y1=\"" + num(mid) + "\" x2=\"" + num(kWidth - kMargin) + "\" y2=\"" +
         num(mid) + "\" stroke=\"black\" stroke-dasharray=\"6,4\"/>\n";
  return svg + "</svg>\n";
}

}  // namespace bohmsteer
