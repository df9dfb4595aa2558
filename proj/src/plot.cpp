// Minimal SVG line charts for the metrics CSV: x is the sweep value, one
// polyline per policy through the seed means.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "ecc/harness.hpp"

namespace ecc {

namespace {

struct MetricInfo {
  const char* key;
  const char* label;
  double MetricsRow::*field;
};

const MetricInfo kMetrics[] = {
    {"mean_delay_s", "Mean delay (s)", &MetricsRow::mean_delay_s},
    {"drop_rate_pct", "Drop rate (%)", &MetricsRow::drop_rate_pct},
    {"total_energy_j", "Energy per episode (J)", &MetricsRow::total_energy_j},
    {"frac_local", "Local decisions (fraction)", &MetricsRow::frac_local},
    {"frac_horizontal", "Horizontal decisions (fraction)", &MetricsRow::frac_horizontal},
    {"frac_vertical", "Vertical decisions (fraction)", &MetricsRow::frac_vertical},
};

std::string axis_label(const std::string& axis) {
  if (axis == "arrival_prob") return "Arrival probability (per slot)";
  if (axis == "n_agents") return "Edge agents (count)";
  if (axis == "cpu") return "Edge CPU (GHz)";
  if (axis == "timeout") return "Timeout (slots)";
  if (axis == "rate_h") return "Horizontal rate (Mbps)";
  if (axis == "weights") return "Delay weight w_d (unitless)";
  return axis;
}

const char* kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

const MetricInfo& metric_info(const std::string& key) {
  for (const auto& m : kMetrics)
    if (key == m.key) return m;
  throw HarnessError("unknown metric " + key);
}

}  // namespace

std::string svg_line_chart(const std::vector<MetricsRow>& rows, const std::string& metric) {
  if (rows.empty()) throw HarnessError("no metrics to plot");
  const MetricInfo& info = metric_info(metric);

  // policy -> x -> values over seeds, policies in first-seen order
  std::vector<std::string> order;
  std::map<std::string, std::map<double, std::vector<double>>> series;
  for (const auto& r : rows) {
    if (!series.count(r.policy)) order.push_back(r.policy);
    series[r.policy][r.sweep_value].push_back(r.*(info.field));
  }
  double x0 = INFINITY, x1 = -INFINITY, y0 = 0.0, y1 = -INFINITY;
  std::map<std::string, std::vector<std::pair<double, double>>> points;
  for (const auto& [policy, by_x] : series) {
    for (const auto& [x, ys] : by_x) {
      double m = 0.0;
      for (double y : ys) m += y;
      m /= ys.size();
      points[policy].push_back({x, m});
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, m);
      y1 = std::max(y1, m);
    }
  }
  if (x1 == x0) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 <= y0) y1 = y0 + 1.0;
  y1 += 0.05 * (y1 - y0);

  const double W = 640, H = 420, L = 70, R = 170, T = 30, B = 60;
  const double pw = W - L - R, ph = H - T - B;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(W) + "\" height=\"" + num(H) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<line x1=\"" + num(L) + "\" y1=\"" + num(T + ph) + "\" x2=\"" + num(L + pw) + "\" y2=\"" + num(T + ph) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(L) + "\" y1=\"" + num(T) + "\" x2=\"" + num(L) + "\" y2=\"" + num(T + ph) +
       "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4.0, yv = y0 + (y1 - y0) * i / 4.0;
    s += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(T + ph + 16) + "\" text-anchor=\"middle\">" + num(xv) +
         "</text>\n";
    s += "<text x=\"" + num(L - 6) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">" + num(yv) +
         "</text>\n";
  }
  s += "<text class=\"xlabel\" x=\"" + num(L + pw / 2) + "\" y=\"" + num(H - 18) + "\" text-anchor=\"middle\">" +
       axis_label(rows.front().sweep_axis) + "</text>\n";
  s += "<text class=\"ylabel\" x=\"18\" y=\"" + num(T + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
       num(T + ph / 2) + ")\">" + info.label + "</text>\n";

  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto& pts = points[order[i]];
    const char* colour = kColours[i % 10];
    std::string poly;
    for (const auto& [x, y] : pts) poly += num(sx(x)) + "," + num(sy(y)) + " ";
    s += "<polyline class=\"series\" data-policy=\"" + order[i] + "\" fill=\"none\" stroke=\"" + colour +
         "\" stroke-width=\"2\" points=\"" + poly + "\"/>\n";
    for (const auto& [x, y] : pts)
      s += "<circle class=\"point\" cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(y)) + "\" r=\"3\" fill=\"" + colour +
           "\"/>\n";
    const double ly = T + 14 + 18 * static_cast<double>(i);
    s += "<rect x=\"" + num(L + pw + 14) + "\" y=\"" + num(ly - 9) + "\" width=\"12\" height=\"3\" fill=\"" + colour +
         "\"/>\n";
    s += "<text x=\"" + num(L + pw + 32) + "\" y=\"" + num(ly - 4) + "\">" + order[i] + "</text>\n";
  }
  s += "</svg>\n";
  return s;
}

std::vector<std::string> write_plots(const std::vector<MetricsRow>& rows, const std::string& out_dir) {
  if (rows.empty()) throw HarnessError("metrics CSV has no rows; nothing to plot");
  std::vector<std::pair<std::string, std::string>> charts;
  for (const auto& m : kMetrics) charts.push_back({m.key, svg_line_chart(rows, m.key)});
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) throw HarnessError("cannot create output directory " + out_dir);
  std::vector<std::string> files;
  for (const auto& [key, svg] : charts) {
    const auto p = std::filesystem::path(out_dir) / (key + ".svg");
    std::ofstream out(p);
    if (!out) throw HarnessError("cannot write " + p.string());
    out << svg;
    files.push_back(p.string());
  }
  return files;
}

}  // namespace ecc
