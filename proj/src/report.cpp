#include "psim/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace psim {

namespace {

const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                               "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr size_t palette_len = sizeof(palette) / sizeof(palette[0]);

std::string g6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string coord(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range widen(Range r) {
  if (r.hi <= r.lo) r.hi = r.lo + 1.0;
  return r;
}

// Maps data space to a fixed plot rectangle.
struct Scale {
  Range x, y;
  static constexpr double px0 = 70, px1 = 620, py0 = 460, py1 = 60;
  double sx(double v) const { return px0 + (v - x.lo) / (x.hi - x.lo) * (px1 - px0); }
  double sy(double v) const { return py0 + (v - y.lo) / (y.hi - y.lo) * (py1 - py0); }
};

void append_chart_frame(std::string& svg, const std::string& title, const std::string& x_label,
                        const std::string& y_label, const std::string& desc_text) {
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"520\" "
         "viewBox=\"0 0 800 520\" font-family=\"sans-serif\">\n";
  svg += "<desc>" + xml_escape(desc_text) + "</desc>\n";
  svg += "<rect width=\"800\" height=\"520\" fill=\"white\"/>\n";
  svg += "<text x=\"345\" y=\"30\" text-anchor=\"middle\" font-size=\"16\">" +
         xml_escape(title) + "</text>\n";
  svg += "<text x=\"345\" y=\"505\" text-anchor=\"middle\" font-size=\"12\">" +
         xml_escape(x_label) + "</text>\n";
  svg += "<text x=\"18\" y=\"260\" text-anchor=\"middle\" font-size=\"12\" "
         "transform=\"rotate(-90 18 260)\">" +
         xml_escape(y_label) + "</text>\n";
}

void append_axes(std::string& svg, const Scale& sc) {
  svg += "<line x1=\"" + coord(Scale::px0) + "\" y1=\"" + coord(Scale::py0) + "\" x2=\"" +
         coord(Scale::px1) + "\" y2=\"" + coord(Scale::py0) + "\" stroke=\"black\"/>\n";
  svg += "<line x1=\"" + coord(Scale::px0) + "\" y1=\"" + coord(Scale::py0) + "\" x2=\"" +
         coord(Scale::px0) + "\" y2=\"" + coord(Scale::py1) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    double fx = sc.x.lo + (sc.x.hi - sc.x.lo) * i / 4.0;
    double fy = sc.y.lo + (sc.y.hi - sc.y.lo) * i / 4.0;
    std::string px = coord(sc.sx(fx)), py = coord(sc.sy(fy));
    svg += "<line x1=\"" + px + "\" y1=\"" + coord(Scale::py0) + "\" x2=\"" + px + "\" y2=\"" +
           coord(Scale::py0 + 5) + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + px + "\" y=\"" + coord(Scale::py0 + 20) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + g6(fx) + "</text>\n";
    svg += "<line x1=\"" + coord(Scale::px0 - 5) + "\" y1=\"" + py + "\" x2=\"" +
           coord(Scale::px0) + "\" y2=\"" + py + "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + coord(Scale::px0 - 9) + "\" y=\"" + coord(sc.sy(fy) + 4) +
           "\" text-anchor=\"end\" font-size=\"11\">" + g6(fy) + "</text>\n";
  }
}

void append_legend_entry(std::string& svg, size_t index, const std::string& color,
                         const std::string& label) {
  double y = 70.0 + 22.0 * static_cast<double>(index);
  svg += "<line x1=\"640\" y1=\"" + coord(y) + "\" x2=\"668\" y2=\"" + coord(y) +
         "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
  svg += "<text x=\"674\" y=\"" + coord(y + 4) + "\" font-size=\"12\">" + xml_escape(label) +
         "</text>\n";
}

}  // namespace

std::string curve_to_csv(const SpeedupCurve& curve, const std::string& config_echo) {
  std::string out = "M,t_cmt,t_tnf,t_update,speedup\n";
  for (const SpeedupRow& r : curve.rows) {
    out += std::to_string(r.workers) + "," + g6(r.t_cmt) + "," + g6(r.t_tnf) + "," +
           g6(r.t_update) + "," + g6(r.speedup) + "\n";
  }
  if (!config_echo.empty()) out += "# config: " + config_echo + "\n";
  return out;
}

std::string grid_to_csv(const HRhoGrid& grid, const ClusterConfig& cluster,
                        const std::string& config_echo) {
  std::string out = "h,rho,M,t_cmt,t_tnf,t_update,speedup\n";
  double cu = cluster.compute_per_update_s();
  for (const HRhoCell& cell : grid.cells) {
    const PhaseBreakdown& p = cell.breakdown;
    out += g6(cell.h) + "," + g6(cell.rho) + "," + std::to_string(cluster.workers) + "," +
           g6(p.t_cmt) + "," + g6(p.t_tnf) + "," + g6(p.t_update) + "," +
           g6(cu / p.t_update) + "\n";
  }
  if (!config_echo.empty()) out += "# config: " + config_echo + "\n";
  return out;
}

nlohmann::json to_json(const PhaseBreakdown& p) {
  return {{"local_compute_s", p.local_compute_s},
          {"worker_compress_s", p.worker_compress_s},
          {"push_transfer_s", p.push_transfer_s},
          {"server_decompress_s", p.server_decompress_s},
          {"aggregate_s", p.aggregate_s},
          {"server_compress_s", p.server_compress_s},
          {"broadcast_transfer_s", p.broadcast_transfer_s},
          {"worker_decompress_s", p.worker_decompress_s},
          {"t_cmt", p.t_cmt},
          {"t_tnf", p.t_tnf},
          {"t_update", p.t_update}};
}

nlohmann::json to_json(const SpeedupCurve& curve) {
  nlohmann::json rows = nlohmann::json::array();
  for (const SpeedupRow& r : curve.rows)
    rows.push_back({{"M", r.workers},
                    {"t_cmt", r.t_cmt},
                    {"t_tnf", r.t_tnf},
                    {"t_update", r.t_update},
                    {"speedup", r.speedup}});
  return {{"rows", rows}};
}

nlohmann::json to_json(const HRhoGrid& grid, const ClusterConfig& cluster) {
  nlohmann::json cells = nlohmann::json::array();
  double cu = cluster.compute_per_update_s();
  for (const HRhoCell& cell : grid.cells)
    cells.push_back({{"h", cell.h},
                     {"rho", cell.rho},
                     {"M", cluster.workers},
                     {"breakdown", to_json(cell.breakdown)},
                     {"speedup", cu / cell.breakdown.t_update}});
  return {{"h_list", grid.h_list}, {"rho_list", grid.rho_list}, {"cells", cells}};
}

nlohmann::json to_json(const CodecStats& stats) {
  return {{"codec", stats.codec},
          {"original_bytes", stats.original_bytes},
          {"encoded_bytes", stats.encoded_bytes},
          {"ratio", stats.ratio},
          {"compress_s", stats.compress_s},
          {"decompress_s", stats.decompress_s},
          {"max_abs_err", stats.max_abs_err}};
}

nlohmann::json to_json(const FrontierPoint& point) {
  return {{"rho", point.rho},
          {"h_max", point.h_max},
          {"target_factor", point.target_factor},
          {"feasible", point.feasible()}};
}

nlohmann::json to_json(const HarnessReport& report) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const RoundStats& r : report.rounds)
    rounds.push_back({{"round", r.round},
                      {"push_s", r.push_s},
                      {"aggregate_s", r.aggregate_s},
                      {"broadcast_s", r.broadcast_s},
                      {"end_to_end_s", r.end_to_end_s},
                      {"aggregate_abs_err", r.aggregate_abs_err},
                      {"aggregate_err_bound", r.aggregate_err_bound}});
  return {{"workers", report.workers},
          {"rounds_completed", report.rounds_completed},
          {"codec", report.codec},
          {"weight_bytes", report.weight_bytes},
          {"wire_bytes_per_push", report.wire_bytes_per_push},
          {"chi_bytes_per_s", report.chi_bytes_per_s},
          {"rounds", rounds},
          {"measured_transfer_s", report.measured_transfer_s},
          {"modeled_t_tnf_s", report.modeled_t_tnf_s},
          {"relative_error", report.relative_error},
          {"max_aggregate_err", report.max_aggregate_err},
          {"aggregate_err_bound", report.aggregate_err_bound}};
}

nlohmann::json to_json(const WorkerReport& report) {
  nlohmann::json rounds = nlohmann::json::array();
  for (const WorkerRoundStats& r : report.rounds)
    rounds.push_back({{"round", r.round},
                      {"compute_s", r.compute_s},
                      {"encode_s", r.encode_s},
                      {"push_s", r.push_s},
                      {"wait_s", r.wait_s},
                      {"decode_s", r.decode_s}});
  return {{"worker_id", report.worker_id}, {"rounds", rounds}};
}

std::string render_line_svg(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<SvgSeries>& series,
                            const std::string& desc_text) {
  if (series.empty()) throw ConfigError("an SVG chart needs at least one series");
  for (const SvgSeries& s : series)
    if (s.points.empty()) throw ConfigError("SVG series '" + s.label + "' is empty");

  Range xr{series[0].points[0][0], series[0].points[0][0]};
  Range yr{0.0, series[0].points[0][1]};
  for (const SvgSeries& s : series) {
    for (const auto& p : s.points) {
      xr.lo = std::min(xr.lo, p[0]);
      xr.hi = std::max(xr.hi, p[0]);
      yr.lo = std::min(yr.lo, p[1]);
      yr.hi = std::max(yr.hi, p[1]);
    }
  }
  Scale sc{widen(xr), widen(yr)};

  std::string svg;
  append_chart_frame(svg, title, x_label, y_label, desc_text);
  append_axes(svg, sc);
  for (size_t i = 0; i < series.size(); ++i) {
    const char* color = palette[i % palette_len];
    std::string pts;
    for (const auto& p : series[i].points)
      pts += coord(sc.sx(p[0])) + "," + coord(sc.sy(p[1])) + " ";
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    append_legend_entry(svg, i, color, series[i].label);
  }
  svg += "</svg>\n";
  return svg;
}

std::string render_stacked_bar_svg(const std::string& title, const std::string& y_label,
                                   const std::vector<std::string>& segment_labels,
                                   const std::vector<SvgBar>& bars,
                                   const std::string& desc_text) {
  if (bars.empty()) throw ConfigError("an SVG chart needs at least one bar");
  for (const SvgBar& b : bars)
    if (b.segments.size() != segment_labels.size())
      throw ConfigError("bar '" + b.label + "' does not match the segment labels");

  double max_total = 0.0;
  for (const SvgBar& b : bars) {
    double total = 0.0;
    for (double v : b.segments) {
      if (v < 0.0) throw ConfigError("bar segments must be non-negative");
      total += v;
    }
    max_total = std::max(max_total, total);
  }
  Scale sc{{0.0, static_cast<double>(bars.size())}, widen({0.0, max_total})};

  std::string svg;
  append_chart_frame(svg, title, "", y_label, desc_text);
  append_axes(svg, sc);

  double slot = (Scale::px1 - Scale::px0) / static_cast<double>(bars.size());
  double width = slot * 0.6;
  for (size_t b = 0; b < bars.size(); ++b) {
    double x = Scale::px0 + slot * (static_cast<double>(b) + 0.2);
    double acc = 0.0;
    for (size_t s = 0; s < bars[b].segments.size(); ++s) {
      double lo = acc;
      acc += bars[b].segments[s];
      double y_top = sc.sy(acc), y_bot = sc.sy(lo);
      if (y_bot - y_top <= 0.0) continue;  // zero-height segment
      svg += "<rect x=\"" + coord(x) + "\" y=\"" + coord(y_top) + "\" width=\"" + coord(width) +
             "\" height=\"" + coord(y_bot - y_top) + "\" fill=\"" +
             palette[s % palette_len] + "\"/>\n";
    }
    svg += "<text x=\"" + coord(x + width / 2) + "\" y=\"" + coord(Scale::py0 + 20) +
           "\" text-anchor=\"middle\" font-size=\"11\">" + xml_escape(bars[b].label) +
           "</text>\n";
  }
  for (size_t s = 0; s < segment_labels.size(); ++s)
    append_legend_entry(svg, s, palette[s % palette_len], segment_labels[s]);
  svg += "</svg>\n";
  return svg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out.good()) throw IoError("failed while writing '" + path + "'");
}

}  // namespace psim
