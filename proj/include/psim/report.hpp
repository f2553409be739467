#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "psim/bench.hpp"
#include "psim/net_harness.hpp"
#include "psim/simulator.hpp"
#include "psim/types.hpp"

namespace psim {

// CSV emission. Values use 6 significant digits; headers are fixed:
//   curves: M,t_cmt,t_tnf,t_update,speedup
//   grids:  h,rho,M,t_cmt,t_tnf,t_update,speedup
// A non-empty config_echo (compact JSON) is appended as a trailing
// "# config: ..." comment so the file can reproduce itself.
std::string curve_to_csv(const SpeedupCurve& curve, const std::string& config_echo = "");
std::string grid_to_csv(const HRhoGrid& grid, const ClusterConfig& cluster,
                        const std::string& config_echo = "");

nlohmann::json to_json(const PhaseBreakdown& p);
nlohmann::json to_json(const SpeedupCurve& curve);
nlohmann::json to_json(const HRhoGrid& grid, const ClusterConfig& cluster);
nlohmann::json to_json(const CodecStats& stats);
nlohmann::json to_json(const FrontierPoint& point);
nlohmann::json to_json(const HarnessReport& report);
nlohmann::json to_json(const WorkerReport& report);

// Minimal deterministic SVG charts: fixed canvas, fixed palette, no
// timestamps. desc_text (typically the resolved config) is embedded in a
// <desc> element so a chart can reproduce its own run.
struct SvgSeries {
  std::string label;
  std::vector<std::array<double, 2>> points;  // (x, y)
};

std::string render_line_svg(const std::string& title, const std::string& x_label,
                            const std::string& y_label, const std::vector<SvgSeries>& series,
                            const std::string& desc_text);

struct SvgBar {
  std::string label;
  std::vector<double> segments;  // stacked bottom-up, one per segment label
};

std::string render_stacked_bar_svg(const std::string& title, const std::string& y_label,
                                   const std::vector<std::string>& segment_labels,
                                   const std::vector<SvgBar>& bars,
                                   const std::string& desc_text);

void write_file(const std::string& path, const std::string& content);

}  // namespace psim
