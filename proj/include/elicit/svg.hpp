#pragma once

#include <optional>
#include <string>
#include <vector>

namespace elicit::svg {

// One plotted series: a polyline by default, circles when points_only.
struct Series {
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f77b4";
  std::string label;
  bool points_only = false;
};

// Standalone single-panel SVG: axes, ticks, labels, and the given series.
std::string line_plot(const std::vector<Series>& series,
                      const std::string& title, const std::string& xlabel,
                      const std::string& ylabel, int width = 720,
                      int height = 480);

// Vertical bars at the given centers, plus an optional horizontal reference
// line (used for the calibration z-threshold).
std::string bar_chart(const std::vector<double>& centers,
                      const std::vector<double>& values,
                      const std::string& title, const std::string& xlabel,
                      const std::string& ylabel,
                      std::optional<double> reference = std::nullopt,
                      int width = 720, int height = 480);

}  // namespace elicit::svg
