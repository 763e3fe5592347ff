#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace asymkit::svg {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

enum class Style { lines, markers };

/// Minimal standalone SVG chart with axes, ticks and a legend. Output is a
/// pure function of the inputs.
std::string plot(const std::vector<Series>& series, std::string_view title, std::string_view x_label,
                  std::string_view y_label, Style style = Style::lines);

}  // namespace asymkit::svg
