#pragma once

#include <string>
#include <vector>

namespace simplexbo {

struct AggregateSeries {
  std::string method;
  std::vector<int> iter;
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
};

/// Reads an aggregate CSV. The band is the first and last quantile column,
/// the line the "median" column. Throws std::runtime_error on malformed or
/// empty input.
std::vector<AggregateSeries> parse_aggregate_csv(const std::string& text);

/// Self-contained SVG: median log10 regret per method against iteration with
/// a shaded interquartile band and a legend.
std::string render_svg(const std::vector<AggregateSeries>& series, const std::string& title = "");

/// Reads `aggregate_path` and writes the SVG to `svg_path`.
void plot_aggregate(const std::string& aggregate_path, const std::string& svg_path, const std::string& title = "");

}  // namespace simplexbo
