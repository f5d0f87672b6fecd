#include "simplexbo/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace simplexbo {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("aggregate CSV: bad number '" + s + "'");
  }
  if (used != s.size()) throw std::runtime_error("aggregate CSV: bad number '" + s + "'");
  return v;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

}  // namespace

std::vector<AggregateSeries> parse_aggregate_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("aggregate CSV: empty input");
  const auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "method" || header[1] != "iter") {
    throw std::runtime_error("aggregate CSV: unexpected header");
  }
  const auto median_col = std::find(header.begin(), header.end(), "median");
  if (median_col == header.end()) throw std::runtime_error("aggregate CSV: no median column");
  const std::size_t mid = static_cast<std::size_t>(median_col - header.begin());
  // Quantile columns run from index 2 up to "runs".
  const auto runs_col = std::find(header.begin(), header.end(), "runs");
  if (runs_col == header.end() || runs_col - header.begin() < 3) throw std::runtime_error("aggregate CSV: no runs column");
  const std::size_t last_q = static_cast<std::size_t>(runs_col - header.begin()) - 1;
  const std::size_t lo = 2;
  const std::size_t hi = last_q;

  std::vector<AggregateSeries> series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size()) throw std::runtime_error("aggregate CSV: ragged row");
    if (series.empty() || series.back().method != cells[0]) {
      series.push_back({});
      series.back().method = cells[0];
    }
    AggregateSeries& s = series.back();
    s.iter.push_back(static_cast<int>(parse_double(cells[1])));
    s.lower.push_back(parse_double(cells[lo]));
    s.median.push_back(parse_double(cells[mid]));
    s.upper.push_back(parse_double(cells[hi]));
  }
  if (series.empty()) throw std::runtime_error("aggregate CSV: no data rows");
  return series;
}

std::string render_svg(const std::vector<AggregateSeries>& series, const std::string& title) {
  if (series.empty()) throw std::runtime_error("render_svg: nothing to plot");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.iter.size(); ++i) {
      xmin = std::min(xmin, static_cast<double>(s.iter[i]));
      xmax = std::max(xmax, static_cast<double>(s.iter[i]));
      ymin = std::min({ymin, s.lower[i], s.median[i]});
      ymax = std::max({ymax, s.upper[i], s.median[i]});
    }
  }
  if (!std::isfinite(xmin)) throw std::runtime_error("render_svg: empty series");
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax - ymin < 1e-9) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double width = 720, height = 480, left = 70, right = 170, top = 40, bottom = 60;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
        << escape_xml(title) << "</text>\n";
  }
  svg << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int k = 0; k <= 5; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 5.0;
    const double yv = ymin + (ymax - ymin) * k / 5.0;
    svg << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << fmt(top + ph + 18) << "\" text-anchor=\"middle\">"
        << std::lround(xv) << "</text>\n";
    svg << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(py(yv) + 4) << "\" text-anchor=\"end\">" << fmt(yv)
        << "</text>\n";
  }
  svg << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(height - 16)
      << "\" text-anchor=\"middle\">iteration N</text>\n";
  svg << "<text transform=\"translate(18," << fmt(top + ph / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">log10 regret</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    svg << "<g class=\"series\" data-method=\"" << escape_xml(s.method) << "\">\n";
    svg << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < s.iter.size(); ++i) svg << fmt(px(s.iter[i])) << ',' << fmt(py(s.upper[i])) << ' ';
    for (std::size_t i = s.iter.size(); i-- > 0;) svg << fmt(px(s.iter[i])) << ',' << fmt(py(s.lower[i])) << ' ';
    svg << "\"/>\n";
    svg << "<polyline class=\"median\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.iter.size(); ++i) {
      if (i > 0) svg << ' ';
      svg << fmt(px(s.iter[i])) << ',' << fmt(py(s.median[i]));
    }
    svg << "\"/>\n</g>\n";
  }

  svg << "<g class=\"legend\">\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    const double y = top + 14 + 20.0 * static_cast<double>(k);
    const double x = left + pw + 16;
    svg << "<g class=\"legend-entry\"><line x1=\"" << fmt(x) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(x + 24)
        << "\" y2=\"" << fmt(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/><text x=\"" << fmt(x + 30)
        << "\" y=\"" << fmt(y + 4) << "\">" << escape_xml(series[k].method) << "</text></g>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

void plot_aggregate(const std::string& aggregate_path, const std::string& svg_path, const std::string& title) {
  std::ifstream in(aggregate_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + aggregate_path);
  std::ostringstream text;
  text << in.rdbuf();
  const std::string svg = render_svg(parse_aggregate_csv(text.str()), title);
  std::ofstream out(svg_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + svg_path);
  out << svg;
}

}  // namespace simplexbo
