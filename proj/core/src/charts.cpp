#include "cspc/charts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cspc/error.hpp"

namespace cspc {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 420;
constexpr double kLeft = 64;
constexpr double kRight = 150;
constexpr double kTop = 36;
constexpr double kBottom = 48;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                                "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string colour(std::size_t j) { return kPalette[j % (sizeof kPalette / sizeof *kPalette)]; }

std::string escape(const std::string& s) {
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

/// 1-2-5 tick step covering `span` in about `target` intervals.
double nice_step(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

struct Axes {
  double x0, x1, y0, y1;

  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

Axes make_axes(const SimTrace& trace, double ymin, double ymax) {
  const double last = trace.records.empty() ? 1.0 : std::max(1, trace.records.back().pcc);
  if (!(ymax > ymin)) ymax = ymin + 1.0;
  const double step = nice_step(ymax - ymin, 6);
  return {1.0, std::max(2.0, last), std::floor(ymin / step) * step, std::ceil(ymax / step) * step};
}

void frame(std::ostringstream& s, const Axes& ax, const std::string& title, const std::string& ylabel) {
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
    << "</text>\n";

  const double ystep = nice_step(ax.y1 - ax.y0, 6);
  for (double y = ax.y0; y <= ax.y1 + 1e-9 * ystep; y += ystep) {
    s << "<line x1=\"" << kLeft << "\" y1=\"" << ax.py(y) << "\" x2=\"" << kWidth - kRight << "\" y2=\""
      << ax.py(y) << "\" stroke=\"#e0e0e0\"/>\n"
      << "<text x=\"" << kLeft - 6 << "\" y=\"" << ax.py(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
  }
  const double xstep = nice_step(ax.x1 - ax.x0, 10);
  for (double x = xstep; x <= ax.x1 + 1e-9; x += xstep)
    s << "<text x=\"" << ax.px(x) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">" << x
      << "</text>\n";
  s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
    << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 10
    << "\" text-anchor=\"middle\">price controlling cycle</text>\n"
    << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << kHeight / 2 << ")\">" << escape(ylabel) << "</text>\n";
}

void polyline(std::ostringstream& s, const Axes& ax, const std::vector<std::pair<double, double>>& pts,
              const std::string& stroke, bool dashed) {
  if (pts.empty()) return;
  s << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << (dashed ? 1.2 : 1.8) << '"';
  if (dashed) s << " stroke-dasharray=\"6 4\"";
  s << " points=\"";
  for (const auto& [x, y] : pts) s << ax.px(x) << ',' << ax.py(y) << ' ';
  s << "\"/>\n";
}

void legend_entry(std::ostringstream& s, std::size_t row, const std::string& stroke, bool dashed,
                  const std::string& label) {
  const double x = kWidth - kRight + 12;
  const double y = kTop + 10 + 16 * static_cast<double>(row);
  s << "<line x1=\"" << x << "\" y1=\"" << y << "\" x2=\"" << x + 22 << "\" y2=\"" << y << "\" stroke=\"" << stroke
    << "\" stroke-width=\"1.8\"" << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n"
    << "<text x=\"" << x + 28 << "\" y=\"" << y + 4 << "\">" << escape(label) << "</text>\n";
}

void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError(p.string(), "cannot open for writing");
  f << body;
  f.close();
  if (!f) throw IoError(p.string(), "write failed");
}

}  // namespace

std::string price_chart_svg(const SimTrace& trace) {
  const auto fair = fair_prices(trace.config.wnps);
  const std::size_t n = fair.size();
  double ymax = *std::max_element(fair.begin(), fair.end());
  for (const auto& r : trace.records)
    for (double p : r.prices) ymax = std::max(ymax, p);
  const Axes ax = make_axes(trace, 0.0, ymax * 1.05);

  std::ostringstream s;
  frame(s, ax, trace.config.name + " - announced prices", "price per Mbps");
  for (std::size_t j = 0; j < n; ++j) {
    polyline(s, ax, {{ax.x0, fair[j]}, {ax.x1, fair[j]}}, colour(j), true);
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : trace.records) pts.emplace_back(r.pcc, r.prices[j]);
    polyline(s, ax, pts, colour(j), false);
    legend_entry(s, 2 * j, colour(j), false, "WNP " + std::to_string(j + 1));
    legend_entry(s, 2 * j + 1, colour(j), true, "MC " + std::to_string(j + 1));
  }
  s << "</svg>\n";
  return s.str();
}

std::string error_chart_svg(const SimTrace& trace) {
  double ymax = 0.0;
  for (const auto& r : trace.records) ymax = std::max(ymax, r.sum_abs_error);
  const Axes ax = make_axes(trace, 0.0, ymax * 1.05);

  std::ostringstream s;
  frame(s, ax, trace.config.name + " - sum of absolute error", "sum |p - MC|");
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : trace.records) pts.emplace_back(r.pcc, r.sum_abs_error);
  polyline(s, ax, pts, colour(0), false);
  legend_entry(s, 0, colour(0), false, "error");
  s << "</svg>\n";
  return s.str();
}

std::vector<std::filesystem::path> render_charts(const SimTrace& trace, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create output directory: " + ec.message());
  const auto prices = dir / "prices.svg";
  const auto error = dir / "error.svg";
  write_file(prices, price_chart_svg(trace));
  write_file(error, error_chart_svg(trace));
  return {prices, error};
}

}  // namespace cspc
