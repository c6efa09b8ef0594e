#include "ptc/io/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ptc/errors.hpp"

namespace ptc::io {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 160.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::vector<PlotSpec> build_plots(const SimTrace& trace) {
  std::vector<PlotSpec> plots;
  const auto agents = trace.states.empty() ? 0 : trace.states.front().rows();

  PlotSpec states{"states", "Agent states", "x", false, {}};
  PlotSpec errors{"observer_errors", "Observer errors", "x - xhat", false, {}};
  for (Eigen::Index k = 0; k < agents; ++k) {
    for (int i = 0; i < trace.order; ++i) {
      const std::string tag = "agent " + std::to_string(k) + " x" + std::to_string(i + 1);
      PlotSeries s{tag, trace.times, {}};
      PlotSeries e{tag, trace.times, {}};
      for (std::size_t j = 0; j < trace.times.size(); ++j) {
        s.y.push_back(trace.states[j](k, i));
        e.y.push_back(trace.states[j](k, i) - trace.estimates[j](k, i));
      }
      states.series.push_back(std::move(s));
      errors.series.push_back(std::move(e));
    }
  }
  PlotSpec inputs{"inputs", "Control inputs", "u", false, {}};
  for (Eigen::Index k = 1; k < agents; ++k) {
    PlotSeries s{"agent " + std::to_string(k), trace.times, {}};
    for (const auto& u : trace.inputs) s.y.push_back(u(k));
    inputs.series.push_back(std::move(s));
  }
  PlotSpec lyap{"lyapunov", "Lyapunov function and envelope", "V", true, {}};
  lyap.series.push_back({"V", trace.times, trace.lyapunov});
  lyap.series.push_back({"envelope", trace.times, trace.envelope});

  plots.push_back(std::move(states));
  plots.push_back(std::move(inputs));
  plots.push_back(std::move(errors));
  plots.push_back(std::move(lyap));
  return plots;
}

std::string render_svg(const PlotSpec& spec) {
  auto usable = [&](double y) { return std::isfinite(y) && (!spec.log_y || y > 0.0); };
  auto map_y = [&](double y) { return spec.log_y ? std::log10(y) : y; };

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_lo = x_lo, y_hi = -x_lo;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !usable(s.y[i])) continue;
      x_lo = std::min(x_lo, s.x[i]);
      x_hi = std::max(x_hi, s.x[i]);
      y_lo = std::min(y_lo, map_y(s.y[i]));
      y_hi = std::max(y_hi, map_y(s.y[i]));
    }
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_lo -= 0.5, y_hi += 0.5;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  auto py = [&](double y) { return kTop + (1.0 - (map_y(y) - y_lo) / (y_hi - y_lo)) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
      << escape(spec.title) << "</text>\n";
  svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fx = x_lo + (x_hi - x_lo) * i / 4.0;
    const double fy = y_lo + (y_hi - y_lo) * i / 4.0;
    const double gx = kLeft + plot_w * i / 4.0;
    const double gy = kTop + plot_h * (1.0 - i / 4.0);
    svg << "<text x=\"" << fmt("%.1f", gx) << "\" y=\"" << fmt("%.1f", kTop + plot_h + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt("%.3g", fx) << "</text>\n";
    const std::string label = spec.log_y ? "1e" + fmt("%.3g", fy) : fmt("%.3g", fy);
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt("%.1f", gy + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << label << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">t</text>\n";
  svg << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" font-family=\"sans-serif\" font-size=\"12\">"
      << escape(spec.y_label) << "</text>\n";

  for (std::size_t s = 0; s < spec.series.size(); ++s) {
    const PlotSeries& series = spec.series[s];
    const char* color = kPalette[s % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series.x.size() && i < series.y.size(); ++i) {
      if (!std::isfinite(series.x[i]) || !usable(series.y[i])) continue;
      svg << (first ? "" : " ") << fmt("%.2f", px(series.x[i])) << ',' << fmt("%.2f", py(series.y[i]));
      first = false;
    }
    svg << "\"/>\n";
    const double ly = kTop + 12.0 + 14.0 * static_cast<double>(s);
    svg << "<line x1=\"" << kWidth - kRight + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kWidth - kRight + 28
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\"/>\n";
    svg << "<text x=\"" << kWidth - kRight + 32 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"10\">" << escape(series.label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_plots_svg(const SimTrace& trace, const std::filesystem::path& dir) {
  if (trace.times.empty()) throw Error(ErrorCode::InvalidArgument, "cannot plot an empty trace");
  std::filesystem::create_directories(dir);
  for (const PlotSpec& spec : build_plots(trace)) {
    const auto path = dir / (spec.file_stem + ".svg");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << render_svg(spec);
    if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }
}

}  // namespace ptc::io
