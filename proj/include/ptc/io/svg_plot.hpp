#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ptc/simulator.hpp"

namespace ptc::io {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string file_stem;
  std::string title;
  std::string y_label;
  bool log_y = false;
  std::vector<PlotSeries> series;
};

// states, inputs, observer_errors, lyapunov (V and envelope).
std::vector<PlotSpec> build_plots(const SimTrace& trace);

std::string render_svg(const PlotSpec& spec);

// Writes one <file_stem>.svg per plot.
void emit_plots_svg(const SimTrace& trace, const std::filesystem::path& dir);

}  // namespace ptc::io
