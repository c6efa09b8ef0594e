#pragma once

#include <filesystem>
#include <string>

#include "ptc/simulator.hpp"

namespace ptc::io {

// Shortest decimal text that parses back to the same double ("inf", "nan" for non-finite).
std::string format_double(double v);
double parse_double(const std::string& text);

// Writes states.csv, inputs.csv, observer_errors.csv and lyapunov.csv into dir.
void emit_trace_csv(const SimTrace& trace, const std::filesystem::path& dir);

// Reads the files written by emit_trace_csv. Fills times, states, estimates, inputs,
// lyapunov and envelope.
SimTrace read_trace_csv(const std::filesystem::path& dir);

}  // namespace ptc::io
