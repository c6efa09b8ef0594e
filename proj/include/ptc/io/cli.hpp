#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "ptc/io/config.hpp"

namespace ptc::io {

inline constexpr int kExitPass = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;

// args excludes the program name: {"simulate", "--config", "x.cfg"}.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Synthesis plus certificate report; writes synthesis.json (and P matrices) when write_files.
int run_synth(const RunConfig& config, bool write_files, std::ostream& out);
// Synthesis, integration, monitors, CSV and plot output.
int run_simulate(const RunConfig& config, std::ostream& out);
int run_verify(const std::string& report_path, std::ostream& out);

}  // namespace ptc::io
