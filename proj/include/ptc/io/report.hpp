#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "ptc/gain_synthesis.hpp"

namespace ptc::io {

// JSON report holding the system matrices, P matrices, scalars and certificates.
std::string synthesis_report_json(const SystemMatrices& sys, const SynthesisResult& result);
void write_synthesis_report(const SystemMatrices& sys, const SynthesisResult& result,
                            const std::filesystem::path& path);

struct StoredSynthesis {
  SystemMatrices system;
  SynthesisResult result;  // certificates as stored in the file
};

StoredSynthesis read_synthesis_report(const std::filesystem::path& path);

struct VerifyOutcome {
  bool passed = true;
  std::vector<std::string> failures;
};

// Recomputes every certificate from the stored ingredients and compares with the stored copy.
VerifyOutcome verify_synthesis(const StoredSynthesis& stored);

void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path);

void print_synthesis_summary(std::ostream& out, const SynthesisResult& result);

}  // namespace ptc::io
