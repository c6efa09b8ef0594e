#include "ptc/io/trace_csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "ptc/errors.hpp"

namespace ptc::io {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw Error(ErrorCode::IoError, path.string() + " has no header row");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

double parse_double(const std::string& text) {
  if (text == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (text == "inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::ParseError, "not a number: '" + text + "'");
  }
  return v;
}

void emit_trace_csv(const SimTrace& trace, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const int n = trace.order;
  auto states = open_out(dir / "states.csv");
  auto inputs = open_out(dir / "inputs.csv");
  auto errors = open_out(dir / "observer_errors.csv");
  auto lyap = open_out(dir / "lyapunov.csv");

  states << "t,agent";
  for (int i = 1; i <= n; ++i) states << ",x" << i;
  for (int i = 1; i <= n; ++i) states << ",xhat" << i;
  states << ",u\n";
  inputs << "t,agent,u\n";
  errors << "t,agent";
  for (int i = 1; i <= n; ++i) errors << ",e" << i;
  errors << "\n";
  lyap << "t,V,envelope,margin\n";

  for (std::size_t s = 0; s < trace.times.size(); ++s) {
    const std::string t = format_double(trace.times[s]);
    for (Eigen::Index k = 0; k < trace.states[s].rows(); ++k) {
      states << t << ',' << k;
      for (int i = 0; i < n; ++i) states << ',' << format_double(trace.states[s](k, i));
      for (int i = 0; i < n; ++i) states << ',' << format_double(trace.estimates[s](k, i));
      states << ',' << format_double(trace.inputs[s](k)) << '\n';
      inputs << t << ',' << k << ',' << format_double(trace.inputs[s](k)) << '\n';
      errors << t << ',' << k;
      for (int i = 0; i < n; ++i) errors << ',' << format_double(trace.states[s](k, i) - trace.estimates[s](k, i));
      errors << '\n';
    }
    const double env = trace.envelope.size() > s ? trace.envelope[s] : std::numeric_limits<double>::quiet_NaN();
    lyap << t << ',' << format_double(trace.lyapunov[s]) << ',' << format_double(env) << ','
         << format_double(env - trace.lyapunov[s]) << '\n';
  }
  for (auto* f : {&states, &inputs, &errors, &lyap}) {
    if (!f->flush()) throw Error(ErrorCode::IoError, "write failed in " + dir.string());
  }
}

SimTrace read_trace_csv(const std::filesystem::path& dir) {
  const auto states = read_rows(dir / "states.csv");
  const auto lyap = read_rows(dir / "lyapunov.csv");
  const std::size_t width = states.front().size();
  if (width < 5 || (width - 3) % 2 != 0) throw Error(ErrorCode::ParseError, "states.csv header has wrong shape");
  SimTrace trace;
  trace.order = static_cast<int>((width - 3) / 2);
  const int n = trace.order;

  // Rows come grouped by sample: agents 0..N for each time.
  std::size_t row = 1;
  while (row < states.size()) {
    const std::string& t_text = states[row][0];
    std::vector<const std::vector<std::string>*> block;
    while (row < states.size() && states[row][0] == t_text) {
      if (states[row].size() != width) throw Error(ErrorCode::ParseError, "states.csv row " + std::to_string(row));
      block.push_back(&states[row]);
      ++row;
    }
    const auto agents = static_cast<Eigen::Index>(block.size());
    Eigen::MatrixXd x(agents, n), x_hat(agents, n);
    Eigen::VectorXd u(agents);
    for (Eigen::Index k = 0; k < agents; ++k) {
      const auto& cells = *block[static_cast<std::size_t>(k)];
      for (int i = 0; i < n; ++i) {
        x(k, i) = parse_double(cells[2 + static_cast<std::size_t>(i)]);
        x_hat(k, i) = parse_double(cells[2 + static_cast<std::size_t>(n + i)]);
      }
      u(k) = parse_double(cells.back());
    }
    trace.times.push_back(parse_double(t_text));
    trace.states.push_back(std::move(x));
    trace.estimates.push_back(std::move(x_hat));
    trace.inputs.push_back(std::move(u));
    trace.followers = static_cast<int>(agents) - 1;
  }
  for (std::size_t i = 1; i < lyap.size(); ++i) {
    if (lyap[i].size() != 4) throw Error(ErrorCode::ParseError, "lyapunov.csv row " + std::to_string(i));
    trace.lyapunov.push_back(parse_double(lyap[i][1]));
    trace.envelope.push_back(parse_double(lyap[i][2]));
  }
  if (trace.lyapunov.size() != trace.times.size()) {
    throw Error(ErrorCode::ParseError, "lyapunov.csv and states.csv disagree on the sample count");
  }
  return trace;
}

}  // namespace ptc::io
