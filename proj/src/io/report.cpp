#include "ptc/io/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ptc/errors.hpp"
#include "ptc/io/config.hpp"
#include "ptc/io/trace_csv.hpp"
#include "ptc/pencil_linalg.hpp"

namespace ptc::io {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& j, const std::string& field) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, field + ": expected a matrix");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j.at(static_cast<std::size_t>(i));
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::ParseError, field + ": ragged matrix");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

std::string synthesis_report_json(const SystemMatrices& sys, const SynthesisResult& r) {
  json doc;
  doc["mode"] = to_string(r.mode);
  doc["order"] = sys.order;
  doc["followers"] = sys.followers;
  doc["horizon"] = r.horizon;
  doc["t_f"] = r.t_f;
  doc["delta"] = r.delta;
  doc["c1"] = r.c1;
  doc["dtheta"] = r.dtheta;
  doc["pc_margin"] = r.pc_margin;
  doc["scalars"] = {
      {"observer_weight", r.observer_weight},
      {"b", r.b},
      {"b_plateau", r.b_plateau},
      {"kappa_decay", r.kappa_decay},
      {"kappa_growth", optional_json(r.kappa_growth)},
      {"kappa_growth_aux", optional_json(r.kappa_growth_aux)},
      {"diag_ratio_controller", r.diag_ratio_controller},
      {"diag_ratio_observer", r.diag_ratio_observer},
      {"admissible_dtheta", r.admissible_dtheta},
      {"admissible_dtheta_frobenius", r.admissible_dtheta_frobenius},
      {"gamma", optional_json(r.gamma)},
      {"gamma_plateau", optional_json(r.gamma_plateau)},
  };
  json mats;
  mats["lyap_controller"] = matrix_json(r.lyap_controller);
  mats["lyap_observer"] = matrix_json(r.lyap_observer);
  mats["closed_loop"] = matrix_json(sys.closed_loop);
  mats["observer_loop"] = matrix_json(sys.observer_loop);
  mats["degree_weights"] = matrix_json(sys.degree_weights);
  mats["output_injection"] = matrix_json(sys.output_injection);
  mats["growth_bound"] = sys.growth_bound ? matrix_json(*sys.growth_bound) : json(nullptr);
  doc["matrices"] = std::move(mats);
  json certs = json::array();
  for (const Certificate& c : r.certificates) {
    certs.push_back({{"name", c.name},
                     {"lambda_max", c.lambda_max},
                     {"tolerance", c.tolerance},
                     {"passed", c.passed()},
                     {"matrix", matrix_json(c.matrix)}});
  }
  doc["certificates"] = std::move(certs);
  return doc.dump(1) + "\n";
}

void write_synthesis_report(const SystemMatrices& sys, const SynthesisResult& result, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << synthesis_report_json(sys, result);
  if (!out.flush()) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

StoredSynthesis read_synthesis_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  try {
    StoredSynthesis st;
    const auto mode = parse_mode(doc.at("mode").get<std::string>());
    if (!mode) throw Error(ErrorCode::ParseError, "unknown mode in report");
    SystemMatrices& sys = st.system;
    SynthesisResult& r = st.result;
    sys.order = doc.at("order").get<int>();
    sys.followers = doc.at("followers").get<int>();
    const json& m = doc.at("matrices");
    sys.closed_loop = matrix_from(m.at("closed_loop"), "closed_loop");
    sys.observer_loop = matrix_from(m.at("observer_loop"), "observer_loop");
    sys.degree_weights = matrix_from(m.at("degree_weights"), "degree_weights");
    sys.output_injection = matrix_from(m.at("output_injection"), "output_injection");
    if (!m.at("growth_bound").is_null()) sys.growth_bound = matrix_from(m.at("growth_bound"), "growth_bound");

    r.mode = *mode;
    r.horizon = doc.at("horizon").get<double>();
    r.t_f = doc.at("t_f").get<double>();
    r.delta = doc.at("delta").get<double>();
    r.c1 = doc.at("c1").get<double>();
    r.dtheta = doc.at("dtheta").get<double>();
    r.pc_margin = doc.at("pc_margin").get<double>();
    const json& s = doc.at("scalars");
    r.observer_weight = s.at("observer_weight").get<double>();
    r.b = s.at("b").get<double>();
    r.b_plateau = s.at("b_plateau").get<double>();
    r.kappa_decay = s.at("kappa_decay").get<double>();
    r.kappa_growth = optional_from(s.at("kappa_growth"));
    r.kappa_growth_aux = optional_from(s.at("kappa_growth_aux"));
    r.diag_ratio_controller = s.at("diag_ratio_controller").get<double>();
    r.diag_ratio_observer = s.at("diag_ratio_observer").get<double>();
    r.admissible_dtheta = s.at("admissible_dtheta").get<double>();
    r.admissible_dtheta_frobenius = s.at("admissible_dtheta_frobenius").get<double>();
    r.gamma = optional_from(s.at("gamma"));
    r.gamma_plateau = optional_from(s.at("gamma_plateau"));
    r.lyap_controller = matrix_from(m.at("lyap_controller"), "lyap_controller");
    r.lyap_observer = matrix_from(m.at("lyap_observer"), "lyap_observer");
    for (const json& c : doc.at("certificates")) {
      Certificate cert;
      cert.name = c.at("name").get<std::string>();
      cert.lambda_max = c.at("lambda_max").get<double>();
      cert.tolerance = c.at("tolerance").get<double>();
      cert.matrix = matrix_from(c.at("matrix"), cert.name);
      r.certificates.push_back(std::move(cert));
    }
    return st;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

VerifyOutcome verify_synthesis(const StoredSynthesis& stored) {
  VerifyOutcome out;
  auto fail = [&](const std::string& why) {
    out.passed = false;
    out.failures.push_back(why);
  };
  std::vector<Certificate> rebuilt;
  try {
    rebuilt = assemble_certificates(stored.system, stored.result);
  } catch (const Error& e) {
    fail(std::string("cannot rebuild certificates: ") + e.what());
    return out;
  }
  std::map<std::string, const Certificate*> by_name;
  for (const Certificate& c : rebuilt) by_name[c.name] = &c;
  if (stored.result.certificates.size() != rebuilt.size()) {
    fail("stored report has " + std::to_string(stored.result.certificates.size()) + " certificates, expected " +
         std::to_string(rebuilt.size()));
  }
  for (const Certificate& c : stored.result.certificates) {
    const auto it = by_name.find(c.name);
    if (it == by_name.end()) {
      fail(c.name + ": unknown certificate");
      continue;
    }
    const Certificate& fresh = *it->second;
    if (c.matrix.rows() != fresh.matrix.rows() || c.matrix.cols() != fresh.matrix.cols()) {
      fail(c.name + ": stored matrix has the wrong shape");
      continue;
    }
    const double drift = (c.matrix - fresh.matrix).cwiseAbs().maxCoeff();
    if (drift > 1e-9 * (1.0 + fresh.matrix.norm())) {
      fail(c.name + ": stored matrix differs from the rebuilt one by " + format_double(drift));
    }
    const double lam = linalg::lambda_max_sym(linalg::symmetric_part(c.matrix));
    if (!(c.lambda_max <= c.tolerance)) fail(c.name + ": stored lambda_max exceeds tolerance");
    if (!(lam <= c.tolerance)) fail(c.name + ": recomputed lambda_max " + format_double(lam) + " exceeds tolerance");
    if (!fresh.passed()) fail(c.name + ": rebuilt certificate fails");
  }
  return out;
}

void write_matrix_csv(const Eigen::MatrixXd& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << format_double(m(i, j));
    out << '\n';
  }
}

void print_synthesis_summary(std::ostream& out, const SynthesisResult& r) {
  auto line = [&](const char* name, double v) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "  %-28s %.6g\n", name, v);
    out << buf;
  };
  out << "mode: " << to_string(r.mode) << "\n";
  line("horizon", r.horizon);
  line("b", r.b);
  if (r.mode == SynthesisMode::StateFeedback) {
    line("kappa0", r.kappa_decay);
    if (r.kappa_growth) line("kappa1", *r.kappa_growth);
    if (r.kappa_growth_aux) line("kappa2", *r.kappa_growth_aux);
  } else {
    line("c", r.observer_weight);
    line("kappa_a", r.kappa_decay);
    if (r.kappa_growth) line("kappa_b", *r.kappa_growth);
    if (r.kappa_growth_aux) line("kappa_b_tilde", *r.kappa_growth_aux);
    line("delta_Ac", r.diag_ratio_controller);
    line("delta_A0", r.diag_ratio_observer);
    line("dtheta (worst case)", r.dtheta);
  }
  if (r.admissible_dtheta > 0.0) {
    line("admissible dtheta (2-norm)", r.admissible_dtheta);
    line("admissible dtheta (Frob.)", r.admissible_dtheta_frobenius);
  }
  if (r.mode == SynthesisMode::Practical) {
    line("b (saturated stage)", r.b_plateau);
    line("gamma", r.gamma.value_or(0.0));
    line("gamma*", r.gamma_plateau.value_or(0.0));
  }
  out << "certificates (lambda_max <= tol):\n";
  for (const Certificate& c : r.certificates) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "  %-28s %+.3e  tol %.1e  %s\n", c.name.c_str(), c.lambda_max, c.tolerance,
                  c.passed() ? "ok" : "FAIL");
    out << buf;
  }
}

}  // namespace ptc::io
