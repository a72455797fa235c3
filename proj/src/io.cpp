#include "blockcert/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace blockcert {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string sidecar_path(const std::string& csv_path) {
  const std::string suffix = ".csv";
  if (csv_path.size() > suffix.size() &&
      csv_path.compare(csv_path.size() - suffix.size(), suffix.size(),
                       suffix) == 0)
    return csv_path.substr(0, csv_path.size() - suffix.size()) + ".json";
  return csv_path + ".json";
}

void write_matrix_csv(const std::string& path, const SensingMatrix& a) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < a.a.rows(); ++i) {
    for (std::size_t j = 0; j < a.a.cols(); ++j) {
      if (j) out << ',';
      out << format_double(a.a(i, j));
    }
    out << '\n';
  }
  json desc = {{"m", a.m}, {"n", a.structure.n}, {"p", a.structure.p}};
  std::ofstream side(sidecar_path(path));
  if (!side) throw IoError("cannot write " + sidecar_path(path));
  side << desc.dump(2) << '\n';
}

namespace {

std::vector<double> parse_line(const std::string& line) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (cell.empty()) continue;
    row.push_back(std::stod(cell));
  }
  return row;
}

}  // namespace

SensingMatrix read_matrix_csv(const std::string& path) {
  std::ifstream side(sidecar_path(path));
  if (!side)
    throw IoError("missing matrix descriptor " + sidecar_path(path));
  json desc = json::parse(side);
  const int m = desc.at("m").get<int>();
  const int n = desc.at("n").get<int>();
  const int p = desc.at("p").get<int>();

  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  SensingMatrix a(m, make_structure(n, p));
  std::string line;
  std::size_t r = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<double> row = parse_line(line);
    if (row.size() != a.a.cols() || r >= a.a.rows())
      throw IoError(path + ": row " + std::to_string(r) +
                    " does not match the descriptor");
    for (std::size_t j = 0; j < row.size(); ++j) a.a(r, j) = row[j];
    ++r;
  }
  if (r != a.a.rows())
    throw IoError(path + ": expected " + std::to_string(a.a.rows()) +
                  " rows, got " + std::to_string(r));
  return a;
}

void write_vector_csv(const std::string& path, const std::vector<double>& v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  for (double x : v) out << format_double(x) << '\n';
}

std::vector<double> read_vector_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::vector<double> v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    for (double x : parse_line(line)) v.push_back(x);
  }
  return v;
}

namespace {

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

json to_json(const CertifierResult& r, bool with_certificates) {
  json per = json::array();
  for (std::size_t i = 0; i < r.per_index.size(); ++i) {
    const InnerSolution& s = r.per_index[i];
    json item = {{"index", i},
                 {"objective", s.objective},
                 {"maxterm", s.maxterm},
                 {"penalty_value", s.penalty_value},
                 {"iterations", s.iterations},
                 {"first_order_residual", s.first_order_residual},
                 {"converged", s.converged}};
    if (with_certificates) item["multiplier"] = mat_to_json(s.p);
    per.push_back(std::move(item));
  }
  json out = {{"unconditional", r.unconditional},
              {"k_star", r.k_star},
              {"normalized", r.normalized},
              {"qr_applied", r.qr_applied},
              {"per_index", std::move(per)}};
  if (r.unconditional)
    out["s_star"] = nullptr;
  else
    out["s_star"] = r.s_star;
  return out;
}

json to_json(const FixedPointTrace& t, bool with_records) {
  const char* strategy = t.strategy == FpStrategy::Naive      ? "naive"
                         : t.strategy == FpStrategy::Bisection ? "bisect"
                                                               : "hybrid";
  json out = {{"strategy", strategy},
              {"eta_star", t.eta_star},
              {"omega_lower_bound", t.omega_lower_bound},
              {"converged", t.converged},
              {"wall_seconds", t.wall_seconds},
              {"inner_iterations", t.inner_iterations},
              {"evaluations", t.evaluations},
              {"final_per_index", t.final_per_index}};
  if (with_records) {
    json recs = json::array();
    for (const FpRecord& r : t.records)
      recs.push_back({{"eta", r.eta},
                      {"value", r.value},
                      {"index", r.index},
                      {"lo", r.lo},
                      {"hi", r.hi}});
    out["records"] = std::move(recs);
  }
  return out;
}

json to_json(const RecoveryResult& r) {
  return {{"objective", r.objective},
          {"feasibility_residual", r.feasibility_residual},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"duality_gap", r.duality_gap},
          {"kkt_residual", r.kkt_residual},
          {"status", r.status}};
}

json to_json(const BoundReport& r) {
  json out = {{"variant", variant_name(r.variant)},
              {"k", r.k},
              {"s_used", r.s_used},
              {"certified", r.certified},
              {"noise_param", r.noise_param},
              {"kappa", r.kappa}};
  if (r.certified) {
    out["omega_lb"] = r.omega_lb;
    out["binf_bound"] = r.binf_bound;
    out["l2_bound"] = r.l2_bound;
  } else {
    out["omega_lb"] = nullptr;
    out["binf_bound"] = nullptr;
    out["l2_bound"] = nullptr;
  }
  if (r.rip_delta_hat.has_value()) {
    out["rip_delta_hat"] = *r.rip_delta_hat;
    if (r.rip.valid)
      out["rip_bound"] = r.rip.value;
    else
      out["rip_bound"] = "invalid (delta >= sqrt(2)-1)";
  }
  if (!r.note.empty()) out["note"] = r.note;
  return out;
}

}  // namespace blockcert
