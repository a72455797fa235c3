#pragma once

#include <string>
#include <vector>

#include "blockcert/bounds.hpp"
#include "blockcert/fixedpoint.hpp"
#include "blockcert/inner_solver.hpp"
#include "blockcert/recovery.hpp"
#include "blockcert/types.hpp"

#include <json.hpp>

namespace blockcert {

// Matrix files: one CSV row per matrix row, decimal floats, no header,
// plus a JSON sidecar {"m":..,"n":..,"p":..} next to the CSV.
std::string sidecar_path(const std::string& csv_path);

void write_matrix_csv(const std::string& path, const SensingMatrix& a);
SensingMatrix read_matrix_csv(const std::string& path);

// Vector files: one value per line (reads also accept comma-separated).
void write_vector_csv(const std::string& path, const std::vector<double>& v);
std::vector<double> read_vector_csv(const std::string& path);

// JSON views of the result types (indices 0-based throughout).
nlohmann::json to_json(const CertifierResult& r, bool with_certificates = false);
nlohmann::json to_json(const FixedPointTrace& t, bool with_records = true);
nlohmann::json to_json(const RecoveryResult& r);
nlohmann::json to_json(const BoundReport& r);

std::string format_double(double v);

}  // namespace blockcert
