#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blockcert/bounds.hpp"
#include "blockcert/fixedpoint.hpp"
#include "blockcert/types.hpp"

namespace blockcert {

enum class EnsembleKind { Gaussian, Bernoulli };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::Gaussian;
  int m = 1, n = 1, p = 1;
  std::uint64_t seed = 1;
  bool normalize = true;  // unit-norm columns after the draw
};

// Deterministic draw: i.i.d. standard normal or +/-1 entries from the seed.
SensingMatrix generate(const EnsembleSpec& spec);

enum class Preset { Table1, Table2, Table3, RuntimeCompare, Custom };

struct ExperimentConfig {
  Preset preset = Preset::Table1;
  std::uint64_t seed = 1;
  bool full = false;               // full m sweep instead of the short one
  std::vector<int> m_values;       // overrides the preset list when set
  std::vector<int> k_values;       // Table2/3 rows; default 1..5
  FpStrategy strategy = FpStrategy::Hybrid;
  double tol = 1e-5;
  int rip_trials = 1000;
  double eps = 1.0;
  std::string out_dir = ".";
  InnerOptions inner;
};

struct ExperimentResult {
  std::string csv_path;
  std::string json_path;
  bool ok = true;
};

// Runs a preset and writes <preset>.csv plus a JSON provenance sidecar
// (seed, config echo, wall clock per cell). Per-cell failures are recorded
// in the sidecar and leave dash cells in the CSV.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

}  // namespace blockcert
