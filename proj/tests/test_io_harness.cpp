#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "blockcert/harness.hpp"
#include "blockcert/io.hpp"
#include "blockcert/rng.hpp"

using namespace blockcert;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("blockcert_test_" + std::to_string(SplitMix64(
                static_cast<std::uint64_t>(
                    std::chrono::steady_clock::now().time_since_epoch().count()))
                .next()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_SUITE_BEGIN("io_harness");

TEST_CASE("matrix CSV round trip is exact") {
  TempDir dir;
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 5, 2, 3, 8, true});
  const std::string path = dir.file("a.csv");
  write_matrix_csv(path, a);
  CHECK(fs::exists(dir.file("a.json")));
  const SensingMatrix b = read_matrix_csv(path);
  CHECK(b.m == a.m);
  CHECK(b.structure == a.structure);
  CHECK(b.a.values() == a.a.values());
}

TEST_CASE("sidecar path derivation") {
  CHECK(sidecar_path("x/a.csv") == "x/a.json");
  CHECK(sidecar_path("plain") == "plain.json");
}

TEST_CASE("vector CSV round trip") {
  TempDir dir;
  std::vector<double> v{1.5, -2.25, 1e-17, 3.0};
  const std::string path = dir.file("v.csv");
  write_vector_csv(path, v);
  CHECK(read_vector_csv(path) == v);
}

TEST_CASE("descriptor mismatches are rejected") {
  TempDir dir;
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 4, 1, 3, 9, true});
  const std::string path = dir.file("a.csv");
  write_matrix_csv(path, a);
  // Corrupt the sidecar: wrong m.
  std::ofstream side(sidecar_path(path));
  side << "{\"m\": 5, \"n\": 1, \"p\": 3}\n";
  side.close();
  CHECK_THROWS_AS(read_matrix_csv(path), IoError);
}

TEST_CASE("ensemble generation") {
  const EnsembleSpec spec{EnsembleKind::Gaussian, 6, 2, 4, 123, true};
  const SensingMatrix a = generate(spec);
  const SensingMatrix b = generate(spec);
  CHECK(a.a.values() == b.a.values());  // same seed, same matrix

  EnsembleSpec other = spec;
  other.seed = 124;
  CHECK(generate(other).a.values() != a.a.values());

  const SensingMatrix bern =
      generate({EnsembleKind::Bernoulli, 4, 1, 1, 7, false});
  for (double v : bern.a.values()) CHECK((v == 1.0 || v == -1.0));

  for (std::size_t j = 0; j < a.a.cols(); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.a.rows(); ++i) acc += a.a(i, j) * a.a(i, j);
    CHECK(std::abs(std::sqrt(acc) - 1.0) <= 1e-12);
  }
}

TEST_CASE("experiment presets write CSV plus provenance") {
  TempDir dir;
  ExperimentConfig cfg;
  cfg.preset = Preset::Table2;
  cfg.m_values = {16};     // small stand-in cell; the layout is what matters
  cfg.k_values = {1};
  cfg.rip_trials = 20;
  cfg.inner.max_iter = 800;
  cfg.out_dir = dir.path.string();
  const ExperimentResult r = run_experiment(cfg);
  CHECK(fs::exists(r.csv_path));
  CHECK(fs::exists(r.json_path));

  std::ifstream csv(r.csv_path);
  std::string header;
  std::getline(csv, header);
  CHECK(header == "m,k,s_star,omega2,delta_hat,rip_applies");

  std::ifstream js(r.json_path);
  const nlohmann::json prov = nlohmann::json::parse(js);
  CHECK(prov.contains("config"));
  REQUIRE(prov.contains("cells"));
  REQUIRE(!prov["cells"].empty());
  CHECK(prov["cells"][0].contains("wall_seconds"));
  CHECK(prov["config"]["seed"].get<std::uint64_t>() == cfg.seed);
}

TEST_CASE("json serialization carries the essentials") {
  FixedPointTrace t;
  t.strategy = FpStrategy::Hybrid;
  t.eta_star = 2.0;
  t.omega_lower_bound = 0.5;
  t.converged = true;
  t.records.push_back(FpRecord{1.0, 1.5, 3, 0.5, 2.5});
  const nlohmann::json j = to_json(t);
  CHECK(j["strategy"] == "hybrid");
  CHECK(j["records"][0]["index"] == 3);

  RecoveryResult r;
  r.xhat = BlockVector(make_structure(1, 2));
  r.status = "converged";
  CHECK(to_json(r)["status"] == "converged");
}

TEST_SUITE_END();
