// blockcert: certified performance guarantees for block-sparse recovery.
//
// Subcommands: generate, verify, omega, recover, bounds, report, oracle.
// Matrices travel as CSV with a JSON sidecar descriptor; results print as
// JSON on stdout (block indices are 0-based).

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockcert/block_core.hpp"
#include "blockcert/bounds.hpp"
#include "blockcert/harness.hpp"
#include "blockcert/io.hpp"
#include "blockcert/oracles.hpp"
#include "blockcert/version.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace blockcert;
using nlohmann::json;

namespace {

FpStrategy parse_strategy(const std::string& s) {
  if (s == "naive") return FpStrategy::Naive;
  if (s == "bisect") return FpStrategy::Bisection;
  if (s == "hybrid") return FpStrategy::Hybrid;
  throw CLI::ValidationError("strategy", "expected naive|bisect|hybrid");
}

OmegaTarget parse_target(const std::string& s) {
  if (s == "omega2") return OmegaTarget::Omega2;
  if (s == "omegabinf") return OmegaTarget::OmegaBInf;
  throw CLI::ValidationError("target", "expected omega2|omegabinf");
}

RecoveryVariant parse_variant(const std::string& s) {
  if (s == "bsbp") return RecoveryVariant::BsBp;
  if (s == "bsds") return RecoveryVariant::BsDs;
  if (s == "bslasso") return RecoveryVariant::BsLasso;
  if (s == "noisefree") return RecoveryVariant::NoiseFree;
  throw CLI::ValidationError("variant", "expected bsbp|bsds|bslasso|noisefree");
}

void emit(const json& j) { std::cout << j.dump(2) << std::endl; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified performance analysis for block-sparse recovery"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  int threads = 0;
  double tol = 1e-5;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "global random seed")->capture_default_str();
  app.add_option("--threads", threads, "OpenMP thread cap (0 = default)");
  app.add_option("--tol", tol, "solver tolerance")->capture_default_str();
  app.add_option("--out", out_dir, "output directory")->capture_default_str();

  // generate
  auto* gen = app.add_subcommand("generate", "draw a random sensing matrix");
  std::string gen_kind = "gaussian", gen_matrix = "A.csv";
  int gen_m = 8, gen_n = 2, gen_p = 8;
  bool gen_no_normalize = false;
  gen->add_option("--kind", gen_kind, "gaussian|bernoulli")
      ->capture_default_str();
  gen->add_option("--m", gen_m, "rows")->capture_default_str();
  gen->add_option("--n", gen_n, "block length")->capture_default_str();
  gen->add_option("--p", gen_p, "number of blocks")->capture_default_str();
  gen->add_option("--matrix", gen_matrix, "output CSV path")
      ->capture_default_str();
  gen->add_flag("--no-normalize", gen_no_normalize,
                "skip unit-norm column scaling");

  // verify
  auto* ver = app.add_subcommand("verify", "certify s_* for a matrix");
  std::string ver_matrix;
  bool ver_no_qr = false, ver_no_normalize = false, ver_certs = false;
  ver->add_option("--matrix", ver_matrix, "matrix CSV")->required();
  ver->add_flag("--no-qr", ver_no_qr, "skip row orthonormalization");
  ver->add_flag("--no-normalize", ver_no_normalize,
                "skip column normalization");
  ver->add_flag("--certificates", ver_certs,
                "include multiplier matrices in the JSON");

  // omega
  auto* om = app.add_subcommand("omega", "certified omega lower bound");
  std::string om_matrix, om_target = "omega2", om_strategy = "hybrid";
  double om_s = 2.0, om_eta_lo = 0.1, om_eta_hi = 10.0, om_eta0 = 0.1;
  bool om_no_records = false;
  om->add_option("--matrix", om_matrix, "matrix CSV")->required();
  om->add_option("--s", om_s, "cone parameter (1 < s < s_*)")->required();
  om->add_option("--target", om_target, "omega2|omegabinf")
      ->capture_default_str();
  om->add_option("--strategy", om_strategy, "naive|bisect|hybrid")
      ->capture_default_str();
  om->add_option("--eta-lo", om_eta_lo, "bracket lower end")
      ->capture_default_str();
  om->add_option("--eta-hi", om_eta_hi, "bracket upper end")
      ->capture_default_str();
  om->add_option("--eta0", om_eta0, "naive iteration start")
      ->capture_default_str();
  om->add_flag("--no-records", om_no_records, "omit the evaluation trace");

  // recover
  auto* rec = app.add_subcommand("recover", "solve a recovery program");
  std::string rec_variant = "bsbp", rec_matrix, rec_y, rec_xout;
  double rec_eps = 0.0, rec_mu = 0.1;
  rec->add_option("--variant", rec_variant, "bsbp|bsds|bslasso|noisefree")
      ->capture_default_str();
  rec->add_option("--matrix", rec_matrix, "matrix CSV")->required();
  rec->add_option("--y", rec_y, "measurement CSV")->required();
  rec->add_option("--eps", rec_eps, "noise radius (bsbp)")
      ->capture_default_str();
  rec->add_option("--mu", rec_mu, "tuning parameter (bsds, bslasso)")
      ->capture_default_str();
  rec->add_option("--xout", rec_xout, "write the estimate to this CSV");

  // bounds
  auto* bnd = app.add_subcommand("bounds", "error-bound report for one k");
  std::string bnd_matrix, bnd_variant = "bsbp";
  int bnd_k = 1, bnd_trials = 1000;
  double bnd_eps = 1.0, bnd_mu = 1.0, bnd_kappa = 0.5;
  bool bnd_no_rip = false;
  bnd->add_option("--matrix", bnd_matrix, "matrix CSV")->required();
  bnd->add_option("--k", bnd_k, "block sparsity")->required();
  bnd->add_option("--variant", bnd_variant, "bsbp|bsds|bslasso")
      ->capture_default_str();
  bnd->add_option("--eps", bnd_eps, "noise radius")->capture_default_str();
  bnd->add_option("--mu", bnd_mu, "tuning parameter")->capture_default_str();
  bnd->add_option("--kappa", bnd_kappa, "LASSO correlation level")
      ->capture_default_str();
  bnd->add_option("--rip-trials", bnd_trials, "Monte-Carlo trials")
      ->capture_default_str();
  bnd->add_flag("--no-rip", bnd_no_rip, "skip the RIP estimate");

  // report
  auto* rep = app.add_subcommand("report", "run a reproduction preset");
  std::string rep_preset = "table1";
  bool rep_full = false;
  rep->add_option("--preset", rep_preset, "table1|table2|table3|runtime")
      ->capture_default_str();
  rep->add_flag("--full", rep_full, "full m sweep");

  // oracle
  auto* orc = app.add_subcommand(
      "oracle", "desk-scale brute-force references (not scalable)");
  std::string orc_op = "omega", orc_matrix, orc_target = "omega2";
  double orc_s = 2.0, orc_eta = 1.0;
  orc->add_option("--op", orc_op, "fs|omega|sstar|rho")->capture_default_str();
  orc->add_option("--matrix", orc_matrix, "matrix CSV")->required();
  orc->add_option("--s", orc_s, "cone parameter")->capture_default_str();
  orc->add_option("--eta", orc_eta, "evaluation point (fs)")
      ->capture_default_str();
  orc->add_option("--target", orc_target, "omega2|omegabinf")
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    std::filesystem::create_directories(out_dir);
    if (*gen) {
      EnsembleSpec spec;
      spec.kind = gen_kind == "bernoulli" ? EnsembleKind::Bernoulli
                                          : EnsembleKind::Gaussian;
      spec.m = gen_m;
      spec.n = gen_n;
      spec.p = gen_p;
      spec.seed = seed;
      spec.normalize = !gen_no_normalize;
      const SensingMatrix a = generate(spec);
      write_matrix_csv(gen_matrix, a);
      emit({{"matrix", gen_matrix},
            {"sidecar", sidecar_path(gen_matrix)},
            {"m", a.m},
            {"n", a.structure.n},
            {"p", a.structure.p},
            {"seed", seed}});
    } else if (*ver) {
      const SensingMatrix a = read_matrix_csv(ver_matrix);
      VerifyOptions vo;
      vo.inner.tol = tol;
      vo.qr = !ver_no_qr;
      vo.normalize = !ver_no_normalize;
      const CertifierResult r = verify_s_star(a, vo);
      emit(to_json(r, ver_certs));
    } else if (*om) {
      const SensingMatrix a = read_matrix_csv(om_matrix);
      OmegaQuery q{&a, om_s, parse_target(om_target)};
      FixedPointConfig cfg;
      cfg.tol = tol;
      cfg.inner.tol = std::min(tol, cfg.inner.tol);
      cfg.eta_lo = om_eta_lo;
      cfg.eta_hi = om_eta_hi;
      cfg.eta0 = om_eta0;
      cfg.strategy = parse_strategy(om_strategy);
      auto [lb, trace] = omega_lower_bound(q, cfg);
      json j = to_json(trace, !om_no_records);
      j["s"] = om_s;
      j["target"] = om_target;
      emit(j);
    } else if (*rec) {
      const SensingMatrix a = read_matrix_csv(rec_matrix);
      const std::vector<double> y = read_vector_csv(rec_y);
      RecoveryOptions opts;
      RecoveryResult r;
      switch (parse_variant(rec_variant)) {
        case RecoveryVariant::BsBp:
          r = solve_bsbp(a, y, rec_eps, opts);
          break;
        case RecoveryVariant::BsDs:
          r = solve_bsds(a, y, rec_mu, opts);
          break;
        case RecoveryVariant::BsLasso:
          r = solve_bslasso(a, y, rec_mu, opts);
          break;
        case RecoveryVariant::NoiseFree:
          r = solve_noisefree(a, y, opts);
          break;
      }
      const std::string xpath =
          rec_xout.empty() ? out_dir + "/xhat.csv" : rec_xout;
      write_vector_csv(xpath, r.xhat.values);
      json j = to_json(r);
      j["variant"] = rec_variant;
      j["xhat_csv"] = xpath;
      emit(j);
    } else if (*bnd) {
      const SensingMatrix a = read_matrix_csv(bnd_matrix);
      CompareConfig cfg;
      cfg.variants = {parse_variant(bnd_variant)};
      cfg.eps = bnd_eps;
      cfg.mu = bnd_mu;
      cfg.kappa = bnd_kappa;
      cfg.rip_trials = bnd_trials;
      cfg.seed = seed;
      cfg.with_rip = !bnd_no_rip;
      cfg.fp.tol = tol;
      const std::vector<BoundReport> rows = compare_report(a, {bnd_k}, cfg);
      emit(to_json(rows.at(0)));
    } else if (*rep) {
      ExperimentConfig cfg;
      cfg.preset = rep_preset == "table1"   ? Preset::Table1
                   : rep_preset == "table2" ? Preset::Table2
                   : rep_preset == "table3" ? Preset::Table3
                   : rep_preset == "runtime"
                       ? Preset::RuntimeCompare
                       : throw CLI::ValidationError(
                             "preset", "expected table1|table2|table3|runtime");
      cfg.seed = seed;
      cfg.full = rep_full;
      cfg.tol = tol;
      cfg.out_dir = out_dir;
      const ExperimentResult r = run_experiment(cfg);
      emit({{"csv", r.csv_path}, {"provenance", r.json_path}, {"ok", r.ok}});
    } else if (*orc) {
      const SensingMatrix a = read_matrix_csv(orc_matrix);
      OracleConfig cfg;
      cfg.seed = seed;
      json j = {{"op", orc_op}};
      if (orc_op == "fs")
        j["value"] = oracle_f_s(a, parse_target(orc_target), orc_s, orc_eta, cfg);
      else if (orc_op == "omega")
        j["value"] = oracle_omega(a, orc_s, parse_target(orc_target), cfg);
      else if (orc_op == "sstar")
        j["value"] = oracle_s_star(a, cfg);
      else if (orc_op == "rho")
        j["value"] = oracle_rho(a, orc_s, cfg);
      else
        throw CLI::ValidationError("op", "expected fs|omega|sstar|rho");
      emit(j);
    }
  } catch (const std::exception& e) {
    json err = {{"error", e.what()}};
    std::cerr << err.dump(2) << std::endl;
    return 1;
  }
  return 0;
}
