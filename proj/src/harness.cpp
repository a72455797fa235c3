#include "blockcert/harness.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "blockcert/block_core.hpp"
#include "blockcert/io.hpp"
#include "blockcert/rng.hpp"
#include "blockcert/version.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blockcert {

using nlohmann::json;

SensingMatrix generate(const EnsembleSpec& spec) {
  if (spec.m < 1) throw InvalidQueryError("generate: m must be >= 1");
  SensingMatrix a(spec.m, make_structure(spec.n, spec.p));
  SplitMix64 rng = substream(spec.seed, 0);
  for (std::size_t i = 0; i < a.a.rows(); ++i)
    for (std::size_t j = 0; j < a.a.cols(); ++j)
      a.a(i, j) = spec.kind == EnsembleKind::Gaussian ? rng.normal()
                                                      : rng.sign();
  if (spec.normalize) a = normalize_columns(a);
  return a;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const char* preset_name(Preset p) {
  switch (p) {
    case Preset::Table1: return "table1";
    case Preset::Table2: return "table2";
    case Preset::Table3: return "table3";
    case Preset::RuntimeCompare: return "runtime";
    case Preset::Custom: return "custom";
  }
  return "?";
}

std::string cell(double v) {
  if (!std::isfinite(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

json config_echo(const ExperimentConfig& cfg) {
  return {{"preset", preset_name(cfg.preset)},
          {"seed", cfg.seed},
          {"full", cfg.full},
          {"strategy", cfg.strategy == FpStrategy::Naive      ? "naive"
                       : cfg.strategy == FpStrategy::Bisection ? "bisect"
                                                                : "hybrid"},
          {"tol", cfg.tol},
          {"rip_trials", cfg.rip_trials},
          {"eps", cfg.eps},
          {"inner_tol", cfg.inner.tol},
          {"inner_max_iter", cfg.inner.max_iter},
          {"version", kVersion},
#ifdef _OPENMP
          {"threads", omp_get_max_threads()}};
#else
          {"threads", 1}};
#endif
}

struct Sink {
  std::ofstream csv;
  json cells = json::array();
};

// s_* table: block model next to the blind n=1 sparse model on the same
// matrix.
void run_table1(const ExperimentConfig& cfg, Sink& sink) {
  sink.csv << "m,s_star,k_star,n_k_star,sparse_s_star,sparse_k_star\n";
  const std::vector<int> ms =
      !cfg.m_values.empty() ? cfg.m_values
      : cfg.full ? std::vector<int>{72, 96, 120, 144, 168, 192}
                 : std::vector<int>{72, 96};
  for (std::size_t idx = 0; idx < ms.size(); ++idx) {
    const int m = ms[idx];
    const auto t0 = Clock::now();
    json cell_info = {{"m", m}};
    try {
      EnsembleSpec spec{EnsembleKind::Gaussian, m, 4, 60,
                        cfg.seed + idx, true};
      SensingMatrix a = generate(spec);

      VerifyOptions vo;
      vo.inner = cfg.inner;
      vo.normalize = false;  // generated column-normalized already
      CertifierResult block = verify_s_star(a, vo);

      SensingMatrix flat(m, make_structure(1, a.structure.dim()));
      flat.a = a.a;
      CertifierResult sparse = verify_s_star(flat, vo);

      sink.csv << m << ',' << cell(block.s_star) << ',' << block.k_star << ','
               << 4 * block.k_star << ',' << cell(sparse.s_star) << ','
               << sparse.k_star << '\n';
      cell_info["s_star"] = block.s_star;
      cell_info["k_star"] = block.k_star;
      cell_info["sparse_s_star"] = sparse.s_star;
      cell_info["sparse_k_star"] = sparse.k_star;
    } catch (const std::exception& e) {
      sink.csv << m << ",-,-,-,-,-\n";
      cell_info["error"] = e.what();
    }
    cell_info["wall_seconds"] = seconds_since(t0);
    sink.cells.push_back(std::move(cell_info));
  }
}

// omega_2(A,2k) and the Monte-Carlo block-RIP estimate per (m, k) cell;
// table3 additionally emits the l2 error bound 2 sqrt(2k) eps / omega.
void run_table23(const ExperimentConfig& cfg, Sink& sink, bool with_bound) {
  sink.csv << (with_bound ? "m,k,s_star,omega2,l2_bound\n"
                          : "m,k,s_star,omega2,delta_hat,rip_applies\n");
  const std::vector<int> ms =
      !cfg.m_values.empty() ? cfg.m_values
      : cfg.full ? std::vector<int>{72, 96, 120, 144, 168, 192}
                 : std::vector<int>{72, 96};
  const std::vector<int> ks =
      !cfg.k_values.empty() ? cfg.k_values : std::vector<int>{1, 2, 3, 4, 5};

  for (std::size_t idx = 0; idx < ms.size(); ++idx) {
    const int m = ms[idx];
    EnsembleSpec spec{EnsembleKind::Gaussian, m, 4, 60, cfg.seed + idx, true};
    SensingMatrix a = generate(spec);

    VerifyOptions vo;
    vo.inner = cfg.inner;
    vo.normalize = false;
    CertifierResult cert = verify_s_star(a, vo);

    for (int k : ks) {
      const auto t0 = Clock::now();
      json cell_info = {{"m", m}, {"k", k}, {"s_star", cert.s_star}};
      try {
        const bool certified =
            cert.unconditional || 2.0 * k < cert.s_star;
        double omega = 0.0;
        if (certified) {
          OmegaQuery q;
          q.a = &a;
          q.s = 2.0 * k;
          q.target = OmegaTarget::Omega2;
          FixedPointConfig fp;
          fp.tol = cfg.tol;
          fp.strategy = cfg.strategy;
          fp.inner = cfg.inner;
          auto [lb, trace] = omega_lower_bound(q, fp, &cert);
          omega = lb;
          cell_info["fp_converged"] = trace.converged;
          cell_info["inner_iterations"] = trace.inner_iterations;
        }
        if (with_bound) {
          sink.csv << m << ',' << k << ',' << cell(cert.s_star) << ',';
          if (certified)
            sink.csv << cell(omega) << ','
                     << cell(2.0 * std::sqrt(2.0 * k) * cfg.eps / omega)
                     << '\n';
          else
            sink.csv << "-,-\n";
        } else {
          const double delta =
              2 * k <= a.structure.p
                  ? block_rip_mc(a, k, cfg.rip_trials, cfg.seed + idx)
                  : std::nan("");
          sink.csv << m << ',' << k << ',' << cell(cert.s_star) << ',';
          if (certified)
            sink.csv << cell(omega);
          else
            sink.csv << '-';
          sink.csv << ',';
          if (std::isnan(delta))
            sink.csv << '-';
          else
            sink.csv << cell(delta);
          sink.csv << ',' << (rip_bound(delta, cfg.eps).valid ? "yes" : "no")
                   << '\n';
          if (!std::isnan(delta)) cell_info["delta_hat"] = delta;
        }
        if (certified) cell_info["omega2"] = omega;
        cell_info["certified"] = certified;
      } catch (const std::exception& e) {
        sink.csv << m << ',' << k << (with_bound ? ",-,-,-\n" : ",-,-,-,-\n");
        cell_info["error"] = e.what();
      }
      cell_info["wall_seconds"] = seconds_since(t0);
      sink.cells.push_back(std::move(cell_info));
    }
  }
}

// Wall-clock comparison of the three strategies on the 72 x 120 draw
// (n = 3, p = 40) with the standard bracket; ranking is the deliverable,
// not absolute seconds.
void run_runtime(const ExperimentConfig& cfg, Sink& sink) {
  sink.csv << "strategy,eta_star,omega_lower_bound,converged,wall_seconds,"
              "inner_iterations,evaluations\n";
  EnsembleSpec spec{EnsembleKind::Gaussian, 72, 3, 40, cfg.seed, true};
  SensingMatrix a = generate(spec);

  VerifyOptions vo;
  vo.inner = cfg.inner;
  vo.normalize = false;
  CertifierResult cert = verify_s_star(a, vo);

  OmegaQuery q;
  q.a = &a;
  q.s = 2.0;
  q.target = OmegaTarget::Omega2;
  for (FpStrategy st :
       {FpStrategy::Naive, FpStrategy::Bisection, FpStrategy::Hybrid}) {
    const char* name = st == FpStrategy::Naive      ? "naive"
                       : st == FpStrategy::Bisection ? "bisect"
                                                     : "hybrid";
    json cell_info = {{"strategy", name}};
    try {
      FixedPointConfig fp;
      fp.tol = cfg.tol;
      fp.strategy = st;
      fp.inner = cfg.inner;
      auto [lb, trace] = omega_lower_bound(q, fp, &cert);
      sink.csv << name << ',' << cell(trace.eta_star) << ',' << cell(lb) << ','
               << (trace.converged ? "yes" : "no") << ','
               << cell(trace.wall_seconds) << ',' << trace.inner_iterations
               << ',' << trace.evaluations << '\n';
      cell_info["eta_star"] = trace.eta_star;
      cell_info["wall_seconds"] = trace.wall_seconds;
      cell_info["converged"] = trace.converged;
    } catch (const std::exception& e) {
      sink.csv << name << ",-,-,-,-,-,-\n";
      cell_info["error"] = e.what();
    }
    sink.cells.push_back(std::move(cell_info));
  }
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  ExperimentResult out;
  const std::string base = cfg.out_dir + "/" + preset_name(cfg.preset);
  out.csv_path = base + ".csv";
  out.json_path = base + ".json";

  Sink sink;
  sink.csv.open(out.csv_path);
  if (!sink.csv) throw IoError("cannot write " + out.csv_path);

  switch (cfg.preset) {
    case Preset::Table1:
      run_table1(cfg, sink);
      break;
    case Preset::Table2:
      run_table23(cfg, sink, false);
      break;
    case Preset::Table3:
      run_table23(cfg, sink, true);
      break;
    case Preset::RuntimeCompare:
      run_runtime(cfg, sink);
      break;
    case Preset::Custom:
      throw InvalidQueryError("custom preset: use the library API directly");
  }

  for (const auto& c : sink.cells)
    if (c.contains("error")) out.ok = false;

  json prov = {{"config", config_echo(cfg)}, {"cells", sink.cells}};
  std::ofstream js(out.json_path);
  if (!js) throw IoError("cannot write " + out.json_path);
  js << prov.dump(2) << '\n';
  return out;
}

}  // namespace blockcert
