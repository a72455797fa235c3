#pragma once

#include <optional>
#include <vector>

#include "blockcert/inner_solver.hpp"
#include "blockcert/types.hpp"

namespace blockcert {

// Which goodness measure the fixed point certifies:
//   Omega2    -> g-family, Q = A, spectral-norm penalty, bounds omega_2(A,s)
//   OmegaBInf -> h-family, Q = A^T A, block-sum penalty, bounds
//                omega_binf(A^T A, s)
enum class OmegaTarget { Omega2, OmegaBInf };

enum class FpStrategy { Naive, Bisection, Hybrid };

struct OmegaQuery {
  const SensingMatrix* a = nullptr;
  double s = 2.0;  // must satisfy 1 < s < s_*
  OmegaTarget target = OmegaTarget::Omega2;
};

struct FixedPointConfig {
  double tol = 1e-5;
  double eta_lo = 0.1;
  double eta_hi = 10.0;
  double eta0 = 0.1;  // naive iteration start
  FpStrategy strategy = FpStrategy::Hybrid;
  int max_outer = 200;
  int bracket_retries = 20;
  InnerOptions inner;
  bool check_s_star = true;  // reject s >= s_* before iterating
};

// One inner evaluation: value of g_{s,i}(eta) (or h), with the bracket that
// was current when it ran. index == -1 marks a full max_i sweep.
struct FpRecord {
  double eta = 0.0;
  double value = 0.0;
  int index = -1;
  double lo = 0.0;
  double hi = 0.0;
};

struct FixedPointTrace {
  FpStrategy strategy = FpStrategy::Hybrid;
  std::vector<FpRecord> records;
  double eta_star = 0.0;
  double omega_lower_bound = 0.0;  // 1 / eta_star
  bool converged = false;
  std::vector<Mat> certificates;        // final per-index multipliers
  std::vector<double> final_per_index;  // g_{s,i}(eta_star) for all i
  double wall_seconds = 0.0;
  long long inner_iterations = 0;
  int evaluations = 0;  // number of per-index inner solves
};

struct GEvalResult {
  double value = 0.0;
  std::vector<double> per_index;
};

// g_s(eta) = max_i g_{s,i}(eta): per-index inner solves in parallel, with
// warm-start certificates carried in/out through `warm` when given. Inner
// solutions are upper bounds, so the value upper-bounds the exact g_s(eta);
// that keeps the derived omega bound on the safe side.
GEvalResult eval_g(const SensingMatrix& a, double s, double eta,
                   std::vector<Mat>* warm, const InnerOptions& opts = {});

// Same with Q = A^T A and the block-sum penalty (h-family).
GEvalResult eval_h(const SensingMatrix& a, double s, double eta,
                   std::vector<Mat>* warm, const InnerOptions& opts = {});

FixedPointTrace fp_naive(const OmegaQuery& query, const FixedPointConfig& cfg);
FixedPointTrace fp_bisection(const OmegaQuery& query,
                             const FixedPointConfig& cfg);
FixedPointTrace fp_hybrid(const OmegaQuery& query, const FixedPointConfig& cfg);

// Dispatches on cfg.strategy; omega_lb = 1/eta_star is a certified lower
// bound on the queried goodness measure. A pre-computed verification result
// skips the internal s < s_* check.
std::pair<double, FixedPointTrace> omega_lower_bound(
    const OmegaQuery& query, const FixedPointConfig& cfg,
    const CertifierResult* verified = nullptr);

}  // namespace blockcert
