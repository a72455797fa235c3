#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockcert/fixedpoint.hpp"
#include "blockcert/recovery.hpp"
#include "blockcert/types.hpp"

namespace blockcert {

// Block-linf error bound with omega replaced by its certified lower bound:
//   BS-BP:    2 eps / omega_2(A, 2k)
//   BS-DS:    2 mu  / omega_binf(A^T A, 2k)
//   BS-LASSO: (1+kappa) mu / omega_binf(A^T A, 2k/(1-kappa))
double bound_binf(RecoveryVariant v, double omega_lb, double noise_param,
                  double kappa = 0.0);

// Matching l2 bounds: 2 sqrt(2k) eps / omega, 2 sqrt(2k) mu / omega, and
// sqrt(2k/(1-kappa)) (1+kappa) mu / omega.
double bound_l2(RecoveryVariant v, double omega_lb, double noise_param,
                double kappa, int k);

// Monte-Carlo block-RIP estimate: max over sampled 2k-block column
// submatrices A_T of max(sigma_max(A_T)^2 - 1, 1 - sigma_min(A_T)^2).
// Under-estimates the exact delta_2k; deterministic per (seed, trial) and
// nested in the trial count.
double block_rip_mc(const SensingMatrix& a, int k, int trials,
                    std::uint64_t seed);

// 4 sqrt(1+delta) / (1 - (1+sqrt 2) delta) * eps, valid only below
// delta < sqrt(2) - 1.
struct RipBound {
  bool valid = false;
  double value = 0.0;
};
RipBound rip_bound(double delta, double eps);

struct BoundReport {
  RecoveryVariant variant = RecoveryVariant::BsBp;
  int k = 0;
  double s_used = 0.0;
  bool certified = false;  // 2k (or 2k/(1-kappa)) < s_*
  double omega_lb = 0.0;
  double noise_param = 0.0;
  double kappa = 0.0;
  double binf_bound = 0.0;
  double l2_bound = 0.0;
  std::optional<double> rip_delta_hat;
  RipBound rip;
  std::string note;  // per-row failure text; empty when the row is clean
};

struct CompareConfig {
  std::vector<RecoveryVariant> variants{RecoveryVariant::BsBp};
  double eps = 1.0;
  double mu = 1.0;
  double kappa = 0.5;
  int rip_trials = 1000;
  std::uint64_t seed = 1;
  FixedPointConfig fp;
  bool with_rip = true;
};

// One row per (k, variant); rows with s_used >= s_* come back uncertified
// with empty bounds, mirroring the dash cells of the reference tables.
std::vector<BoundReport> compare_report(const SensingMatrix& a,
                                        const std::vector<int>& k_values,
                                        const CompareConfig& cfg);

}  // namespace blockcert
