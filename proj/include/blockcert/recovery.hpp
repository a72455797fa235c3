#pragma once

#include <string>
#include <vector>

#include "blockcert/types.hpp"

namespace blockcert {

// The three convex recovery programs plus the noise-free equality program:
//   BsBp:      min ||z||_b1  s.t. ||y - A z||_2 <= eps
//   BsDs:      min ||z||_b1  s.t. ||A^T (y - A z)||_binf <= mu
//   BsLasso:   min 1/2 ||y - A z||_2^2 + mu ||z||_b1
//   NoiseFree: min ||z||_b1  s.t. A z = y
enum class RecoveryVariant { BsBp, BsDs, BsLasso, NoiseFree };

const char* variant_name(RecoveryVariant v);

struct RecoveryOptions {
  double feas_tol = 1e-7;  // relative feasibility tolerance
  double obj_tol = 1e-6;   // relative duality-gap tolerance
  double kkt_tol = 1e-6;   // absolute KKT residual (BS-LASSO)
  int max_iter = 50000;
  int check_interval = 10;
  bool record_objectives = false;
};

struct RecoveryResult {
  BlockVector xhat;
  double objective = 0.0;  // block-l1 norm (BS-LASSO: full objective)
  double feasibility_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  double duality_gap = 0.0;   // BP / DS / noise-free certificates
  double kkt_residual = 0.0;  // BS-LASSO certificate
  std::string status;         // "converged" or "max_iterations"
  std::vector<double> objective_history;  // filled when requested
};

RecoveryResult solve_bsbp(const SensingMatrix& a, const std::vector<double>& y,
                          double eps, const RecoveryOptions& opts = {});
RecoveryResult solve_bsds(const SensingMatrix& a, const std::vector<double>& y,
                          double mu, const RecoveryOptions& opts = {});
RecoveryResult solve_bslasso(const SensingMatrix& a,
                             const std::vector<double>& y, double mu,
                             const RecoveryOptions& opts = {});
RecoveryResult solve_noisefree(const SensingMatrix& a,
                               const std::vector<double>& y,
                               const RecoveryOptions& opts = {});

}  // namespace blockcert
