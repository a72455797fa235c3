#pragma once

#include <vector>

#include "blockcert/types.hpp"

namespace blockcert {

// Per-index min-max subproblem
//
//   min_{P_i}  w * max_j ||delta_ij I_n - P_i^T Q_j||_2  +  penalty(P_i)
//
// with penalty NONE (verification: the max term alone is the objective),
// SPECTRAL (||P_i||_2) or BLOCKSUM (sum_l ||P_i^l||_2 over the n-row blocks
// of P_i). Every feasible P_i certifies an upper bound on the infimum, so
// even unconverged solves return usable values.
enum class InnerPenalty { None, Spectral, BlockSum };

struct InnerProblem {
  const Mat* q = nullptr;   // q_rows x (n*p); A itself or the Gram matrix
  BlockStructure structure;
  int index = 0;            // i, 0-based
  double weight = 0.0;      // s*eta; irrelevant when penalty == None
  InnerPenalty penalty = InnerPenalty::None;
};

struct InnerOptions {
  double tol = 1e-5;        // absolute gap target on the objective
  int max_iter = 6000;
  double active_tol = 1e-6; // j's within this of the max get averaged
  bool record_history = false;
};

struct InnerSolution {
  Mat p;                    // q_rows x n certificate multiplier
  double objective = 0.0;   // w*maxterm + penalty_value (maxterm when NONE)
  double maxterm = 0.0;
  double penalty_value = 0.0;
  int iterations = 0;
  double first_order_residual = 0.0;  // remaining-gap estimate at exit
  bool converged = false;
  std::vector<double> best_objective_history;  // per iteration, if recorded
};

struct InnerObjectiveValue {
  double objective = 0.0;
  double maxterm = 0.0;
  double penalty_value = 0.0;
};

// Exact objective at a given multiplier; maxterm scans all j.
InnerObjectiveValue inner_objective(const InnerProblem& prob, const Mat& p);

// Subgradient descent with Polyak-style adaptive steps; subgradients of the
// active spectral terms are averaged. Always returns the best iterate.
InnerSolution solve_inner(const InnerProblem& prob,
                          const InnerOptions& opts = {},
                          const Mat* warm = nullptr);

struct VerifyOptions {
  InnerOptions inner;
  bool normalize = true;        // unit-norm columns first
  bool qr = true;               // then replace A by its row-orthonormalization
  double unconditional_tol = 1e-8;
};

struct CertifierResult {
  double s_star = 0.0;          // +inf when unconditional
  int k_star = 0;               // floor(s_star / 2)
  bool unconditional = false;   // trivial kernel: every objective ~ 0
  std::vector<InnerSolution> per_index;
  bool normalized = false;
  bool qr_applied = false;
};

// Certified lower bound s_* = 1 / (max_i min_{P_i} max_j ||...||_2) on the
// kernel ratio s^*. Per-index solves run in parallel.
CertifierResult verify_s_star(const SensingMatrix& a,
                              const VerifyOptions& opts = {});

}  // namespace blockcert
