#pragma once

#include <cstdint>

#include "blockcert/fixedpoint.hpp"
#include "blockcert/types.hpp"

namespace blockcert {

// Brute-force reference computations of the exact quantities behind the
// relaxations. Desk scale only: the size caps are enforced, not advisory.
// Every value is deterministic for a fixed seed and config.
struct OracleConfig {
  int direction_samples = 16;  // per-block sphere directions (>= 8)
  int restarts = 60;           // random multi-starts (>= 1)
  double tol = 1e-6;
  std::uint64_t seed = 12345;
};

// Lower approximation of
//   f_s(eta) = max ||z||_binf  s.t.  ||Q z||_diamond <= 1, ||z||_b1 <= s eta
// by multi-start ascent on the scale-invariant ratio form. Values only grow
// as direction_samples grows (nested starts). Requires n*p <= 12.
double oracle_f_s(const SensingMatrix& a, OmegaTarget target, double s,
                  double eta, const OracleConfig& cfg = {});

// 1/eta* from bisection on sign(f_s(eta) - eta). Since the f_s oracle
// under-estimates, this over-estimates the true omega: an upper ceiling for
// validating the engine's certified lower bounds.
double oracle_omega(const SensingMatrix& a, double s, OmegaTarget target,
                    const OracleConfig& cfg = {});

// Upper estimate of s^* = min ||z||_b1 / ||z||_binf over Ker(A) \ {0}
// (sampled kernel vectors only give candidate ratios). +inf when the kernel
// is trivial. Requires kernel dimension <= 6.
double oracle_s_star(const SensingMatrix& a, const OracleConfig& cfg = {});

// Upper estimate of rho_s(A) = min ||A z||_2 / ||z||_2 over
// ||z||_b1^2 <= s ||z||_2^2, from feasible multi-start descent.
// Requires n*p <= 12.
double oracle_rho(const SensingMatrix& a, double s,
                  const OracleConfig& cfg = {});

}  // namespace blockcert
