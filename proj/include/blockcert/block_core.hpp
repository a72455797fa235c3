#pragma once

#include "blockcert/types.hpp"

namespace blockcert {

enum class BlockNorm { B1, B2, BInf };

// Block-l_q norm: (sum_i ||v_i||_2^q)^(1/q) for q in {1,2}, max_i ||v_i||_2
// for q = inf. B2 coincides with the plain Euclidean norm.
double block_norm(const BlockVector& v, BlockNorm q);

// Euclidean norm of block i.
double block_norm2_of(const BlockVector& v, int i);

// {i : ||v_i||_2 > tol}.
BlockIndexSet block_support(const BlockVector& v, double tol = 1e-8);

// {i : ||v_i||_2 > beta/2}; ties fall outside (strict inequality).
BlockIndexSet threshold_support(const BlockVector& v, double beta);

// Proximal operator of tau*||.||_b1: block i scales by
// max(0, 1 - tau/||v_i||_2).
BlockVector block_soft_threshold(const BlockVector& v, double tau);

// Rescales every column to unit Euclidean norm. Throws ZeroColumnError when
// a column norm is below `floor`.
SensingMatrix normalize_columns(const SensingMatrix& a, double floor = 1e-12);

// Returns B with orthonormal rows (B B^T = I) and Ker(B) = Ker(A), from the
// economy QR factorization of A^T. Requires full row rank: throws
// RankDeficientError when the numerical rank at tolerance
// rel_tol * sigma_max(A) falls short of m.
SensingMatrix orthonormalize_rows(const SensingMatrix& a,
                                  double rel_tol = 1e-10);

}  // namespace blockcert
