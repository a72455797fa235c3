#include "blockcert/block_core.hpp"

#include <algorithm>
#include <cmath>

namespace blockcert {

double block_norm2_of(const BlockVector& v, int i) {
  const double* b = v.block(i);
  double acc = 0.0;
  for (int t = 0; t < v.structure.n; ++t) acc += b[t] * b[t];
  return std::sqrt(acc);
}

double block_norm(const BlockVector& v, BlockNorm q) {
  const int p = v.structure.p;
  switch (q) {
    case BlockNorm::B1: {
      double acc = 0.0;
      for (int i = 0; i < p; ++i) acc += block_norm2_of(v, i);
      return acc;
    }
    case BlockNorm::B2: {
      double acc = 0.0;
      for (double x : v.values) acc += x * x;
      return std::sqrt(acc);
    }
    case BlockNorm::BInf: {
      double best = 0.0;
      for (int i = 0; i < p; ++i) best = std::max(best, block_norm2_of(v, i));
      return best;
    }
  }
  return 0.0;
}

BlockIndexSet block_support(const BlockVector& v, double tol) {
  BlockIndexSet s;
  for (int i = 0; i < v.structure.p; ++i)
    if (block_norm2_of(v, i) > tol) s.indices.push_back(i);
  return s;
}

BlockIndexSet threshold_support(const BlockVector& v, double beta) {
  if (!(beta > 0)) throw InvalidQueryError("threshold_support: beta must be > 0");
  BlockIndexSet s;
  for (int i = 0; i < v.structure.p; ++i)
    if (block_norm2_of(v, i) > beta / 2.0) s.indices.push_back(i);
  return s;
}

BlockVector block_soft_threshold(const BlockVector& v, double tau) {
  if (tau < 0) throw InvalidQueryError("block_soft_threshold: tau must be >= 0");
  BlockVector out(v.structure);
  const int n = v.structure.n;
  for (int i = 0; i < v.structure.p; ++i) {
    const double nrm = block_norm2_of(v, i);
    const double scale = nrm > tau ? 1.0 - tau / nrm : 0.0;
    const double* src = v.block(i);
    double* dst = out.block(i);
    for (int t = 0; t < n; ++t) dst[t] = scale * src[t];
  }
  return out;
}

SensingMatrix normalize_columns(const SensingMatrix& a, double floor) {
  SensingMatrix out = a;
  const std::size_t rows = a.a.rows(), cols = a.a.cols();
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += a.a(i, j) * a.a(i, j);
    const double nrm = std::sqrt(acc);
    if (nrm < floor)
      throw ZeroColumnError("normalize_columns: column " + std::to_string(j) +
                            " has norm below the floor");
    for (std::size_t i = 0; i < rows; ++i) out.a(i, j) = a.a(i, j) / nrm;
  }
  return out;
}

SensingMatrix orthonormalize_rows(const SensingMatrix& a, double rel_tol) {
  const std::size_t m = a.a.rows();
  if (m > a.a.cols())
    throw RankDeficientError("orthonormalize_rows: more rows than columns");
  PivotedQr f = qr_pivoted(transpose(a.a));
  const double sigma_max = spectral_norm(a.a);
  double min_diag = std::abs(f.r(0, 0));
  for (std::size_t i = 1; i < f.r.rows(); ++i)
    min_diag = std::min(min_diag, std::abs(f.r(i, i)));
  if (min_diag <= rel_tol * sigma_max)
    throw RankDeficientError("orthonormalize_rows: numerical rank below m");
  SensingMatrix out(a.m, a.structure);
  out.a = transpose(f.q);
  return out;
}

}  // namespace blockcert
