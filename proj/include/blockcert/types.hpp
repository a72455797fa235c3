#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "blockcert/linalg.hpp"

namespace blockcert {

struct ZeroColumnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct RankDeficientError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidQueryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidKError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BracketFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoBracketError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct KernelTooLargeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonPositiveOmegaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Contiguous equal-length block layout: p blocks of n coordinates each.
struct BlockStructure {
  int n = 1;  // block length
  int p = 1;  // number of blocks

  int dim() const { return n * p; }
  bool operator==(const BlockStructure&) const = default;
};

inline BlockStructure make_structure(int n, int p) {
  if (n < 1 || p < 1)
    throw InvalidQueryError("block structure needs n >= 1 and p >= 1");
  return BlockStructure{n, p};
}

// Length n*p vector with block-wise norm and support semantics.
struct BlockVector {
  BlockStructure structure;
  std::vector<double> values;

  BlockVector() = default;
  explicit BlockVector(BlockStructure bs)
      : structure(bs), values(static_cast<std::size_t>(bs.dim()), 0.0) {}
  BlockVector(BlockStructure bs, std::vector<double> v)
      : structure(bs), values(std::move(v)) {
    if (values.size() != static_cast<std::size_t>(bs.dim()))
      throw DimensionMismatchError("block vector length must equal n*p");
  }

  const double* block(int i) const {
    return values.data() + static_cast<std::size_t>(i) * structure.n;
  }
  double* block(int i) {
    return values.data() + static_cast<std::size_t>(i) * structure.n;
  }
};

// Dense m x (n*p) sensing matrix; column block j spans columns
// j*n .. j*n + n - 1 (0-based).
struct SensingMatrix {
  int m = 0;
  BlockStructure structure;
  Mat a;

  SensingMatrix() = default;
  SensingMatrix(int rows, BlockStructure bs)
      : m(rows), structure(bs),
        a(static_cast<std::size_t>(rows), static_cast<std::size_t>(bs.dim())) {
    if (rows < 1) throw InvalidQueryError("sensing matrix needs m >= 1");
  }
  SensingMatrix(BlockStructure bs, Mat mat)
      : m(static_cast<int>(mat.rows())), structure(bs), a(std::move(mat)) {
    if (a.cols() != static_cast<std::size_t>(bs.dim()))
      throw DimensionMismatchError("sensing matrix must have n*p columns");
  }
};

// Sorted set of 0-based block indices.
struct BlockIndexSet {
  std::vector<int> indices;

  bool contains(int i) const {
    for (int v : indices) {
      if (v == i) return true;
      if (v > i) return false;
    }
    return false;
  }
  std::size_t size() const { return indices.size(); }
  bool operator==(const BlockIndexSet&) const = default;
};

}  // namespace blockcert
