#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockcert {

struct DimensionMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix. Sizes in this project stay at desk scale
// (np up to a couple of thousand), so dense storage everywhere.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return v_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return v_[i * cols_ + j];
  }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }
  double* row(std::size_t i) { return v_.data() + i * cols_; }
  const double* row(std::size_t i) const { return v_.data() + i * cols_; }

  std::vector<double>& values() { return v_; }
  const std::vector<double>& values() const { return v_; }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

Mat transpose(const Mat& a);
Mat matmul(const Mat& a, const Mat& b);
Mat matmul_tn(const Mat& a, const Mat& b);  // A^T B
Mat gram(const Mat& a);                     // A^T A

std::vector<double> matvec(const Mat& a, const std::vector<double>& x);
std::vector<double> matvec_t(const Mat& a, const std::vector<double>& x);

double norm2(const std::vector<double>& x);
double dot(const std::vector<double>& a, const std::vector<double>& b);

double frobenius_norm(const Mat& a);

// Largest singular value with its singular vector pair.
struct TopSingularPair {
  double sigma = 0.0;
  std::vector<double> left;   // length rows
  std::vector<double> right;  // length cols
  int iterations = 0;
};

// sigma_max(M) to relative accuracy `tol`. Matrices whose short side is
// small are handled exactly through a Jacobi eigensolve of the small Gram
// matrix; larger ones use power iteration on M^T M with a deterministic
// start vector and a Rayleigh-quotient convergence test.
double spectral_norm(const Mat& m, double tol = 1e-9);
TopSingularPair top_singular_pair(const Mat& m, double tol = 1e-9);

// All singular values, descending, by one-sided Jacobi. Desk-scale helper;
// cost grows cubically.
std::vector<double> singular_values(const Mat& m);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi.
// eigvals descending; columns of eigvecs are the matching eigenvectors.
void jacobi_eig_sym(const Mat& s, std::vector<double>& eigvals, Mat& eigvecs);

// Householder QR with column pivoting of X (r x c):  X P = Q R.
struct PivotedQr {
  Mat q;                          // r x min(r,c), orthonormal columns
  Mat r;                          // min(r,c) x c, upper triangular
  std::vector<std::size_t> perm;  // column permutation
  int rank = 0;                   // w.r.t. rel_tol * |R(0,0)|
};
PivotedQr qr_pivoted(const Mat& x, double rel_tol = 1e-12);

// Orthonormal basis of Ker(A) as columns (c x d). Materializes a full Q
// factor, so meant for small instances (tests and oracles).
Mat kernel_basis(const Mat& a, double rel_tol = 1e-10);

// Solves S X = B for symmetric positive definite S in place; returns false
// if the factorization breaks down.
bool cholesky_solve_spd(Mat s, Mat& b);

// Residual norm min_z ||A z - y||_2 via CGLS.
double least_squares_residual(const Mat& a, const std::vector<double>& y,
                              int max_iter = 0, double tol = 1e-12);

}  // namespace blockcert
