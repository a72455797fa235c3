#include "blockcert/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "blockcert/kernels.hpp"
#include "blockcert/rng.hpp"

namespace blockcert {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw DimensionMismatchError(what);
}

constexpr std::size_t kSmallSide = 16;  // exact Jacobi path below this

}  // namespace

Mat transpose(const Mat& a) {
  Mat t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Mat matmul(const Mat& a, const Mat& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  // C = A B = (A^T)^T B with the shared kernel.
  Mat at = transpose(a);
  Mat c(a.rows(), b.cols());
  kernels::gemm_tn(at.data(), at.rows(), at.cols(), b.data(), b.cols(),
                   c.data());
  return c;
}

Mat matmul_tn(const Mat& a, const Mat& b) {
  require(a.rows() == b.rows(), "matmul_tn: row counts differ");
  Mat c(a.cols(), b.cols());
  kernels::gemm_tn(a.data(), a.rows(), a.cols(), b.data(), b.cols(), c.data());
  return c;
}

Mat gram(const Mat& a) { return matmul_tn(a, a); }

std::vector<double> matvec(const Mat& a, const std::vector<double>& x) {
  require(a.cols() == x.size(), "matvec: size mismatch");
  std::vector<double> y(a.rows());
  kernels::matvec(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

std::vector<double> matvec_t(const Mat& a, const std::vector<double>& x) {
  require(a.rows() == x.size(), "matvec_t: size mismatch");
  std::vector<double> y(a.cols());
  kernels::matvec_t(a.data(), a.rows(), a.cols(), x.data(), y.data());
  return y;
}

double norm2(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double frobenius_norm(const Mat& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v * v;
  return std::sqrt(acc);
}

void jacobi_eig_sym(const Mat& s, std::vector<double>& eigvals, Mat& eigvecs) {
  require(s.rows() == s.cols(), "jacobi_eig_sym: not square");
  const std::size_t n = s.rows();
  Mat a = s;
  Mat v = Mat::identity(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-30 * (1.0 + frobenius_norm(a))) break;
    for (std::size_t pp = 0; pp < n; ++pp) {
      for (std::size_t qq = pp + 1; qq < n; ++qq) {
        const double apq = a(pp, qq);
        if (std::abs(apq) <=
            1e-18 * (std::abs(a(pp, pp)) + std::abs(a(qq, qq)) + 1e-300))
          continue;
        const double theta = (a(qq, qq) - a(pp, pp)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, pp), akq = a(k, qq);
          a(k, pp) = c * akp - sn * akq;
          a(k, qq) = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(pp, k), aqk = a(qq, k);
          a(pp, k) = c * apk - sn * aqk;
          a(qq, k) = sn * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, pp), vkq = v(k, qq);
          v(k, pp) = c * vkp - sn * vkq;
          v(k, qq) = sn * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<double> diag(n);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });
  eigvals.resize(n);
  eigvecs = Mat(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    eigvals[c] = diag[order[c]];
    for (std::size_t r = 0; r < n; ++r) eigvecs(r, c) = v(r, order[c]);
  }
}

namespace {

// Deterministic, dense start vector for the power method.
std::vector<double> power_start(std::size_t n) {
  SplitMix64 rng(0x5EED5EED5EED5EEDULL ^ (0x9E3779B97F4A7C15ULL * n));
  std::vector<double> v(n);
  double nrm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = 0.5 + rng.uniform01();
    nrm += v[i] * v[i];
  }
  nrm = std::sqrt(nrm);
  for (double& x : v) x /= nrm;
  return v;
}

TopSingularPair small_top_pair(const Mat& m) {
  TopSingularPair out;
  const bool wide = m.rows() < m.cols();
  // Gram over the short side.
  Mat g = wide ? matmul_tn(transpose(m), transpose(m)) : gram(m);
  std::vector<double> ev;
  Mat vecs;
  jacobi_eig_sym(g, ev, vecs);
  const double lmax = std::max(0.0, ev.empty() ? 0.0 : ev[0]);
  out.sigma = std::sqrt(lmax);
  std::vector<double> w(g.rows());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = vecs(i, 0);
  if (!wide) {
    out.right = w;
    out.left = matvec(m, w);
  } else {
    out.left = w;
    out.right = matvec_t(m, w);
  }
  // Normalize the derived vector; fall back to axis vectors at sigma == 0.
  std::vector<double>& derived = wide ? out.right : out.left;
  const double dn = norm2(derived);
  if (dn > 0) {
    for (double& x : derived) x /= dn;
  } else if (!derived.empty()) {
    derived.assign(derived.size(), 0.0);
    derived[0] = 1.0;
  }
  out.iterations = 0;
  return out;
}

}  // namespace

TopSingularPair top_singular_pair(const Mat& m, double tol) {
  TopSingularPair out;
  if (m.rows() == 0 || m.cols() == 0) return out;
  if (std::min(m.rows(), m.cols()) <= kSmallSide) return small_top_pair(m);

  std::vector<double> v = power_start(m.cols());
  std::vector<double> w;
  // Rayleigh quotients increase monotonically; an Aitken estimate of the
  // geometric tail decides convergence, since the per-step change alone
  // understates the remaining gap when the top two singular values are
  // close.
  double s2_prev = -1.0, d_prev = -1.0;
  const int max_iter = 20000;
  int it = 0;
  for (; it < max_iter; ++it) {
    w = matvec(m, v);
    const double s2 = dot(w, w);
    if (s2 == 0.0) {
      out.sigma = 0.0;
      out.right = v;
      out.left.assign(m.rows(), 0.0);
      if (!out.left.empty()) out.left[0] = 1.0;
      out.iterations = it + 1;
      return out;
    }
    if (s2_prev >= 0.0) {
      const double d = s2 - s2_prev;
      if (d <= 0.25 * tol * s2) break;
      if (d_prev > 0.0 && d <= tol * s2) {
        const double rho = d / d_prev;
        if (rho < 1.0 && d * rho / (1.0 - rho) <= 0.25 * tol * s2) break;
      }
      d_prev = d;
    }
    s2_prev = s2;
    std::vector<double> u = matvec_t(m, w);
    const double un = norm2(u);
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] / un;
  }
  w = matvec(m, v);
  const double sigma = norm2(w);
  out.sigma = sigma;
  out.right = v;
  out.left = w;
  if (sigma > 0)
    for (double& x : out.left) x /= sigma;
  out.iterations = it + 1;
  return out;
}

double spectral_norm(const Mat& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  if (std::min(m.rows(), m.cols()) <= kSmallSide) {
    const bool wide = m.rows() < m.cols();
    Mat g = wide ? matmul_tn(transpose(m), transpose(m)) : gram(m);
    std::vector<double> ev;
    Mat vecs;
    jacobi_eig_sym(g, ev, vecs);
    return std::sqrt(std::max(0.0, ev.empty() ? 0.0 : ev[0]));
  }
  return top_singular_pair(m, tol).sigma;
}

std::vector<double> singular_values(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return {};
  // One-sided Jacobi on the matrix with rows >= cols.
  Mat a = m.rows() >= m.cols() ? m : transpose(m);
  const std::size_t r = a.rows(), c = a.cols();
  for (int sweep = 0; sweep < 60; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < c; ++p) {
      for (std::size_t q = p + 1; q < c; ++q) {
        double app = 0, aqq = 0, apq = 0;
        for (std::size_t i = 0; i < r; ++i) {
          const double x = a(i, p), y = a(i, q);
          app += x * x;
          aqq += y * y;
          apq += x * y;
        }
        if (std::abs(apq) <= 1e-15 * std::sqrt(app * aqq) || apq == 0.0)
          continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < r; ++i) {
          const double x = a(i, p), y = a(i, q);
          a(i, p) = cs * x - sn * y;
          a(i, q) = sn * x + cs * y;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sv(c);
  for (std::size_t j = 0; j < c; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) acc += a(i, j) * a(i, j);
    sv[j] = std::sqrt(acc);
  }
  std::sort(sv.begin(), sv.end(), std::greater<double>());
  return sv;
}

PivotedQr qr_pivoted(const Mat& x, double rel_tol) {
  const std::size_t r = x.rows(), c = x.cols();
  const std::size_t k = std::min(r, c);
  Mat a = x;
  std::vector<std::size_t> perm(c);
  for (std::size_t j = 0; j < c; ++j) perm[j] = j;
  std::vector<std::vector<double>> reflectors;
  reflectors.reserve(k);

  for (std::size_t step = 0; step < k; ++step) {
    // Pivot: remaining column with the largest trailing norm.
    std::size_t best = step;
    double best_norm = -1.0;
    for (std::size_t j = step; j < c; ++j) {
      double acc = 0.0;
      for (std::size_t i = step; i < r; ++i) acc += a(i, j) * a(i, j);
      if (acc > best_norm) {
        best_norm = acc;
        best = j;
      }
    }
    if (best != step) {
      for (std::size_t i = 0; i < r; ++i) std::swap(a(i, step), a(i, best));
      std::swap(perm[step], perm[best]);
    }
    // Householder reflector for column `step`.
    std::vector<double> v(r - step, 0.0);
    double alpha = 0.0;
    for (std::size_t i = step; i < r; ++i) {
      v[i - step] = a(i, step);
      alpha += a(i, step) * a(i, step);
    }
    alpha = std::sqrt(alpha);
    if (alpha > 0.0) {
      if (v[0] >= 0) alpha = -alpha;
      v[0] -= alpha;
      double vn2 = 0.0;
      for (double t : v) vn2 += t * t;
      if (vn2 > 0) {
        const double inv = std::sqrt(2.0 / vn2);
        for (double& t : v) t *= inv;  // now ||v|| = sqrt(2), H = I - v v^T
        for (std::size_t j = step; j < c; ++j) {
          double s = 0.0;
          for (std::size_t i = step; i < r; ++i) s += v[i - step] * a(i, j);
          for (std::size_t i = step; i < r; ++i) a(i, j) -= v[i - step] * s;
        }
      } else {
        v.clear();
      }
    } else {
      v.clear();
    }
    reflectors.push_back(std::move(v));
  }

  PivotedQr out;
  out.perm = std::move(perm);
  out.r = Mat(k, c);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i; j < c; ++j) out.r(i, j) = a(i, j);

  // Thin Q: apply the reflectors to the first k identity columns.
  out.q = Mat(r, k);
  for (std::size_t col = 0; col < k; ++col) {
    std::vector<double> e(r, 0.0);
    e[col] = 1.0;
    for (std::size_t s = k; s-- > 0;) {
      const std::vector<double>& v = reflectors[s];
      if (v.empty()) continue;
      double t = 0.0;
      for (std::size_t i = s; i < r; ++i) t += v[i - s] * e[i];
      for (std::size_t i = s; i < r; ++i) e[i] -= v[i - s] * t;
    }
    for (std::size_t i = 0; i < r; ++i) out.q(i, col) = e[i];
  }

  const double pivot0 = std::abs(out.r(0, 0));
  int rank = 0;
  for (std::size_t i = 0; i < k; ++i)
    if (std::abs(out.r(i, i)) > rel_tol * pivot0) ++rank;
  out.rank = rank;
  return out;
}

Mat kernel_basis(const Mat& a, double rel_tol) {
  // Ker(A) = orthogonal complement of col(A^T).
  Mat at = transpose(a);
  const std::size_t r = at.rows();  // = a.cols()
  const std::size_t c = at.cols();
  const std::size_t k = std::min(r, c);
  PivotedQr f = qr_pivoted(at, rel_tol);
  const std::size_t rank = static_cast<std::size_t>(f.rank);
  const std::size_t d = r - rank;
  if (d == 0) return Mat(r, 0);

  // Complete the thin Q to a full basis by Gram-Schmidt against it.
  Mat basis(r, d);
  std::size_t found = 0;
  std::vector<std::vector<double>> ortho;
  ortho.reserve(rank + d);
  for (std::size_t j = 0; j < rank && j < k; ++j) {
    std::vector<double> q(r);
    for (std::size_t i = 0; i < r; ++i) q[i] = f.q(i, j);
    ortho.push_back(std::move(q));
  }
  for (std::size_t cand = 0; cand < r && found < d; ++cand) {
    std::vector<double> e(r, 0.0);
    e[cand] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : ortho) {
        double t = 0.0;
        for (std::size_t i = 0; i < r; ++i) t += q[i] * e[i];
        for (std::size_t i = 0; i < r; ++i) e[i] -= t * q[i];
      }
    }
    const double nrm = norm2(e);
    if (nrm < 1e-8) continue;
    for (double& x : e) x /= nrm;
    for (std::size_t i = 0; i < r; ++i) basis(i, found) = e[i];
    ortho.push_back(std::move(e));
    ++found;
  }
  if (found != d) {
    Mat shrunk(r, found);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < found; ++j) shrunk(i, j) = basis(i, j);
    return shrunk;
  }
  return basis;
}

bool cholesky_solve_spd(Mat s, Mat& b) {
  const std::size_t n = s.rows();
  if (s.cols() != n || b.rows() != n) return false;
  // Lower Cholesky in place.
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t t = 0; t < j; ++t) d -= s(j, t) * s(j, t);
    if (!(d > 0.0)) return false;
    d = std::sqrt(d);
    s(j, j) = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t t = 0; t < j; ++t) v -= s(i, t) * s(j, t);
      s(i, j) = v / d;
    }
  }
  // Forward and back substitution per column of B.
  for (std::size_t col = 0; col < b.cols(); ++col) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = b(i, col);
      for (std::size_t t = 0; t < i; ++t) v -= s(i, t) * b(t, col);
      b(i, col) = v / s(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double v = b(ii, col);
      for (std::size_t t = ii + 1; t < n; ++t) v -= s(t, ii) * b(t, col);
      b(ii, col) = v / s(ii, ii);
    }
  }
  return true;
}

double least_squares_residual(const Mat& a, const std::vector<double>& y,
                              int max_iter, double tol) {
  require(a.rows() == y.size(), "least_squares_residual: size mismatch");
  const std::size_t nc = a.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(4 * nc) + 100;
  std::vector<double> x(nc, 0.0);
  std::vector<double> r = y;                 // r = y - A x
  std::vector<double> s = matvec_t(a, r);    // A^T r
  std::vector<double> pdir = s;
  double gamma = dot(s, s);
  const double y2 = dot(y, y);
  if (y2 == 0.0) return 0.0;
  for (int it = 0; it < max_iter && gamma > tol * tol * y2; ++it) {
    std::vector<double> q = matvec(a, pdir);
    const double q2 = dot(q, q);
    if (q2 == 0.0) break;
    const double alpha = gamma / q2;
    for (std::size_t i = 0; i < nc; ++i) x[i] += alpha * pdir[i];
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= alpha * q[i];
    s = matvec_t(a, r);
    const double gamma_new = dot(s, s);
    const double beta = gamma_new / gamma;
    gamma = gamma_new;
    for (std::size_t i = 0; i < nc; ++i) pdir[i] = s[i] + beta * pdir[i];
  }
  return norm2(r);
}

}  // namespace blockcert
