#include "blockcert/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blockcert::kernels {

std::size_t parallel_grain() { return 16 * 1024; }

namespace {

inline bool go_parallel(std::size_t work) {
#ifdef _OPENMP
  return work >= parallel_grain() && !omp_in_parallel();
#else
  (void)work;
  return false;
#endif
}

inline double dot(const double* a, const double* b, std::size_t k) {
  double acc = 0.0;
  for (std::size_t t = 0; t < k; ++t) acc += a[t] * b[t];
  return acc;
}

}  // namespace

void matvec_serial(const double* a, std::size_t r, std::size_t c,
                   const double* x, double* y) {
  for (std::size_t i = 0; i < r; ++i) y[i] = dot(a + i * c, x, c);
}

void matvec(const double* a, std::size_t r, std::size_t c, const double* x,
            double* y) {
  if (!go_parallel(r * c)) {
    matvec_serial(a, r, c, x, y);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(r); ++i)
    y[i] = dot(a + static_cast<std::size_t>(i) * c, x, c);
#endif
}

void matvec_t_serial(const double* a, std::size_t r, std::size_t c,
                     const double* x, double* y) {
  for (std::size_t j = 0; j < c; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i) acc += a[i * c + j] * x[i];
    y[j] = acc;
  }
}

void matvec_t(const double* a, std::size_t r, std::size_t c, const double* x,
              double* y) {
  if (!go_parallel(r * c)) {
    matvec_t_serial(a, r, c, x, y);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < static_cast<long long>(c); ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r; ++i)
      acc += a[i * c + static_cast<std::size_t>(j)] * x[i];
    y[j] = acc;
  }
#endif
}

void gemm_tn_serial(const double* a, std::size_t k, std::size_t ra,
                    const double* b, std::size_t cb, double* c) {
  for (std::size_t i = 0; i < ra; ++i) {
    double* crow = c + i * cb;
    for (std::size_t j = 0; j < cb; ++j) crow[j] = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      const double ati = a[t * ra + i];
      if (ati == 0.0) continue;
      const double* brow = b + t * cb;
      for (std::size_t j = 0; j < cb; ++j) crow[j] += ati * brow[j];
    }
  }
}

void gemm_tn(const double* a, std::size_t k, std::size_t ra, const double* b,
             std::size_t cb, double* c) {
  if (!go_parallel(k * ra * cb)) {
    gemm_tn_serial(a, k, ra, b, cb, c);
    return;
  }
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(ra); ++i) {
    double* crow = c + static_cast<std::size_t>(i) * cb;
    for (std::size_t j = 0; j < cb; ++j) crow[j] = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      const double ati = a[t * ra + static_cast<std::size_t>(i)];
      if (ati == 0.0) continue;
      const double* brow = b + t * cb;
      for (std::size_t j = 0; j < cb; ++j) crow[j] += ati * brow[j];
    }
  }
#endif
}

}  // namespace blockcert::kernels
