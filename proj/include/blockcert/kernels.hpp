#pragma once

#include <cstddef>

// Dense row-major kernels. Each kernel comes in two flavors: a serial
// reference (`*_serial`) and an OpenMP variant that splits *output* elements
// across threads. Every output element is accumulated by exactly one thread
// in the same order as the serial code, so the two flavors agree bit for
// bit; tests and tools/bench_kernels rely on that.
//
// The OpenMP variants fall back to the serial path for small operands and
// when already called from inside a parallel region (the per-index maps in
// the certifier parallelize one level up).

namespace blockcert::kernels {

// y = A x with A of size r x c.
void matvec_serial(const double* a, std::size_t r, std::size_t c,
                   const double* x, double* y);
void matvec(const double* a, std::size_t r, std::size_t c, const double* x,
            double* y);

// y = A^T x with A of size r x c (y has length c).
void matvec_t_serial(const double* a, std::size_t r, std::size_t c,
                     const double* x, double* y);
void matvec_t(const double* a, std::size_t r, std::size_t c, const double* x,
              double* y);

// C = A^T B with A of size k x ra and B of size k x cb; C is ra x cb.
void gemm_tn_serial(const double* a, std::size_t k, std::size_t ra,
                    const double* b, std::size_t cb, double* c);
void gemm_tn(const double* a, std::size_t k, std::size_t ra, const double* b,
             std::size_t cb, double* c);

// Work (in multiply-adds) below which the OpenMP variants stay serial.
std::size_t parallel_grain();

}  // namespace blockcert::kernels
