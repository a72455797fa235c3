// Timing comparison between the serial reference kernels and their OpenMP
// variants, plus one end-to-end certifier solve at each thread count.
// Build and run by hand; not part of the test suite.

#include <chrono>
#include <cstdio>
#include <vector>

#include "blockcert/harness.hpp"
#include "blockcert/inner_solver.hpp"
#include "blockcert/kernels.hpp"
#include "blockcert/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace blockcert;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_seconds();
    f();
    best = std::min(best, now_seconds() - t0);
  }
  return best;
}

}  // namespace

int main() {
#ifdef _OPENMP
  const int threads = omp_get_max_threads();
#else
  const int threads = 1;
#endif
  std::printf("threads available: %d\n\n", threads);
  std::printf("%-22s %10s %10s %8s\n", "kernel", "serial(s)", "openmp(s)",
              "speedup");

  SplitMix64 rng(1);
  {
    const std::size_t r = 1200, c = 1600;
    std::vector<double> a(r * c), x(c), y1(r), y2(r);
    for (double& v : a) v = rng.normal();
    for (double& v : x) v = rng.normal();
    const double ts = time_best_of(5, [&] {
      kernels::matvec_serial(a.data(), r, c, x.data(), y1.data());
    });
    const double tp = time_best_of(
        5, [&] { kernels::matvec(a.data(), r, c, x.data(), y2.data()); });
    std::printf("%-22s %10.5f %10.5f %7.2fx\n", "matvec 1200x1600", ts, tp,
                ts / tp);
  }
  {
    const std::size_t r = 1200, c = 1600;
    std::vector<double> a(r * c), x(r), y1(c), y2(c);
    for (double& v : a) v = rng.normal();
    for (double& v : x) v = rng.normal();
    const double ts = time_best_of(5, [&] {
      kernels::matvec_t_serial(a.data(), r, c, x.data(), y1.data());
    });
    const double tp = time_best_of(
        5, [&] { kernels::matvec_t(a.data(), r, c, x.data(), y2.data()); });
    std::printf("%-22s %10.5f %10.5f %7.2fx\n", "matvec_t 1200x1600", ts, tp,
                ts / tp);
  }
  {
    const std::size_t k = 96, ra = 4, cb = 720;
    std::vector<double> a(k * ra), b(k * cb), c1(ra * cb), c2(ra * cb);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal();
    const double ts = time_best_of(40, [&] {
      kernels::gemm_tn_serial(a.data(), k, ra, b.data(), cb, c1.data());
    });
    const double tp = time_best_of(40, [&] {
      kernels::gemm_tn(a.data(), k, ra, b.data(), cb, c2.data());
    });
    std::printf("%-22s %10.5f %10.5f %7.2fx\n", "gemm_tn 96x4 x 96x720", ts,
                tp, ts / tp);
  }
  {
    const std::size_t k = 512, ra = 256, cb = 256;
    std::vector<double> a(k * ra), b(k * cb), c1(ra * cb), c2(ra * cb);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal();
    const double ts = time_best_of(3, [&] {
      kernels::gemm_tn_serial(a.data(), k, ra, b.data(), cb, c1.data());
    });
    const double tp = time_best_of(3, [&] {
      kernels::gemm_tn(a.data(), k, ra, b.data(), cb, c2.data());
    });
    std::printf("%-22s %10.5f %10.5f %7.2fx\n", "gemm_tn 512x256^2", ts, tp,
                ts / tp);
  }

  // End-to-end: one verification sweep, serial map vs parallel map.
  {
    const SensingMatrix a =
        generate({EnsembleKind::Gaussian, 72, 4, 60, 1, true});
    VerifyOptions vo;
    vo.normalize = false;
    vo.inner.max_iter = 1000;
#ifdef _OPENMP
    omp_set_num_threads(1);
#endif
    const double t1 = now_seconds();
    const CertifierResult r1 = verify_s_star(a, vo);
    const double serial = now_seconds() - t1;
#ifdef _OPENMP
    omp_set_num_threads(threads);
#endif
    const double t2 = now_seconds();
    const CertifierResult r2 = verify_s_star(a, vo);
    const double parallel = now_seconds() - t2;
    std::printf("%-22s %10.3f %10.3f %7.2fx   (s_* = %.4f, identical: %s)\n",
                "verify 72x240 (n=4)", serial, parallel, serial / parallel,
                r2.s_star, r1.s_star == r2.s_star ? "yes" : "NO");
  }
  return 0;
}
