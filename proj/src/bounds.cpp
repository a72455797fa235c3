#include "blockcert/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "blockcert/rng.hpp"

namespace blockcert {

namespace {

void check_bound_args(double omega_lb, double noise_param, double kappa,
                      RecoveryVariant v) {
  if (!(omega_lb > 0))
    throw NonPositiveOmegaError("bound: omega lower bound must be positive");
  if (noise_param < 0)
    throw InvalidQueryError("bound: noise parameter must be >= 0");
  if (v == RecoveryVariant::BsLasso && !(kappa > 0 && kappa < 1))
    throw InvalidQueryError("bound: BS-LASSO needs kappa in (0,1)");
}

}  // namespace

double bound_binf(RecoveryVariant v, double omega_lb, double noise_param,
                  double kappa) {
  check_bound_args(omega_lb, noise_param, kappa, v);
  switch (v) {
    case RecoveryVariant::BsBp:
    case RecoveryVariant::NoiseFree:
      return 2.0 * noise_param / omega_lb;
    case RecoveryVariant::BsDs:
      return 2.0 * noise_param / omega_lb;
    case RecoveryVariant::BsLasso:
      return (1.0 + kappa) * noise_param / omega_lb;
  }
  return 0.0;
}

double bound_l2(RecoveryVariant v, double omega_lb, double noise_param,
                double kappa, int k) {
  check_bound_args(omega_lb, noise_param, kappa, v);
  if (k < 1) throw InvalidKError("bound_l2: k must be >= 1");
  switch (v) {
    case RecoveryVariant::BsBp:
    case RecoveryVariant::NoiseFree:
    case RecoveryVariant::BsDs:
      return 2.0 * std::sqrt(2.0 * k) * noise_param / omega_lb;
    case RecoveryVariant::BsLasso:
      return std::sqrt(2.0 * k / (1.0 - kappa)) * (1.0 + kappa) * noise_param /
             omega_lb;
  }
  return 0.0;
}

double block_rip_mc(const SensingMatrix& a, int k, int trials,
                    std::uint64_t seed) {
  const int p = a.structure.p;
  const int n = a.structure.n;
  if (k < 1 || 2 * k > p)
    throw InvalidKError("block_rip_mc: need 1 <= k and 2k <= p");
  if (trials < 1) throw InvalidQueryError("block_rip_mc: trials must be >= 1");

  const int width = 2 * k * n;
  const std::size_t m = a.a.rows();
  double delta_hat = 0.0;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) reduction(max : delta_hat)
#endif
  for (int t = 0; t < trials; ++t) {
    SplitMix64 rng = substream(seed, static_cast<std::uint64_t>(t));
    // Partial Fisher-Yates: 2k distinct blocks.
    std::vector<int> pool(static_cast<std::size_t>(p));
    for (int i = 0; i < p; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < 2 * k; ++i) {
      const int j =
          i + static_cast<int>(rng.below(static_cast<std::uint64_t>(p - i)));
      std::swap(pool[static_cast<std::size_t>(i)],
                pool[static_cast<std::size_t>(j)]);
    }
    Mat sub(m, static_cast<std::size_t>(width));
    for (int b = 0; b < 2 * k; ++b) {
      const int blk = pool[static_cast<std::size_t>(b)];
      for (std::size_t r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
          sub(r, static_cast<std::size_t>(b * n + c)) =
              a.a(r, static_cast<std::size_t>(blk * n + c));
    }
    std::vector<double> sv = singular_values(sub);
    const double smax = sv.empty() ? 0.0 : sv.front();
    // sigma_{2k} is the width-th singular value: zero whenever the
    // submatrix cannot have full column rank.
    const double smin =
        width > static_cast<int>(m) ? 0.0 : (sv.empty() ? 0.0 : sv.back());
    const double d =
        std::max(smax * smax - 1.0, 1.0 - smin * smin);
    delta_hat = std::max(delta_hat, d);
  }
  return delta_hat;
}

RipBound rip_bound(double delta, double eps) {
  RipBound out;
  constexpr double kSqrt2 = 1.4142135623730950488;
  if (delta < kSqrt2 - 1.0) {
    out.valid = true;
    out.value =
        4.0 * std::sqrt(1.0 + delta) / (1.0 - (1.0 + kSqrt2) * delta) * eps;
  }
  return out;
}

std::vector<BoundReport> compare_report(const SensingMatrix& a,
                                        const std::vector<int>& k_values,
                                        const CompareConfig& cfg) {
  std::vector<BoundReport> rows;

  VerifyOptions vo;
  vo.inner = cfg.fp.inner;
  vo.normalize = false;
  vo.qr = true;
  CertifierResult cert = verify_s_star(a, vo);

  for (int k : k_values) {
    for (RecoveryVariant v : cfg.variants) {
      BoundReport row;
      row.variant = v;
      row.k = k;
      row.kappa = v == RecoveryVariant::BsLasso ? cfg.kappa : 0.0;
      row.noise_param = v == RecoveryVariant::BsBp ? cfg.eps : cfg.mu;
      row.s_used = v == RecoveryVariant::BsLasso
                       ? 2.0 * k / (1.0 - cfg.kappa)
                       : 2.0 * k;
      try {
        if (cfg.with_rip && 2 * k <= a.structure.p)
          row.rip_delta_hat = block_rip_mc(a, k, cfg.rip_trials, cfg.seed);
        row.certified = row.s_used > 1.0 &&
                        (cert.unconditional || row.s_used < cert.s_star);
        if (row.certified) {
          OmegaQuery q;
          q.a = &a;
          q.s = row.s_used;
          q.target = v == RecoveryVariant::BsBp ? OmegaTarget::Omega2
                                                : OmegaTarget::OmegaBInf;
          auto [omega, trace] = omega_lower_bound(q, cfg.fp, &cert);
          row.omega_lb = omega;
          row.binf_bound = bound_binf(v, omega, row.noise_param, row.kappa);
          row.l2_bound = bound_l2(v, omega, row.noise_param, row.kappa, k);
          if (!trace.converged) row.note = "fixed point not converged";
        }
        if (row.rip_delta_hat.has_value())
          row.rip = rip_bound(*row.rip_delta_hat, cfg.eps);
      } catch (const std::exception& e) {
        row.note = e.what();  // keep the run going; the row records why
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace blockcert
