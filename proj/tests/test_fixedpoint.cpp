#include <doctest.h>

#include <cmath>

#include "blockcert/fixedpoint.hpp"
#include "blockcert/harness.hpp"
#include "blockcert/oracles.hpp"
#include "blockcert/rng.hpp"

using namespace blockcert;

namespace {

// First seed whose draw certifies s_* with a healthy margin above `s`: the
// slope of g_s at the fixed point approaches one as s approaches s_*, and
// with it the sensitivity of eta* to inner-solve noise.
SensingMatrix certified_instance(int m, int n, int p, double s,
                                 std::uint64_t seed0, CertifierResult* cert) {
  VerifyOptions vo;
  vo.normalize = false;
  for (std::uint64_t seed = seed0; seed < seed0 + 50; ++seed) {
    SensingMatrix a = generate({EnsembleKind::Gaussian, m, n, p, seed, true});
    CertifierResult r = verify_s_star(a, vo);
    if (r.unconditional || r.s_star > s * 1.4) {
      if (cert != nullptr) *cert = std::move(r);
      return a;
    }
  }
  throw std::runtime_error("no certified instance found");
}

}  // namespace

TEST_SUITE_BEGIN("fixedpoint");

TEST_CASE("eval_g at eta = 0 and for small eta") {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 6, 2, 4, 2, true});
  const double s = 1.5;
  CHECK(eval_g(a, s, 0.0, nullptr).value == 0.0);
  CHECK(eval_h(a, s, 0.0, nullptr).value == 0.0);

  const double eta = 1e-6;
  const GEvalResult r = eval_g(a, s, eta, nullptr);
  CHECK(r.value >= s * eta * (1.0 - 1e-9));
}

TEST_CASE("eval_g is monotone in eta") {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 6, 2, 4, 4, true});
  const double s = 1.6;
  std::vector<Mat> warm;
  double prev = 0.0;
  for (double eta : {0.05, 0.2, 0.5, 1.0, 2.0}) {
    const double v = eval_g(a, s, eta, &warm).value;
    CHECK(v > prev - 1e-8);
    prev = v;
  }
}

TEST_CASE("per-index objective is linear in eta at fixed certificates") {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 6, 2, 4, 6, true});
  const double s = 1.5;
  std::vector<Mat> certs;
  eval_g(a, s, 0.7, &certs, {});
  REQUIRE(certs.size() == 4);

  const double e1 = 0.4, e2 = 1.2, mid = 0.5 * (e1 + e2);
  for (int i = 0; i < 4; ++i) {
    InnerProblem prob{&a.a, a.structure, i, 0.0, InnerPenalty::Spectral};
    auto value_at = [&](double eta) {
      prob.weight = s * eta;
      return inner_objective(prob, certs[static_cast<std::size_t>(i)])
          .objective;
    };
    const double v1 = value_at(e1), v2 = value_at(e2), vm = value_at(mid);
    CHECK(vm == doctest::Approx(0.5 * (v1 + v2)).epsilon(1e-12));
    // Concavity consequence at fixed certificates: value/eta decreases.
    CHECK(v2 / e2 <= v1 / e1 + 1e-12);
  }
}

TEST_CASE("three strategies agree and satisfy the residual contract") {
  CertifierResult cert;
  const SensingMatrix a = certified_instance(8, 2, 6, 2.0, 10, &cert);
  OmegaQuery q{&a, 2.0, OmegaTarget::Omega2};
  FixedPointConfig cfg;
  cfg.tol = 1e-5;
  cfg.check_s_star = false;

  cfg.strategy = FpStrategy::Naive;
  const FixedPointTrace naive = fp_naive(q, cfg);
  cfg.strategy = FpStrategy::Bisection;
  const FixedPointTrace bisect = fp_bisection(q, cfg);
  cfg.strategy = FpStrategy::Hybrid;
  const FixedPointTrace hybrid = fp_hybrid(q, cfg);

  CHECK(naive.converged);
  CHECK(bisect.converged);
  CHECK(hybrid.converged);
  CHECK(std::abs(naive.eta_star - bisect.eta_star) <= 2 * cfg.tol);
  CHECK(std::abs(hybrid.eta_star - bisect.eta_star) <= 2 * cfg.tol);

  // |g(eta*) - eta*| <= tol, using the final full sweep stored in the trace.
  for (const FixedPointTrace* t : {&naive, &bisect, &hybrid}) {
    REQUIRE(!t->final_per_index.empty());
    double g = 0.0;
    for (double v : t->final_per_index) g = std::max(g, v);
    CHECK(std::abs(g - t->eta_star) <= cfg.tol);
    CHECK(t->omega_lower_bound * t->eta_star == 1.0);
  }

  // Starting the naive iteration from above converges to the same point.
  FixedPointConfig above = cfg;
  above.strategy = FpStrategy::Naive;
  above.eta0 = 10.0;
  const FixedPointTrace naive_hi = fp_naive(q, above);
  CHECK(naive_hi.converged);
  CHECK(std::abs(naive_hi.eta_star - naive.eta_star) <= 2 * cfg.tol);
}

TEST_CASE("bisection bracket stays sound and halves") {
  CertifierResult cert;
  const SensingMatrix a = certified_instance(8, 2, 6, 2.0, 30, &cert);
  OmegaQuery q{&a, 2.0, OmegaTarget::Omega2};
  FixedPointConfig cfg;
  cfg.check_s_star = false;
  cfg.strategy = FpStrategy::Bisection;
  const FixedPointTrace t = fp_bisection(q, cfg);
  REQUIRE(t.converged);
  for (const FpRecord& r : t.records) CHECK(r.lo <= r.hi + 1e-15);
  // Never more midpoint sweeps than the halving geometry allows.
  int full_sweeps = 0;
  for (const FpRecord& r : t.records)
    if (r.index == -1) ++full_sweeps;
  const int halving_cap =
      static_cast<int>(std::ceil(std::log2((cfg.eta_hi - cfg.eta_lo) /
                                           cfg.tol))) +
      12;  // bracket repair and polish sweeps
  CHECK(t.records.back().eta == doctest::Approx(t.eta_star));
  CHECK(full_sweeps <= halving_cap);
}

TEST_CASE("bracket auto-expansion recovers from a bad initial bracket") {
  CertifierResult cert;
  const SensingMatrix a = certified_instance(8, 2, 6, 2.0, 50, &cert);
  OmegaQuery q{&a, 2.0, OmegaTarget::Omega2};
  FixedPointConfig good;
  good.check_s_star = false;
  const double eta_ref = fp_bisection(q, good).eta_star;

  FixedPointConfig bad = good;
  bad.eta_lo = eta_ref * 1.5;  // above the fixed point
  bad.eta_hi = eta_ref * 1.6;
  const FixedPointTrace t = fp_bisection(q, bad);
  CHECK(t.converged);
  CHECK(std::abs(t.eta_star - eta_ref) <= 4 * good.tol);
}

TEST_CASE("hybrid eliminations are sound at the final point") {
  CertifierResult cert;
  const SensingMatrix a = certified_instance(8, 2, 6, 2.0, 70, &cert);
  OmegaQuery q{&a, 2.0, OmegaTarget::Omega2};
  FixedPointConfig cfg;
  cfg.check_s_star = false;
  const FixedPointTrace t = fp_hybrid(q, cfg);
  REQUIRE(t.converged);
  REQUIRE(static_cast<int>(t.final_per_index.size()) == a.structure.p);
  for (double v : t.final_per_index) CHECK(v <= t.eta_star + cfg.tol);
}

TEST_CASE("single dominant block: one bisection, the rest eliminated") {
  // Orthogonal design whose first block is shrunk: the weak block dominates
  // g (its certificate must fight the 1/eta scaling), all others vanish in
  // the first elimination pass.
  SensingMatrix a(6, make_structure(2, 3));
  a.a = Mat::identity(6);
  for (std::size_t r = 0; r < 6; ++r)
    for (std::size_t c = 0; c < 2; ++c) a.a(r, c) *= 0.4;
  OmegaQuery q{&a, 1.5, OmegaTarget::Omega2};
  FixedPointConfig cfg;
  cfg.check_s_star = false;
  const FixedPointTrace t = fp_hybrid(q, cfg);
  CHECK(t.converged);
  int argmax = 0;
  for (int i = 0; i < 3; ++i)
    if (t.final_per_index[static_cast<std::size_t>(i)] >
        t.final_per_index[static_cast<std::size_t>(argmax)])
      argmax = i;
  CHECK(argmax == 0);
  // Only the dominant index should have been bisected: every record at an
  // eta strictly inside the bracket belongs to index 0, the final sweep, or
  // an elimination pass at a candidate eta.
  int bisection_records_other = 0;
  for (const FpRecord& r : t.records)
    if (r.index > 0 && r.lo != r.hi && r.eta != cfg.eta_lo &&
        r.eta != cfg.eta_hi)
      ++bisection_records_other;
  CHECK(bisection_records_other <= 2 * 3);  // elimination passes only
}

TEST_CASE("s outside (1, s_*) is rejected") {
  CertifierResult cert;
  const SensingMatrix a = certified_instance(8, 2, 6, 2.0, 90, &cert);
  FixedPointConfig cfg;
  OmegaQuery q{&a, 0.9, OmegaTarget::Omega2};
  CHECK_THROWS_AS(fp_naive(q, cfg), InvalidQueryError);
  q.s = cert.s_star * 1.5;
  CHECK_THROWS_AS(fp_bisection(q, cfg), InvalidQueryError);
  q.s = 2.0;
  CHECK_NOTHROW(omega_lower_bound(q, cfg, &cert));
}

TEST_CASE("omega lower bound stays below the brute-force ceiling") {
  for (std::uint64_t seed : {11ULL, 12ULL}) {
    const SensingMatrix a =
        generate({EnsembleKind::Gaussian, 4, 1, 6, seed, true});
    VerifyOptions vo;
    vo.normalize = false;
    const CertifierResult cert = verify_s_star(a, vo);
    if (!cert.unconditional && cert.s_star <= 1.6) continue;
    OmegaQuery q{&a, 1.5, OmegaTarget::Omega2};
    FixedPointConfig cfg;
    cfg.check_s_star = false;
    auto [lb, trace] = omega_lower_bound(q, cfg);
    const double ceiling = oracle_omega(a, 1.5, OmegaTarget::Omega2);
    CHECK(lb <= ceiling + 1e-4);
    CHECK(lb > 0.0);
  }
}

TEST_CASE("h family: omega_binf bound on a tiny instance") {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 4, 1, 5, 21, true});
  VerifyOptions vo;
  vo.normalize = false;
  const CertifierResult cert = verify_s_star(a, vo);
  REQUIRE((cert.unconditional || cert.s_star > 1.4));
  OmegaQuery q{&a, 1.3, OmegaTarget::OmegaBInf};
  FixedPointConfig cfg;
  cfg.check_s_star = false;
  auto [lb, trace] = omega_lower_bound(q, cfg);
  CHECK(trace.converged);
  CHECK(lb > 0.0);
  const double ceiling = oracle_omega(a, 1.3, OmegaTarget::OmegaBInf);
  CHECK(lb <= ceiling + 1e-4);
}

TEST_SUITE_END();
