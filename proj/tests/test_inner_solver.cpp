#include <doctest.h>

#include <cmath>

#include "blockcert/block_core.hpp"
#include "blockcert/harness.hpp"
#include "blockcert/inner_solver.hpp"
#include "blockcert/oracles.hpp"
#include "blockcert/rng.hpp"
#include "support/multistart_oracle.hpp"

using namespace blockcert;

namespace {

Mat random_mat(std::size_t r, std::size_t c, std::uint64_t seed) {
  Mat m(r, c);
  SplitMix64 rng(seed);
  for (double& v : m.values()) v = rng.normal();
  return m;
}

// Direct SVD-based evaluation of the objective, independent of the
// power/Jacobi path used inside inner_objective.
InnerObjectiveValue svd_objective(const InnerProblem& prob, const Mat& p) {
  const int n = prob.structure.n;
  Mat c = matmul_tn(p, *prob.q);
  InnerObjectiveValue out;
  for (int j = 0; j < prob.structure.p; ++j) {
    Mat m(n, n);
    for (int r = 0; r < n; ++r)
      for (int t = 0; t < n; ++t)
        m(r, t) = (j == prob.index && r == t ? 1.0 : 0.0) -
                  c(r, static_cast<std::size_t>(j * n + t));
    out.maxterm = std::max(out.maxterm, singular_values(m)[0]);
  }
  if (prob.penalty == InnerPenalty::Spectral) {
    out.penalty_value = singular_values(p)[0];
  } else if (prob.penalty == InnerPenalty::BlockSum) {
    const int blocks = static_cast<int>(p.rows()) / n;
    for (int l = 0; l < blocks; ++l) {
      Mat blk(n, n);
      for (int r = 0; r < n; ++r)
        for (int t = 0; t < n; ++t)
          blk(r, t) = p(static_cast<std::size_t>(l * n + r),
                        static_cast<std::size_t>(t));
      out.penalty_value += singular_values(blk)[0];
    }
  }
  out.objective = prob.penalty == InnerPenalty::None
                      ? out.maxterm
                      : prob.weight * out.maxterm + out.penalty_value;
  return out;
}

}  // namespace

TEST_SUITE_BEGIN("inner_solver");

TEST_CASE("objective at the zero multiplier") {
  Mat q = random_mat(5, 6, 3);
  InnerProblem prob{&q, make_structure(2, 3), 1, 3.0, InnerPenalty::Spectral};
  Mat p0(5, 2);
  const InnerObjectiveValue v = inner_objective(prob, p0);
  CHECK(v.maxterm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(v.penalty_value == 0.0);
  CHECK(v.objective == doctest::Approx(3.0).epsilon(1e-12));

  prob.penalty = InnerPenalty::None;
  CHECK(inner_objective(prob, p0).objective ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("objective vanishes for orthonormal column blocks") {
  // Q square orthogonal: P_i = Q_i zeroes every term.
  Mat base = random_mat(6, 6, 5);
  PivotedQr f = qr_pivoted(base);
  Mat q = f.q;  // 6x6 orthogonal
  InnerProblem prob{&q, make_structure(2, 3), 2, 0.0, InnerPenalty::None};
  Mat p(6, 2);
  for (int r = 0; r < 6; ++r)
    for (int t = 0; t < 2; ++t)
      p(r, t) = q(static_cast<std::size_t>(r),
                  static_cast<std::size_t>(prob.index * 2 + t));
  CHECK(inner_objective(prob, p).maxterm <= 1e-12);
}

TEST_CASE("objective matches a direct SVD evaluation") {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(3));
    const int p = 2 + static_cast<int>(rng.below(4));
    const bool gram_mode = trial % 2 == 1;
    const std::size_t qr = gram_mode ? static_cast<std::size_t>(n * p)
                                     : 3 + rng.below(5);
    Mat q = random_mat(qr, static_cast<std::size_t>(n * p), rng.next());
    InnerProblem prob{&q, make_structure(n, p),
                      static_cast<int>(rng.below(static_cast<std::uint64_t>(p))),
                      0.5 + rng.uniform01(),
                      gram_mode ? InnerPenalty::BlockSum
                                : InnerPenalty::Spectral};
    Mat pm = random_mat(qr, static_cast<std::size_t>(n), rng.next());
    const InnerObjectiveValue fast = inner_objective(prob, pm);
    const InnerObjectiveValue ref = svd_objective(prob, pm);
    CHECK(std::abs(fast.maxterm - ref.maxterm) <= 1e-10);
    CHECK(std::abs(fast.penalty_value - ref.penalty_value) <= 1e-10);
    CHECK(std::abs(fast.objective - ref.objective) <= 1e-10);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  Mat q = random_mat(4, 6, 2);
  InnerProblem prob{&q, make_structure(2, 3), 0, 1.0, InnerPenalty::Spectral};
  Mat wrong(3, 2);
  CHECK_THROWS_AS(inner_objective(prob, wrong), DimensionMismatchError);
}

TEST_CASE("zero column block forces maxterm 1 and objective w") {
  Mat q = random_mat(5, 6, 9);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t c = 2; c < 4; ++c) q(r, c) = 0.0;  // block 1 of n=2
  const double w = 0.7;
  InnerProblem prob{&q, make_structure(2, 3), 1, w, InnerPenalty::Spectral};
  InnerSolution sol = solve_inner(prob);
  CHECK(sol.objective == doctest::Approx(w).epsilon(1e-6));
  CHECK(sol.maxterm >= 1.0 - 1e-12);

  prob.penalty = InnerPenalty::None;
  InnerSolution ver = solve_inner(prob);
  CHECK(ver.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("solver reaches the multi-start oracle on desk instances") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 4; ++trial) {
    const bool weighted = trial % 2 == 1;
    Mat q = random_mat(3, 4, 100 + trial);
    InnerProblem prob{&q, make_structure(1, 4),
                      trial % 4, weighted ? 1.3 : 0.0,
                      weighted ? InnerPenalty::Spectral : InnerPenalty::None};
    InnerOptions opts;
    opts.tol = 1e-6;
    opts.max_iter = 20000;
    const InnerSolution sol = solve_inner(prob, opts);
    const double ref = testing::inner_infimum_oracle(prob, 24, 900 + trial);
    CHECK(sol.objective <= ref + 1e-4);   // solver at least as good
    CHECK(sol.objective >= ref - 1e-4);   // oracle at least as good
  }
  // Block case with the block-sum penalty on the Gram matrix.
  {
    Mat a = random_mat(3, 4, 55);
    Mat q = gram(a);
    InnerProblem prob{&q, make_structure(2, 2), 0, 0.9,
                      InnerPenalty::BlockSum};
    InnerOptions opts;
    opts.tol = 1e-6;
    opts.max_iter = 20000;
    const InnerSolution sol = solve_inner(prob, opts);
    const double ref = testing::inner_infimum_oracle(prob, 24, 77);
    CHECK(sol.objective <= ref + 1e-4);
    CHECK(sol.objective >= ref - 1e-4);
  }
}

TEST_CASE("every recorded best objective stays a valid upper bound") {
  Mat q = random_mat(4, 6, 12);
  InnerProblem prob{&q, make_structure(2, 3), 0, 0.8, InnerPenalty::Spectral};
  InnerOptions opts;
  opts.record_history = true;
  opts.max_iter = 3000;
  const InnerSolution sol = solve_inner(prob, opts);
  REQUIRE(!sol.best_objective_history.empty());
  // Best-so-far monotone, and no recorded value undercuts the converged
  // objective.
  for (std::size_t k = 1; k < sol.best_objective_history.size(); ++k)
    CHECK(sol.best_objective_history[k] <=
          sol.best_objective_history[k - 1] + 1e-15);
  for (double v : sol.best_objective_history)
    CHECK(v >= sol.objective - 1e-9);

  // A crippled iteration budget still returns a certificate-valid bound.
  opts.max_iter = 3;
  const InnerSolution rough = solve_inner(prob, opts);
  CHECK(!rough.converged);
  CHECK(rough.objective >= sol.objective - 1e-12);
}

TEST_CASE("objective is convex along segments") {
  SplitMix64 rng(66);
  Mat q = random_mat(4, 6, 13);
  for (InnerPenalty pen :
       {InnerPenalty::None, InnerPenalty::Spectral, InnerPenalty::BlockSum}) {
    Mat qq = pen == InnerPenalty::BlockSum ? gram(q) : q;
    InnerProblem prob{&qq, make_structure(2, 3), 1, 1.1, pen};
    for (int trial = 0; trial < 10; ++trial) {
      Mat p1 = random_mat(qq.rows(), 2, rng.next());
      Mat p2 = random_mat(qq.rows(), 2, rng.next());
      const double f1 = inner_objective(prob, p1).objective;
      const double f2 = inner_objective(prob, p2).objective;
      for (double lam : {0.25, 0.5, 0.75}) {
        Mat mix(qq.rows(), 2);
        for (std::size_t k = 0; k < mix.values().size(); ++k)
          mix.values()[k] =
              lam * p1.values()[k] + (1 - lam) * p2.values()[k];
        CHECK(inner_objective(prob, mix).objective <=
              lam * f1 + (1 - lam) * f2 + 1e-10);
      }
    }
  }
}

TEST_CASE("verify_s_star: square invertible matrix is unconditional") {
  SensingMatrix a(4, make_structure(2, 2));
  a.a = Mat::identity(4);
  SplitMix64 rng(3);
  for (double& v : a.a.values()) v += 0.05 * rng.normal();
  const CertifierResult r = verify_s_star(a);
  CHECK(r.unconditional);
  CHECK(std::isinf(r.s_star));
  CHECK(r.k_star == 2);
}

TEST_CASE("verify_s_star sandwich against the kernel-ratio oracle") {
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
    const int n = seed % 2 == 0 ? 2 : 1;
    const int p = n == 2 ? 3 : 5;
    const int m = n == 2 ? 4 : 3;
    const SensingMatrix a =
        generate({EnsembleKind::Gaussian, m, n, p, seed, true});
    VerifyOptions vo;
    vo.inner.tol = 1e-6;
    vo.inner.max_iter = 20000;
    vo.normalize = false;
    const CertifierResult r = verify_s_star(a, vo);
    const double upper = oracle_s_star(a);
    CHECK(r.s_star <= upper + 1e-6);
  }
}

TEST_CASE("verify_s_star is invariant to row orthonormalization") {
  const SensingMatrix a = generate({EnsembleKind::Gaussian, 5, 2, 4, 8, true});
  VerifyOptions vo;
  vo.normalize = false;
  vo.inner.tol = 1e-6;
  vo.inner.max_iter = 20000;
  const CertifierResult direct = verify_s_star(a, vo);
  VerifyOptions no_qr = vo;
  no_qr.qr = false;
  const CertifierResult pre = verify_s_star(orthonormalize_rows(a), no_qr);
  CHECK(direct.s_star == doctest::Approx(pre.s_star).epsilon(5e-4));
}

TEST_CASE("blind sparse model never certifies below the block model") {
  const SensingMatrix a =
      generate({EnsembleKind::Gaussian, 12, 2, 8, 33, true});
  VerifyOptions vo;
  vo.normalize = false;
  const CertifierResult block = verify_s_star(a, vo);
  SensingMatrix flat(12, make_structure(1, 16));
  flat.a = a.a;
  const CertifierResult sparse = verify_s_star(flat, vo);
  CHECK(sparse.s_star >= block.s_star - 1e-3);
}

TEST_CASE("rank-deficient input propagates") {
  SensingMatrix dup(2, make_structure(1, 4));
  dup.a(0, 0) = 1.0;
  dup.a(1, 0) = 1.0;
  VerifyOptions vo;
  vo.normalize = false;
  CHECK_THROWS_AS(verify_s_star(dup, vo), RankDeficientError);
}

TEST_SUITE_END();
