#include "blockcert/fixedpoint.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blockcert {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Holds the (possibly derived) Q matrix and the warm-start certificates for
// one fixed-point run. Inner problems across indices share Q read-only;
// per-index results land in distinct slots, so parallel sweeps stay
// deterministic for any thread count.
class Engine {
 public:
  Engine(const SensingMatrix& a, double s, OmegaTarget target,
         const InnerOptions& inner)
      : structure_(a.structure), s_(s), inner_(inner) {
    if (target == OmegaTarget::Omega2) {
      q_ = a.a;
      penalty_ = InnerPenalty::Spectral;
    } else {
      q_ = gram(a.a);
      penalty_ = InnerPenalty::BlockSum;
    }
    certs_.resize(static_cast<std::size_t>(structure_.p));
  }

  int p() const { return structure_.p; }

  double eval_index(int i, double eta, FixedPointTrace& trace, double lo,
                    double hi) {
    InnerSolution sol = solve_one(i, eta);
    trace.records.push_back(FpRecord{eta, sol.objective, i, lo, hi});
    trace.inner_iterations += sol.iterations;
    ++trace.evaluations;
    certs_[static_cast<std::size_t>(i)] = std::move(sol.p);
    return sol.objective;
  }

  std::vector<double> eval_subset(const std::vector<int>& idx, double eta,
                                  FixedPointTrace& trace, double lo,
                                  double hi) {
    std::vector<InnerSolution> sols(idx.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int t = 0; t < static_cast<int>(idx.size()); ++t)
      sols[static_cast<std::size_t>(t)] =
          solve_one(idx[static_cast<std::size_t>(t)], eta);

    std::vector<double> values(idx.size());
    for (std::size_t t = 0; t < idx.size(); ++t) {
      InnerSolution& s = sols[t];
      values[t] = s.objective;
      trace.records.push_back(FpRecord{eta, s.objective, idx[t], lo, hi});
      trace.inner_iterations += s.iterations;
      ++trace.evaluations;
      certs_[static_cast<std::size_t>(idx[t])] = std::move(s.p);
    }
    return values;
  }

  GEvalResult eval_all(double eta, FixedPointTrace& trace, double lo,
                       double hi) {
    std::vector<int> idx(static_cast<std::size_t>(structure_.p));
    for (int i = 0; i < structure_.p; ++i) idx[static_cast<std::size_t>(i)] = i;
    GEvalResult out;
    out.per_index = eval_subset(idx, eta, trace, lo, hi);
    for (double v : out.per_index) out.value = std::max(out.value, v);
    trace.records.push_back(FpRecord{eta, out.value, -1, lo, hi});
    return out;
  }

  std::vector<Mat> take_certificates() { return std::move(certs_); }

 private:
  InnerSolution solve_one(int i, double eta) {
    InnerProblem prob;
    prob.q = &q_;
    prob.structure = structure_;
    prob.index = i;
    prob.weight = s_ * eta;
    prob.penalty = penalty_;
    const Mat& warm = certs_[static_cast<std::size_t>(i)];
    return solve_inner(prob, inner_, warm.empty() ? nullptr : &warm);
  }

  Mat q_;
  BlockStructure structure_;
  double s_ = 0.0;
  InnerPenalty penalty_ = InnerPenalty::Spectral;
  InnerOptions inner_;
  std::vector<Mat> certs_;
};

void check_query(const OmegaQuery& query, const FixedPointConfig& cfg) {
  if (query.a == nullptr) throw InvalidQueryError("omega query without matrix");
  if (!(query.s > 1.0)) throw InvalidQueryError("omega query needs s > 1");
  if (!(cfg.eta_lo > 0) || !(cfg.eta_lo < cfg.eta_hi) || !(cfg.tol > 0))
    throw InvalidQueryError(
        "fixed point config: need 0 < eta_lo < eta_hi and tol > 0");
  if (cfg.check_s_star) {
    VerifyOptions vo;
    vo.inner = cfg.inner;
    vo.normalize = false;  // s_* belongs to the matrix exactly as queried
    vo.qr = true;
    CertifierResult cert = verify_s_star(*query.a, vo);
    if (!cert.unconditional && query.s >= cert.s_star)
      throw InvalidQueryError("omega query needs s < s_* (got s = " +
                              std::to_string(query.s) + ", s_* = " +
                              std::to_string(cert.s_star) + ")");
  }
}

// Re-evaluates g_s at eta until |g_s(eta) - eta| <= tol, so every trace ends
// on a point satisfying the fixed-point residual contract. Plain iteration
// contracts arbitrarily slowly near a marginal fixed point, so the step is
// Aitken-corrected from the previous residual.
bool polish(Engine& eng, double& eta, const FixedPointConfig& cfg,
            FixedPointTrace& trace) {
  double d_prev = 0.0;
  for (int round = 0; round < 12; ++round) {
    GEvalResult r = eng.eval_all(eta, trace, eta, eta);
    trace.final_per_index = r.per_index;
    const double d = r.value - eta;
    if (std::abs(d) <= cfg.tol) return true;
    double next = r.value;
    if (d_prev != 0.0) {
      const double rho = d / d_prev;
      if (rho > 0.0 && rho < 1.0) next += d * rho / (1.0 - rho);
    }
    d_prev = d;
    eta = next;
  }
  return false;
}

void finish(Engine& eng, FixedPointTrace& trace, double eta, bool converged,
            Clock::time_point t0) {
  trace.converged = converged;
  trace.eta_star = eta;
  trace.omega_lower_bound = 1.0 / eta;
  trace.certificates = eng.take_certificates();
  trace.wall_seconds = seconds_since(t0);
}

FixedPointTrace run_naive(Engine& eng, const FixedPointConfig& cfg) {
  FixedPointTrace trace;
  trace.strategy = FpStrategy::Naive;
  const auto t0 = Clock::now();

  double eta = cfg.eta0;
  int outer = 0;
  // Ascending acceleration: jump on the first index that improves eta by
  // more than the tolerance; once no index does, switch to full map
  // iterations.
  for (; outer < cfg.max_outer; ++outer) {
    bool jumped = false;
    for (int i = 0; i < eng.p(); ++i) {
      const double v = eng.eval_index(i, eta, trace, 0.0, 0.0);
      if (v > eta + cfg.tol) {
        eta = v;
        jumped = true;
        break;
      }
    }
    if (!jumped) break;
  }

  // Full fixed-point iterations eta <- g_s(eta). Successive differences
  // shrink geometrically with an unknown rate, so an Aitken estimate of the
  // remaining gap decides termination (and corrects the final point).
  bool settled = false;
  double d_prev = 0.0;
  for (; outer < cfg.max_outer && !settled; ++outer) {
    const double g = eng.eval_all(eta, trace, 0.0, 0.0).value;
    const double d = g - eta;
    eta = g;
    if (std::abs(d) <= cfg.tol) {
      double correction = 0.0;
      if (d_prev != 0.0) {
        const double rho = d / d_prev;
        if (rho > 0.0 && rho < 1.0) correction = d * rho / (1.0 - rho);
      }
      if (std::abs(correction) <= cfg.tol) {
        eta += correction;
        settled = true;
        break;
      }
    }
    d_prev = d;
  }

  const bool converged = settled && polish(eng, eta, cfg, trace);
  finish(eng, trace, eta, converged, t0);
  return trace;
}

// Widens [lo, hi] until g_s(lo) > lo and g_s(hi) < hi, tightening the ends
// with the evaluated values on the way out.
void repair_bracket(Engine& eng, double& lo, double& hi,
                    const FixedPointConfig& cfg, FixedPointTrace& trace) {
  int tries = 0;
  for (;;) {
    const double glo = eng.eval_all(lo, trace, lo, hi).value;
    if (glo > lo) {
      lo = glo;  // g maps (0, eta*) into (eta, eta*)
      break;
    }
    if (++tries > cfg.bracket_retries)
      throw BracketFailureError("bisection: no eta with g(eta) > eta found");
    lo *= 0.5;
  }
  for (;;) {
    const double ghi = eng.eval_all(hi, trace, lo, hi).value;
    if (ghi < hi) {
      hi = ghi;  // g maps (eta*, inf) into (eta*, eta)
      break;
    }
    if (++tries > cfg.bracket_retries)
      throw BracketFailureError("bisection: no eta with g(eta) < eta found");
    hi *= 2.0;
  }
  if (lo >= hi)
    throw BracketFailureError("bisection: bracket collapsed during repair");
}

FixedPointTrace run_bisection(Engine& eng, const FixedPointConfig& cfg) {
  FixedPointTrace trace;
  trace.strategy = FpStrategy::Bisection;
  const auto t0 = Clock::now();

  double lo = cfg.eta_lo, hi = cfg.eta_hi;
  repair_bracket(eng, lo, hi, cfg, trace);

  int outer = 0;
  for (; hi - lo > cfg.tol && outer < cfg.max_outer; ++outer) {
    const double mid = 0.5 * (lo + hi);
    bool ascended = false;
    double sweep_max = 0.0;
    for (int i = 0; i < eng.p(); ++i) {
      const double v = eng.eval_index(i, mid, trace, lo, hi);
      sweep_max = std::max(sweep_max, v);
      if (v > mid) {  // first index above the midline already lifts lo
        lo = v;
        ascended = true;
        break;
      }
    }
    if (!ascended) hi = sweep_max;  // sweep_max = g_s(mid) <= mid
  }

  bool converged = hi - lo <= cfg.tol;
  double eta = 0.5 * (lo + hi);
  converged = polish(eng, eta, cfg, trace) && converged;
  finish(eng, trace, eta, converged, t0);
  return trace;
}

FixedPointTrace run_hybrid(Engine& eng, const FixedPointConfig& cfg) {
  FixedPointTrace trace;
  trace.strategy = FpStrategy::Hybrid;
  const auto t0 = Clock::now();

  double lo = cfg.eta_lo, hi = cfg.eta_hi;
  // The lower bracket sweep doubles as the first elimination pass and the
  // selection heuristic.
  int tries = 0;
  GEvalResult at_lo;
  for (;;) {
    at_lo = eng.eval_all(lo, trace, lo, hi);
    if (at_lo.value > lo) break;
    if (++tries > cfg.bracket_retries)
      throw BracketFailureError("hybrid: no eta with g(eta) > eta found");
    lo *= 0.5;
  }

  std::vector<int> survivors;
  std::vector<double> last_value = at_lo.per_index;
  for (int j = 0; j < eng.p(); ++j)
    if (at_lo.per_index[static_cast<std::size_t>(j)] > lo)
      survivors.push_back(j);

  double eta_best = lo;
  bool all_converged = true;
  while (!survivors.empty()) {
    // Index with the largest current value; ties go to the lowest index.
    int pick = survivors[0];
    for (int j : survivors)
      if (last_value[static_cast<std::size_t>(j)] >
          last_value[static_cast<std::size_t>(pick)])
        pick = j;

    // Per-index bisection of g_{s,pick} over [eta_best, hi].
    double llo = eta_best, lhi = hi;
    {
      double v = eng.eval_index(pick, lhi, trace, llo, lhi);
      int expand = 0;
      while (v >= lhi) {
        if (++expand > cfg.bracket_retries)
          throw BracketFailureError("hybrid: upper bracket expansion failed");
        lhi *= 2.0;
        hi = std::max(hi, lhi);
        v = eng.eval_index(pick, lhi, trace, llo, lhi);
      }
      lhi = v;
    }
    int outer = 0;
    while (lhi - llo > cfg.tol && outer++ < cfg.max_outer) {
      const double mid = 0.5 * (llo + lhi);
      const double v = eng.eval_index(pick, mid, trace, llo, lhi);
      if (v > mid)
        llo = v;
      else
        lhi = v;
    }
    if (lhi - llo > cfg.tol) all_converged = false;
    eta_best = std::max(eta_best, 0.5 * (llo + lhi));

    // Drop the finished index, then everything that can no longer lift the
    // fixed point above eta_best.
    std::erase(survivors, pick);
    if (!survivors.empty()) {
      const std::vector<double> vals =
          eng.eval_subset(survivors, eta_best, trace, eta_best, hi);
      std::vector<int> next;
      for (std::size_t t = 0; t < survivors.size(); ++t) {
        last_value[static_cast<std::size_t>(survivors[t])] = vals[t];
        if (vals[t] > eta_best) next.push_back(survivors[t]);
      }
      survivors = std::move(next);
    }
  }

  double eta = eta_best;
  const bool converged = polish(eng, eta, cfg, trace) && all_converged;
  finish(eng, trace, eta, converged, t0);
  return trace;
}

GEvalResult eval_generic(const SensingMatrix& a, double s, double eta,
                         OmegaTarget target, std::vector<Mat>* warm,
                         const InnerOptions& opts) {
  if (eta < 0) throw InvalidQueryError("eval: eta must be >= 0");
  if (!(s > 1.0)) throw InvalidQueryError("eval: s must exceed 1");
  Mat q = target == OmegaTarget::Omega2 ? a.a : gram(a.a);
  const InnerPenalty pen = target == OmegaTarget::Omega2
                               ? InnerPenalty::Spectral
                               : InnerPenalty::BlockSum;
  const int p = a.structure.p;
  const bool use_warm =
      warm != nullptr && warm->size() == static_cast<std::size_t>(p);

  std::vector<InnerSolution> sols(static_cast<std::size_t>(p));
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < p; ++i) {
    InnerProblem prob;
    prob.q = &q;
    prob.structure = a.structure;
    prob.index = i;
    prob.weight = s * eta;
    prob.penalty = pen;
    const Mat* w = nullptr;
    if (use_warm && !(*warm)[static_cast<std::size_t>(i)].empty())
      w = &(*warm)[static_cast<std::size_t>(i)];
    sols[static_cast<std::size_t>(i)] = solve_inner(prob, opts, w);
  }

  GEvalResult out;
  out.per_index.resize(static_cast<std::size_t>(p));
  if (warm != nullptr) warm->resize(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) {
    out.per_index[static_cast<std::size_t>(i)] =
        sols[static_cast<std::size_t>(i)].objective;
    out.value =
        std::max(out.value, out.per_index[static_cast<std::size_t>(i)]);
    if (warm != nullptr)
      (*warm)[static_cast<std::size_t>(i)] =
          std::move(sols[static_cast<std::size_t>(i)].p);
  }
  return out;
}

}  // namespace

GEvalResult eval_g(const SensingMatrix& a, double s, double eta,
                   std::vector<Mat>* warm, const InnerOptions& opts) {
  return eval_generic(a, s, eta, OmegaTarget::Omega2, warm, opts);
}

GEvalResult eval_h(const SensingMatrix& a, double s, double eta,
                   std::vector<Mat>* warm, const InnerOptions& opts) {
  return eval_generic(a, s, eta, OmegaTarget::OmegaBInf, warm, opts);
}

namespace {

// The eta comparisons amplify inner-solve noise by 1/(1 - slope) near the
// fixed point, so the per-index solves run an order tighter than the outer
// tolerance.
InnerOptions engine_inner(const FixedPointConfig& cfg) {
  InnerOptions inner = cfg.inner;
  inner.tol = std::min(inner.tol, 0.1 * cfg.tol);
  return inner;
}

}  // namespace

FixedPointTrace fp_naive(const OmegaQuery& query, const FixedPointConfig& cfg) {
  check_query(query, cfg);
  Engine eng(*query.a, query.s, query.target, engine_inner(cfg));
  return run_naive(eng, cfg);
}

FixedPointTrace fp_bisection(const OmegaQuery& query,
                             const FixedPointConfig& cfg) {
  check_query(query, cfg);
  Engine eng(*query.a, query.s, query.target, engine_inner(cfg));
  return run_bisection(eng, cfg);
}

FixedPointTrace fp_hybrid(const OmegaQuery& query,
                          const FixedPointConfig& cfg) {
  check_query(query, cfg);
  Engine eng(*query.a, query.s, query.target, engine_inner(cfg));
  return run_hybrid(eng, cfg);
}

std::pair<double, FixedPointTrace> omega_lower_bound(
    const OmegaQuery& query, const FixedPointConfig& cfg,
    const CertifierResult* verified) {
  FixedPointConfig local = cfg;
  if (verified != nullptr) {
    if (!verified->unconditional && query.s >= verified->s_star)
      throw InvalidQueryError("omega query needs s < s_*");
    local.check_s_star = false;
  }
  FixedPointTrace trace;
  switch (local.strategy) {
    case FpStrategy::Naive:
      trace = fp_naive(query, local);
      break;
    case FpStrategy::Bisection:
      trace = fp_bisection(query, local);
      break;
    case FpStrategy::Hybrid:
      trace = fp_hybrid(query, local);
      break;
  }
  return {trace.omega_lower_bound, trace};
}

}  // namespace blockcert
