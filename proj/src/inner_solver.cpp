#include "blockcert/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "blockcert/block_core.hpp"
#include "blockcert/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace blockcert {

namespace {

// sigma_max of a small n x n matrix with its singular pair, via Jacobi on
// M^T M. Stack-free workspace comes from the caller; this sits in the hot
// loop of every solve.
struct TinyWork {
  std::vector<double> g, vecs;
  void resize(int n) {
    g.assign(static_cast<std::size_t>(n) * n, 0.0);
    vecs.assign(static_cast<std::size_t>(n) * n, 0.0);
  }
};

void top_pair_small(const double* m, int n, TinyWork& w, double& sigma,
                    double* u, double* v) {
  if (n == 1) {
    sigma = std::abs(m[0]);
    v[0] = 1.0;
    u[0] = m[0] >= 0 ? 1.0 : -1.0;
    return;
  }
  double* g = w.g.data();
  double* vv = w.vecs.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int t = 0; t < n; ++t) acc += m[t * n + i] * m[t * n + j];
      g[i * n + j] = acc;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) vv[i * n + j] = (i == j) ? 1.0 : 0.0;
  for (int sweep = 0; sweep < 30; ++sweep) {
    bool rotated = false;
    for (int pp = 0; pp < n; ++pp) {
      for (int qq = pp + 1; qq < n; ++qq) {
        const double apq = g[pp * n + qq];
        if (std::abs(apq) <=
            1e-16 * (std::abs(g[pp * n + pp]) + std::abs(g[qq * n + qq]) +
                     1e-300))
          continue;
        rotated = true;
        const double theta = (g[qq * n + qq] - g[pp * n + pp]) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = g[k * n + pp], akq = g[k * n + qq];
          g[k * n + pp] = c * akp - sn * akq;
          g[k * n + qq] = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = g[pp * n + k], aqk = g[qq * n + k];
          g[pp * n + k] = c * apk - sn * aqk;
          g[qq * n + k] = sn * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vv[k * n + pp], vkq = vv[k * n + qq];
          vv[k * n + pp] = c * vkp - sn * vkq;
          vv[k * n + qq] = sn * vkp + c * vkq;
        }
      }
    }
    if (!rotated) break;
  }
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (g[i * n + i] > g[best * n + best]) best = i;
  sigma = std::sqrt(std::max(0.0, g[best * n + best]));
  for (int i = 0; i < n; ++i) v[i] = vv[i * n + best];
  double un = 0.0;
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int t = 0; t < n; ++t) acc += m[i * n + t] * v[t];
    u[i] = acc;
    un += acc * acc;
  }
  un = std::sqrt(un);
  if (un > 0) {
    for (int i = 0; i < n; ++i) u[i] /= un;
  } else {
    for (int i = 0; i < n; ++i) u[i] = (i == 0) ? 1.0 : 0.0;
  }
}

struct EvalScratch {
  Mat c;                       // P^T Q, n x np
  std::vector<double> sig;     // sigma_j for all j
  std::vector<double> m;       // current n x n block
  std::vector<double> u, v;    // singular pair of the block
  TinyWork tiny;
  std::vector<double> pen_u, pen_v;
  TinyWork pen_tiny;

  void resize(const InnerProblem& prob) {
    const int n = prob.structure.n;
    const int np = prob.structure.dim();
    c = Mat(static_cast<std::size_t>(n), static_cast<std::size_t>(np));
    sig.assign(static_cast<std::size_t>(prob.structure.p), 0.0);
    m.assign(static_cast<std::size_t>(n) * n, 0.0);
    u.assign(static_cast<std::size_t>(n), 0.0);
    v.assign(static_cast<std::size_t>(n), 0.0);
    tiny.resize(n);
    pen_tiny.resize(n);
  }
};

// Spectral norms of all blocks delta_ij I - (P^T Q)_j; fills scratch.sig.
void eval_maxterm(const InnerProblem& prob, const Mat& p, EvalScratch& ws,
                  double& maxterm) {
  const int n = prob.structure.n;
  const int np = prob.structure.dim();
  const Mat& q = *prob.q;
  kernels::gemm_tn(p.data(), p.rows(), p.cols(), q.data(), q.cols(),
                   ws.c.data());
  maxterm = 0.0;
  for (int j = 0; j < prob.structure.p; ++j) {
    for (int r = 0; r < n; ++r)
      for (int t = 0; t < n; ++t) {
        double val = -ws.c(static_cast<std::size_t>(r),
                           static_cast<std::size_t>(j * n + t));
        if (j == prob.index && r == t) val += 1.0;
        ws.m[static_cast<std::size_t>(r) * n + t] = val;
      }
    double sg;
    top_pair_small(ws.m.data(), n, ws.tiny, sg, ws.u.data(), ws.v.data());
    ws.sig[static_cast<std::size_t>(j)] = sg;
    maxterm = std::max(maxterm, sg);
  }
  (void)np;
}

double eval_penalty(const InnerProblem& prob, const Mat& p, EvalScratch& ws) {
  const int n = prob.structure.n;
  switch (prob.penalty) {
    case InnerPenalty::None:
      return 0.0;
    case InnerPenalty::Spectral:
      return spectral_norm(p);
    case InnerPenalty::BlockSum: {
      double acc = 0.0;
      const int blocks = static_cast<int>(p.rows()) / n;
      std::vector<double>& mm = ws.m;
      for (int l = 0; l < blocks; ++l) {
        double frob = 0.0;
        for (int r = 0; r < n; ++r)
          for (int t = 0; t < n; ++t) {
            const double val = p(static_cast<std::size_t>(l * n + r),
                                 static_cast<std::size_t>(t));
            mm[static_cast<std::size_t>(r) * n + t] = val;
            frob += val * val;
          }
        if (frob == 0.0) continue;
        double sg;
        top_pair_small(mm.data(), n, ws.pen_tiny, sg, ws.u.data(),
                       ws.v.data());
        acc += sg;
      }
      return acc;
    }
  }
  return 0.0;
}

double combine(const InnerProblem& prob, double maxterm, double penalty) {
  return prob.penalty == InnerPenalty::None ? maxterm
                                            : prob.weight * maxterm + penalty;
}

void check_dims(const InnerProblem& prob, const Mat& p) {
  if (prob.q == nullptr) throw InvalidQueryError("inner problem without Q");
  const std::size_t np = static_cast<std::size_t>(prob.structure.dim());
  if (prob.q->cols() != np)
    throw DimensionMismatchError("inner problem: Q must have n*p columns");
  if (prob.index < 0 || prob.index >= prob.structure.p)
    throw InvalidQueryError("inner problem: index out of range");
  if (p.rows() != prob.q->rows() ||
      p.cols() != static_cast<std::size_t>(prob.structure.n))
    throw DimensionMismatchError("multiplier must be q_rows x n");
}

// Subgradient of the full objective at P given a completed eval_maxterm
// pass. Active max terms are averaged.
void subgradient(const InnerProblem& prob, const Mat& p, EvalScratch& ws,
                 double maxterm, double active_tol, Mat& grad) {
  const int n = prob.structure.n;
  const std::size_t qr = prob.q->rows();
  const Mat& q = *prob.q;
  std::fill(grad.values().begin(), grad.values().end(), 0.0);

  int active = 0;
  for (int j = 0; j < prob.structure.p; ++j)
    if (ws.sig[static_cast<std::size_t>(j)] >= maxterm - active_tol) ++active;
  const double w_eff =
      prob.penalty == InnerPenalty::None ? 1.0 : prob.weight;
  const double coef = active > 0 ? w_eff / active : 0.0;

  if (coef != 0.0) {
    for (int j = 0; j < prob.structure.p; ++j) {
      if (ws.sig[static_cast<std::size_t>(j)] < maxterm - active_tol) continue;
      // Rebuild the block and its singular pair.
      for (int r = 0; r < n; ++r)
        for (int t = 0; t < n; ++t) {
          double val = -ws.c(static_cast<std::size_t>(r),
                             static_cast<std::size_t>(j * n + t));
          if (j == prob.index && r == t) val += 1.0;
          ws.m[static_cast<std::size_t>(r) * n + t] = val;
        }
      double sg;
      top_pair_small(ws.m.data(), n, ws.tiny, sg, ws.u.data(), ws.v.data());
      // d sigma / dP = -Q_j v u^T
      for (std::size_t row = 0; row < qr; ++row) {
        double qv = 0.0;
        const double* qrow = q.row(row) + static_cast<std::size_t>(j) * n;
        for (int t = 0; t < n; ++t) qv += qrow[t] * ws.v[t];
        if (qv == 0.0) continue;
        double* grow = grad.row(row);
        const double c = coef * qv;
        for (int t = 0; t < n; ++t) grow[t] -= c * ws.u[t];
      }
    }
  }

  if (prob.penalty == InnerPenalty::Spectral) {
    TopSingularPair tp = top_singular_pair(p);
    if (tp.sigma > 0) {
      for (std::size_t row = 0; row < qr; ++row) {
        double* grow = grad.row(row);
        const double a = tp.left[row];
        for (int t = 0; t < n; ++t) grow[t] += a * tp.right[t];
      }
    }
  } else if (prob.penalty == InnerPenalty::BlockSum) {
    const int blocks = static_cast<int>(qr) / n;
    for (int l = 0; l < blocks; ++l) {
      double frob = 0.0;
      for (int r = 0; r < n; ++r)
        for (int t = 0; t < n; ++t) {
          const double val = p(static_cast<std::size_t>(l * n + r),
                               static_cast<std::size_t>(t));
          ws.m[static_cast<std::size_t>(r) * n + t] = val;
          frob += val * val;
        }
      if (frob == 0.0) continue;
      double sg;
      top_pair_small(ws.m.data(), n, ws.pen_tiny, sg, ws.u.data(),
                     ws.v.data());
      if (sg == 0.0) continue;
      for (int r = 0; r < n; ++r) {
        double* grow = grad.row(static_cast<std::size_t>(l * n + r));
        for (int t = 0; t < n; ++t) grow[t] += ws.u[r] * ws.v[t];
      }
    }
  }
}

// Block pseudo-inverse initializer Q_i (Q_i^T Q_i)^{-1}; zero when the block
// Gram is ill-conditioned.
Mat pinv_init(const InnerProblem& prob) {
  const int n = prob.structure.n;
  const std::size_t qr = prob.q->rows();
  const Mat& q = *prob.q;
  Mat qi(qr, static_cast<std::size_t>(n));
  for (std::size_t r = 0; r < qr; ++r)
    for (int t = 0; t < n; ++t)
      qi(r, static_cast<std::size_t>(t)) =
          q(r, static_cast<std::size_t>(prob.index * n + t));
  Mat g = gram(qi);
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n; ++t) {
    dmax = std::max(dmax, g(t, t));
    dmin = std::min(dmin, g(t, t));
  }
  if (!(dmax > 0.0) || dmin < 1e-12 * dmax)
    return Mat(qr, static_cast<std::size_t>(n));
  Mat inv = Mat::identity(static_cast<std::size_t>(n));
  if (!cholesky_solve_spd(g, inv)) return Mat(qr, static_cast<std::size_t>(n));
  return matmul(qi, inv);
}

}  // namespace

InnerObjectiveValue inner_objective(const InnerProblem& prob, const Mat& p) {
  check_dims(prob, p);
  EvalScratch ws;
  ws.resize(prob);
  InnerObjectiveValue out;
  eval_maxterm(prob, p, ws, out.maxterm);
  out.penalty_value = eval_penalty(prob, p, ws);
  out.objective = combine(prob, out.maxterm, out.penalty_value);
  return out;
}

InnerSolution solve_inner(const InnerProblem& prob, const InnerOptions& opts,
                          const Mat* warm) {
  const std::size_t qr = prob.q->rows();
  const std::size_t n = static_cast<std::size_t>(prob.structure.n);
  Mat zero(qr, n);
  check_dims(prob, zero);

  EvalScratch ws;
  ws.resize(prob);

  auto objective_at = [&](const Mat& p) {
    double maxterm;
    eval_maxterm(prob, p, ws, maxterm);
    return combine(prob, maxterm, eval_penalty(prob, p, ws));
  };

  // Start from the best of: zero, block pseudo-inverse, caller's warm start.
  Mat p_cur = std::move(zero);
  double f_cur = objective_at(p_cur);
  {
    Mat cand = pinv_init(prob);
    const double f = objective_at(cand);
    if (f < f_cur) {
      p_cur = std::move(cand);
      f_cur = f;
    }
  }
  if (warm != nullptr && warm->rows() == qr && warm->cols() == n) {
    const double f = objective_at(*warm);
    if (f < f_cur) {
      p_cur = *warm;
      f_cur = f;
    }
  }

  InnerSolution best;
  best.p = p_cur;
  best.objective = f_cur;

  Mat grad(qr, n);
  double delta = std::max(0.25 * f_cur, 4.0 * opts.tol);
  const double stop_gap = 0.5 * opts.tol;
  constexpr int kWindow = 40;
  double window_anchor = f_cur;

  int it = 0;
  for (; it < opts.max_iter; ++it) {
    double maxterm;
    eval_maxterm(prob, p_cur, ws, maxterm);
    const double pen = eval_penalty(prob, p_cur, ws);
    const double f = combine(prob, maxterm, pen);
    if (f < best.objective) {
      best.objective = f;
      best.p = p_cur;
    }
    if (opts.record_history) best.best_objective_history.push_back(best.objective);

    subgradient(prob, p_cur, ws, maxterm, opts.active_tol, grad);
    double g2 = 0.0;
    for (double x : grad.values()) g2 += x * x;
    if (g2 <= 1e-28) {  // flat: current point is optimal for this term
      delta = 0.0;
      break;
    }

    if ((it + 1) % kWindow == 0) {
      if (window_anchor - best.objective < 0.25 * delta) delta *= 0.5;
      window_anchor = best.objective;
      if (delta <= stop_gap) break;
    }

    const double target = best.objective - delta;
    const double step = (f - target) / g2;
    double* pd = p_cur.data();
    const double* gd = grad.data();
    for (std::size_t k = 0; k < p_cur.values().size(); ++k)
      pd[k] -= step * gd[k];
  }

  // Recompute the parts exactly at the best iterate.
  eval_maxterm(prob, best.p, ws, best.maxterm);
  best.penalty_value = eval_penalty(prob, best.p, ws);
  best.objective = combine(prob, best.maxterm, best.penalty_value);
  best.iterations = it;
  best.first_order_residual = delta;
  best.converged = delta <= stop_gap;
  return best;
}

CertifierResult verify_s_star(const SensingMatrix& a,
                              const VerifyOptions& opts) {
  SensingMatrix work = a;
  if (opts.normalize) work = normalize_columns(work);
  if (opts.qr) work = orthonormalize_rows(work);

  const int p = work.structure.p;
  CertifierResult out;
  out.normalized = opts.normalize;
  out.qr_applied = opts.qr;
  out.per_index.resize(static_cast<std::size_t>(p));

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
  for (int i = 0; i < p; ++i) {
    InnerProblem prob;
    prob.q = &work.a;
    prob.structure = work.structure;
    prob.index = i;
    prob.weight = 0.0;
    prob.penalty = InnerPenalty::None;
    out.per_index[static_cast<std::size_t>(i)] = solve_inner(prob, opts.inner);
  }

  double worst = 0.0;
  for (const InnerSolution& s : out.per_index)
    worst = std::max(worst, s.objective);
  if (worst < opts.unconditional_tol) {
    out.unconditional = true;
    out.s_star = std::numeric_limits<double>::infinity();
    out.k_star = p;
  } else {
    out.s_star = 1.0 / worst;
    out.k_star = static_cast<int>(std::floor(out.s_star / 2.0));
  }
  return out;
}

}  // namespace blockcert
