#include "blockcert/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "blockcert/block_core.hpp"

namespace blockcert {

const char* variant_name(RecoveryVariant v) {
  switch (v) {
    case RecoveryVariant::BsBp: return "bsbp";
    case RecoveryVariant::BsDs: return "bsds";
    case RecoveryVariant::BsLasso: return "bslasso";
    case RecoveryVariant::NoiseFree: return "noisefree";
  }
  return "?";
}

namespace {

void check_y(const SensingMatrix& a, const std::vector<double>& y) {
  if (y.size() != static_cast<std::size_t>(a.m))
    throw DimensionMismatchError("measurement vector length must equal m");
}

double binf_norm(const BlockStructure& bs, const std::vector<double>& v) {
  double best = 0.0;
  for (int i = 0; i < bs.p; ++i) {
    double acc = 0.0;
    for (int t = 0; t < bs.n; ++t) {
      const double x = v[static_cast<std::size_t>(i * bs.n + t)];
      acc += x * x;
    }
    best = std::max(best, std::sqrt(acc));
  }
  return best;
}

double b1_norm(const BlockStructure& bs, const std::vector<double>& v) {
  double acc = 0.0;
  for (int i = 0; i < bs.p; ++i) {
    double s = 0.0;
    for (int t = 0; t < bs.n; ++t) {
      const double x = v[static_cast<std::size_t>(i * bs.n + t)];
      s += x * x;
    }
    acc += std::sqrt(s);
  }
  return acc;
}

// In-place prox of tau*||.||_b1.
void shrink_blocks(const BlockStructure& bs, std::vector<double>& v,
                   double tau) {
  for (int i = 0; i < bs.p; ++i) {
    double acc = 0.0;
    for (int t = 0; t < bs.n; ++t) {
      const double x = v[static_cast<std::size_t>(i * bs.n + t)];
      acc += x * x;
    }
    const double nrm = std::sqrt(acc);
    const double scale = nrm > tau ? 1.0 - tau / nrm : 0.0;
    for (int t = 0; t < bs.n; ++t)
      v[static_cast<std::size_t>(i * bs.n + t)] *= scale;
  }
}

// Primal-dual (Chambolle-Pock) loop shared by BS-BP, BS-DS and the
// noise-free program: min ||z||_b1 + delta_C(K z) where C is a ball around
// the data. Both proxes are closed-form, so no inner linear solves.
struct SplitProblem {
  const Mat* k = nullptr;             // operator (A or the Gram matrix)
  BlockStructure z_structure;         // blocks of the primal variable
  std::vector<double> data;           // ball center (y or A^T y)
  double radius = 0.0;                // eps or mu
  bool block_ball = false;            // l2 ball (BP) vs block-binf ball (DS)
  double opnorm = 0.0;                // ||K||_2
};

// prox_{sigma g*}(xi) for g = indicator of the ball around `data`.
void dual_prox(const SplitProblem& sp, std::vector<double>& xi, double sigma) {
  const std::size_t nrows = sp.data.size();
  for (std::size_t i = 0; i < nrows; ++i) xi[i] -= sigma * sp.data[i];
  const double tau = sigma * sp.radius;
  if (tau <= 0.0) return;
  if (!sp.block_ball) {
    double nrm = 0.0;
    for (double v : xi) nrm += v * v;
    nrm = std::sqrt(nrm);
    const double scale = nrm > tau ? 1.0 - tau / nrm : 0.0;
    for (double& v : xi) v *= scale;
  } else {
    shrink_blocks(sp.z_structure, xi, tau);
  }
}

// Rescaled dual objective (valid lower bound on the primal optimum).
double dual_value(const SplitProblem& sp, const std::vector<double>& w) {
  std::vector<double> ktw = matvec_t(*sp.k, w);
  const double dual_feas = binf_norm(sp.z_structure, ktw);
  const double scale = std::max(1.0, dual_feas);
  double inner = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) inner += sp.data[i] * w[i];
  double wnorm;
  if (!sp.block_ball) {
    double acc = 0.0;
    for (double v : w) acc += v * v;
    wnorm = std::sqrt(acc);
  } else {
    wnorm = b1_norm(sp.z_structure, w);
  }
  return (-inner - sp.radius * wnorm) / scale;
}

RecoveryResult run_split(const SensingMatrix& a, const SplitProblem& sp,
                         const RecoveryOptions& opts,
                         RecoveryVariant variant) {
  const std::size_t nz = sp.k->cols();
  const std::size_t nw = sp.k->rows();
  const double step = 0.95 / std::max(sp.opnorm, 1e-300);
  const double sigma = step, tau = step;

  std::vector<double> z(nz, 0.0), zbar(nz, 0.0), w(nw, 0.0);
  const double data_scale =
      std::max(1.0, sp.block_ball ? binf_norm(sp.z_structure, sp.data)
                                  : norm2(sp.data));

  RecoveryResult out;
  out.xhat = BlockVector(a.structure);
  int it = 0;
  bool converged = false;
  double gap = 0.0, feas = 0.0;
  for (; it < opts.max_iter; ++it) {
    // Dual ascent step.
    std::vector<double> kz = matvec(*sp.k, zbar);
    for (std::size_t i = 0; i < nw; ++i) w[i] += sigma * kz[i];
    dual_prox(sp, w, sigma);
    // Primal descent step.
    std::vector<double> ktw = matvec_t(*sp.k, w);
    std::vector<double> z_new = z;
    for (std::size_t i = 0; i < nz; ++i) z_new[i] -= tau * ktw[i];
    shrink_blocks(sp.z_structure, z_new, tau);
    for (std::size_t i = 0; i < nz; ++i) zbar[i] = 2.0 * z_new[i] - z[i];
    z.swap(z_new);

    if ((it + 1) % opts.check_interval != 0) continue;
    std::vector<double> res = matvec(*sp.k, z);
    for (std::size_t i = 0; i < nw; ++i) res[i] -= sp.data[i];
    const double viol = sp.block_ball ? binf_norm(sp.z_structure, res)
                                      : norm2(res);
    feas = std::max(0.0, viol - sp.radius) / data_scale;
    const double primal = b1_norm(sp.z_structure, z);
    gap = primal - dual_value(sp, w);
    if (opts.record_objectives) out.objective_history.push_back(primal);
    if (feas <= opts.feas_tol && gap <= opts.obj_tol * std::max(1.0, primal)) {
      converged = true;
      ++it;
      break;
    }
  }

  out.xhat.values = z;
  out.objective = b1_norm(sp.z_structure, z);
  out.iterations = it;
  out.converged = converged;
  out.duality_gap = gap;
  out.status = converged ? "converged" : "max_iterations";
  // Feasibility against the variant's own constraint.
  std::vector<double> res = matvec(*sp.k, z);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] -= sp.data[i];
  if (variant == RecoveryVariant::NoiseFree) {
    out.feasibility_residual = norm2(res);
  } else if (!sp.block_ball) {
    out.feasibility_residual = std::max(0.0, norm2(res) - sp.radius);
  } else {
    out.feasibility_residual =
        std::max(0.0, binf_norm(sp.z_structure, res) - sp.radius);
  }
  return out;
}

}  // namespace

RecoveryResult solve_bsbp(const SensingMatrix& a, const std::vector<double>& y,
                          double eps, const RecoveryOptions& opts) {
  check_y(a, y);
  if (eps < 0) throw InvalidQueryError("solve_bsbp: eps must be >= 0");
  const double ynorm = norm2(y);
  if (ynorm > eps) {
    // Infeasibility is decidable up front from the least-squares residual.
    const double r_ls = least_squares_residual(a.a, y);
    if (r_ls > eps + std::max(1e-8, opts.feas_tol) * std::max(1.0, ynorm))
      throw InfeasibleError("solve_bsbp: no z meets ||y - A z|| <= eps");
  }
  SplitProblem sp;
  sp.k = &a.a;
  sp.z_structure = a.structure;
  sp.data = y;
  sp.radius = eps;
  sp.block_ball = false;
  sp.opnorm = spectral_norm(a.a);
  return run_split(a, sp, opts, RecoveryVariant::BsBp);
}

RecoveryResult solve_noisefree(const SensingMatrix& a,
                               const std::vector<double>& y,
                               const RecoveryOptions& opts) {
  check_y(a, y);
  const double ynorm = norm2(y);
  if (ynorm == 0.0) {
    RecoveryResult out;
    out.xhat = BlockVector(a.structure);
    out.converged = true;
    out.status = "converged";
    return out;
  }
  const double r_ls = least_squares_residual(a.a, y);
  if (r_ls > std::max(1e-8, opts.feas_tol) * std::max(1.0, ynorm))
    throw InfeasibleError("solve_noisefree: y is not in the range of A");
  SplitProblem sp;
  sp.k = &a.a;
  sp.z_structure = a.structure;
  sp.data = y;
  sp.radius = 0.0;
  sp.block_ball = false;
  sp.opnorm = spectral_norm(a.a);
  return run_split(a, sp, opts, RecoveryVariant::NoiseFree);
}

RecoveryResult solve_bsds(const SensingMatrix& a, const std::vector<double>& y,
                          double mu, const RecoveryOptions& opts) {
  check_y(a, y);
  if (!(mu > 0)) throw InvalidQueryError("solve_bsds: mu must be > 0");
  Mat g = gram(a.a);
  std::vector<double> d = matvec_t(a.a, y);
  const double sig = spectral_norm(a.a);
  SplitProblem sp;
  sp.k = &g;
  sp.z_structure = a.structure;
  sp.data = std::move(d);
  sp.radius = mu;
  sp.block_ball = true;
  sp.opnorm = sig * sig;
  return run_split(a, sp, opts, RecoveryVariant::BsDs);
}

RecoveryResult solve_bslasso(const SensingMatrix& a,
                             const std::vector<double>& y, double mu,
                             const RecoveryOptions& opts) {
  check_y(a, y);
  if (!(mu > 0)) throw InvalidQueryError("solve_bslasso: mu must be > 0");
  const BlockStructure bs = a.structure;
  const std::size_t nz = a.a.cols();

  std::vector<double> aty = matvec_t(a.a, y);
  RecoveryResult out;
  out.xhat = BlockVector(bs);
  // mu at or above ||A^T y||_binf keeps the zero point optimal; the boundary
  // resolves toward the sparse solution.
  if (binf_norm(bs, aty) <= mu) {
    out.converged = true;
    out.status = "converged";
    double acc = 0.0;
    for (double v : y) acc += v * v;
    out.objective = 0.5 * acc;
    return out;
  }

  const double sig = spectral_norm(a.a);
  const double lip = std::max(sig * sig, 1e-300);
  const double step = 1.0 / lip;

  auto objective_at = [&](const std::vector<double>& z) {
    std::vector<double> r = matvec(a.a, z);
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double d = r[i] - y[i];
      acc += d * d;
    }
    return 0.5 * acc + mu * b1_norm(bs, z);
  };

  // Monotone FISTA: accelerated steps, but the iterate only moves when the
  // objective does not increase.
  std::vector<double> zk(nz, 0.0), zk_prev(nz, 0.0), v(nz, 0.0);
  double fk = objective_at(zk);
  double t_k = 1.0;
  int it = 0;
  bool converged = false;
  double kkt = 0.0;
  for (; it < opts.max_iter; ++it) {
    std::vector<double> av = matvec(a.a, v);
    for (std::size_t i = 0; i < av.size(); ++i) av[i] -= y[i];
    std::vector<double> grad = matvec_t(a.a, av);
    std::vector<double> u = v;
    for (std::size_t i = 0; i < nz; ++i) u[i] -= step * grad[i];
    shrink_blocks(bs, u, step * mu);
    const double fu = objective_at(u);

    zk_prev.swap(zk);
    double fk_new;
    if (fu <= fk) {
      zk = u;
      fk_new = fu;
    } else {
      zk = zk_prev;  // keep the previous iterate; momentum still uses u
      fk_new = fk;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_k * t_k));
    for (std::size_t i = 0; i < nz; ++i)
      v[i] = zk[i] + (t_k / t_next) * (u[i] - zk[i]) +
             ((t_k - 1.0) / t_next) * (zk[i] - zk_prev[i]);
    t_k = t_next;
    fk = fk_new;
    if (opts.record_objectives) out.objective_history.push_back(fk);

    if ((it + 1) % opts.check_interval != 0) continue;
    // KKT residual: residual gradient plus mu times the tightest subgradient.
    std::vector<double> rz = matvec(a.a, zk);
    for (std::size_t i = 0; i < rz.size(); ++i) rz[i] -= y[i];
    std::vector<double> g = matvec_t(a.a, rz);
    double acc = 0.0;
    for (int b = 0; b < bs.p; ++b) {
      double zn = 0.0, gn = 0.0;
      for (int t = 0; t < bs.n; ++t) {
        const double zv = zk[static_cast<std::size_t>(b * bs.n + t)];
        const double gv = g[static_cast<std::size_t>(b * bs.n + t)];
        zn += zv * zv;
        gn += gv * gv;
      }
      zn = std::sqrt(zn);
      gn = std::sqrt(gn);
      if (zn > 0) {
        double blk = 0.0;
        for (int t = 0; t < bs.n; ++t) {
          const double zv = zk[static_cast<std::size_t>(b * bs.n + t)];
          const double gv = g[static_cast<std::size_t>(b * bs.n + t)];
          const double r = gv + mu * zv / zn;
          blk += r * r;
        }
        acc += blk;
      } else {
        const double excess = std::max(0.0, gn - mu);
        acc += excess * excess;
      }
    }
    kkt = std::sqrt(acc);
    if (kkt <= opts.kkt_tol) {
      converged = true;
      ++it;
      break;
    }
  }

  out.xhat.values = zk;
  out.objective = fk;
  out.iterations = it;
  out.converged = converged;
  out.kkt_residual = kkt;
  out.feasibility_residual = kkt;  // unconstrained: report the KKT residual
  out.status = converged ? "converged" : "max_iterations";
  return out;
}

}  // namespace blockcert
