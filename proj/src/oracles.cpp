#include "blockcert/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "blockcert/block_core.hpp"
#include "blockcert/rng.hpp"

namespace blockcert {

namespace {

constexpr int kMaxDim = 12;
constexpr int kMaxKernelDim = 6;

void check_cfg(const OracleConfig& cfg) {
  if (cfg.direction_samples < 8)
    throw InvalidQueryError("oracle: direction_samples must be >= 8");
  if (cfg.restarts < 1) throw InvalidQueryError("oracle: restarts must be >= 1");
}

double b1_of(const BlockStructure& bs, const std::vector<double>& z) {
  double acc = 0.0;
  for (int i = 0; i < bs.p; ++i) {
    double s = 0.0;
    for (int t = 0; t < bs.n; ++t) {
      const double v = z[static_cast<std::size_t>(i * bs.n + t)];
      s += v * v;
    }
    acc += std::sqrt(s);
  }
  return acc;
}

double binf_of(const BlockStructure& bs, const std::vector<double>& z) {
  double best = 0.0;
  for (int i = 0; i < bs.p; ++i) {
    double s = 0.0;
    for (int t = 0; t < bs.n; ++t) {
      const double v = z[static_cast<std::size_t>(i * bs.n + t)];
      s += v * v;
    }
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

void normalize(std::vector<double>& z) {
  const double n = norm2(z);
  if (n > 0)
    for (double& v : z) v /= n;
}

// Derivative-free ascent of a scale-invariant function over the unit
// sphere: coordinate probes with a shrinking radius plus a few seeded
// random directions per sweep.
double sphere_maximize(const std::function<double(const std::vector<double>&)>& f,
                       std::vector<double> z, double step_floor,
                       std::uint64_t probe_seed,
                       std::vector<double>* argbest = nullptr) {
  normalize(z);
  double best = f(z);
  const std::size_t d = z.size();
  double h = 0.5;
  SplitMix64 rng = substream(probe_seed, 0);
  std::vector<double> cand(d);
  while (h > step_floor) {
    bool improved = false;
    for (std::size_t k = 0; k < d; ++k) {
      for (int sgn = -1; sgn <= 1; sgn += 2) {
        cand = z;
        cand[k] += sgn * h;
        normalize(cand);
        const double v = f(cand);
        if (v > best) {
          best = v;
          z = cand;
          improved = true;
        }
      }
    }
    for (std::size_t extra = 0; extra < 2 * d; ++extra) {
      cand = z;
      for (std::size_t k = 0; k < d; ++k) cand[k] += h * rng.normal();
      normalize(cand);
      const double v = f(cand);
      if (v > best) {
        best = v;
        z = cand;
        improved = true;
      }
    }
    if (!improved) h *= 0.5;
  }
  if (argbest != nullptr) *argbest = z;
  return best;
}

// Deterministic directions on the (n-1)-sphere: the 2n axis points first,
// then seeded pseudo-random ones. Nested in `count`.
std::vector<std::vector<double>> sphere_directions(int n, int count,
                                                   std::uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  for (int j = 0; j < n && static_cast<int>(dirs.size()) < count; ++j)
    for (int sgn = -1; sgn <= 1; sgn += 2) {
      std::vector<double> d(static_cast<std::size_t>(n), 0.0);
      d[static_cast<std::size_t>(j)] = sgn;
      dirs.push_back(std::move(d));
      if (static_cast<int>(dirs.size()) >= count) break;
    }
  SplitMix64 rng = substream(seed, 7);
  while (static_cast<int>(dirs.size()) < count) {
    std::vector<double> d(static_cast<std::size_t>(n));
    for (double& v : d) v = rng.normal();
    normalize(d);
    dirs.push_back(std::move(d));
  }
  return dirs;
}

Mat oracle_q(const SensingMatrix& a, OmegaTarget target) {
  return target == OmegaTarget::Omega2 ? a.a : gram(a.a);
}

double diamond_norm(const BlockStructure& bs, OmegaTarget target,
                    const std::vector<double>& v) {
  return target == OmegaTarget::Omega2 ? norm2(v) : binf_of(bs, v);
}

}  // namespace

double oracle_f_s(const SensingMatrix& a, OmegaTarget target, double s,
                  double eta, const OracleConfig& cfg) {
  check_cfg(cfg);
  const BlockStructure bs = a.structure;
  if (bs.dim() > kMaxDim)
    throw TooLargeError("oracle_f_s: n*p exceeds the desk-scale cap");
  if (eta < 0) throw InvalidQueryError("oracle_f_s: eta must be >= 0");
  if (eta == 0.0) return 0.0;

  Mat q = oracle_q(a, target);
  const double budget = s * eta;
  auto ratio = [&](const std::vector<double>& z) {
    const std::vector<double> qz = matvec(q, z);
    const double den =
        std::max(diamond_norm(bs, target, qz), b1_of(bs, z) / budget);
    if (den <= 0) return 0.0;
    return binf_of(bs, z) / den;
  };

  double best = 0.0;
  const auto dirs = sphere_directions(bs.n, cfg.direction_samples, cfg.seed);
  std::uint64_t probe = 1;
  for (int i = 0; i < bs.p; ++i) {
    for (const auto& d : dirs) {
      std::vector<double> z(static_cast<std::size_t>(bs.dim()), 0.0);
      for (int t = 0; t < bs.n; ++t)
        z[static_cast<std::size_t>(i * bs.n + t)] = d[static_cast<std::size_t>(t)];
      best = std::max(best, sphere_maximize(ratio, z, 1e-6, probe++));
    }
  }
  SplitMix64 rng = substream(cfg.seed, 99);
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> z(static_cast<std::size_t>(bs.dim()));
    for (double& v : z) v = rng.normal();
    best = std::max(best, sphere_maximize(ratio, z, 1e-6, probe++));
  }
  return best;
}

double oracle_omega(const SensingMatrix& a, double s, OmegaTarget target,
                    const OracleConfig& cfg) {
  check_cfg(cfg);
  if (a.structure.dim() > kMaxDim)
    throw TooLargeError("oracle_omega: n*p exceeds the desk-scale cap");
  if (!(s > 1.0)) throw InvalidQueryError("oracle_omega: s must exceed 1");

  auto f = [&](double eta) { return oracle_f_s(a, target, s, eta, cfg); };

  double lo = 0.1, hi = 10.0;
  int tries = 0;
  while (!(f(lo) > lo)) {
    lo *= 0.1;
    if (++tries > 8)
      throw NoBracketError("oracle_omega: no eta with f(eta) > eta");
  }
  tries = 0;
  while (!(f(hi) < hi)) {
    hi *= 10.0;
    if (++tries > 8)
      throw NoBracketError("oracle_omega: no eta with f(eta) < eta");
  }
  while (hi - lo > cfg.tol * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > mid)
      lo = mid;
    else
      hi = mid;
  }
  return 2.0 / (lo + hi);
}

double oracle_s_star(const SensingMatrix& a, const OracleConfig& cfg) {
  check_cfg(cfg);
  const BlockStructure bs = a.structure;
  Mat z = kernel_basis(a.a);
  const std::size_t d = z.cols();
  if (d == 0) return std::numeric_limits<double>::infinity();
  if (d > kMaxKernelDim)
    throw KernelTooLargeError("oracle_s_star: kernel dimension exceeds cap");

  auto neg_ratio = [&](const std::vector<double>& c) {
    std::vector<double> v = matvec(z, c);
    const double bi = binf_of(bs, v);
    if (bi <= 0) return -std::numeric_limits<double>::infinity();
    return -b1_of(bs, v) / bi;
  };

  double best = std::numeric_limits<double>::infinity();
  std::uint64_t probe = 5000;
  auto consider = [&](std::vector<double> c) {
    best = std::min(best, -sphere_maximize(neg_ratio, std::move(c), 1e-7,
                                           probe++));
  };

  if (d == 1) {
    consider({1.0});
  } else if (d == 2) {
    const int grid = 720;
    for (int k = 0; k < grid; ++k) {
      const double a0 = 3.14159265358979323846 * k / grid;
      consider({std::cos(a0), std::sin(a0)});
    }
  } else {
    // Low-discrepancy-ish deterministic coverage plus random restarts.
    SplitMix64 rng = substream(cfg.seed, 11);
    const int covers = 256 * static_cast<int>(d);
    for (int k = 0; k < covers; ++k) {
      std::vector<double> c(d);
      for (double& v : c) v = rng.normal();
      consider(std::move(c));
    }
  }
  SplitMix64 rng = substream(cfg.seed, 13);
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> c(d);
    for (double& v : c) v = rng.normal();
    consider(std::move(c));
  }
  return best;
}

double oracle_rho(const SensingMatrix& a, double s, const OracleConfig& cfg) {
  check_cfg(cfg);
  const BlockStructure bs = a.structure;
  if (bs.dim() > kMaxDim)
    throw TooLargeError("oracle_rho: n*p exceeds the desk-scale cap");
  if (!(s >= 1.0)) throw InvalidQueryError("oracle_rho: s must be >= 1");
  const double radius = std::sqrt(s);

  // Exact projection onto {sum_i ||z_i||_2 <= R} for unit z: water-filling
  // on the block norms.
  auto project_b1 = [&](std::vector<double>& z) {
    for (int pass = 0; pass < 8; ++pass) {
      normalize(z);
      const double b1 = b1_of(bs, z);
      if (b1 <= radius * (1.0 + 1e-12)) return true;
      std::vector<double> norms(static_cast<std::size_t>(bs.p));
      for (int i = 0; i < bs.p; ++i) {
        double acc = 0.0;
        for (int t = 0; t < bs.n; ++t) {
          const double v = z[static_cast<std::size_t>(i * bs.n + t)];
          acc += v * v;
        }
        norms[static_cast<std::size_t>(i)] = std::sqrt(acc);
      }
      std::vector<double> sorted = norms;
      std::sort(sorted.begin(), sorted.end(), std::greater<double>());
      double cum = 0.0, theta = 0.0;
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        cum += sorted[k];
        const double cand = (cum - radius) / static_cast<double>(k + 1);
        if (k + 1 == sorted.size() || cand >= sorted[k + 1]) {
          theta = cand;
          break;
        }
      }
      theta = std::max(0.0, theta);
      for (int i = 0; i < bs.p; ++i) {
        const double nrm = norms[static_cast<std::size_t>(i)];
        const double scale = nrm > theta ? (nrm - theta) / nrm : 0.0;
        for (int t = 0; t < bs.n; ++t)
          z[static_cast<std::size_t>(i * bs.n + t)] *= scale;
      }
    }
    normalize(z);
    return b1_of(bs, z) <= radius * (1.0 + 1e-9);
  };

  auto value = [&](const std::vector<double>& z) {
    return norm2(matvec(a.a, z));
  };

  double best = std::numeric_limits<double>::infinity();
  // Single-block candidates: the smallest singular directions of each
  // column block are feasible for every s >= 1.
  for (int i = 0; i < bs.p; ++i) {
    Mat blk(a.a.rows(), static_cast<std::size_t>(bs.n));
    for (std::size_t r = 0; r < a.a.rows(); ++r)
      for (int t = 0; t < bs.n; ++t)
        blk(r, static_cast<std::size_t>(t)) =
            a.a(r, static_cast<std::size_t>(i * bs.n + t));
    std::vector<double> ev;
    Mat vecs;
    jacobi_eig_sym(gram(blk), ev, vecs);
    std::vector<double> z(static_cast<std::size_t>(bs.dim()), 0.0);
    const std::size_t last = vecs.cols() - 1;  // smallest eigenvalue
    for (int t = 0; t < bs.n; ++t)
      z[static_cast<std::size_t>(i * bs.n + t)] =
          vecs(static_cast<std::size_t>(t), last);
    normalize(z);
    best = std::min(best, value(z));
  }

  // Multi-start descent with feasibility repair.
  SplitMix64 rng = substream(cfg.seed, 17);
  const std::size_t dim = static_cast<std::size_t>(bs.dim());
  for (int r = 0; r < cfg.restarts; ++r) {
    std::vector<double> z(dim);
    for (double& v : z) v = rng.normal();
    if (!project_b1(z)) continue;
    double cur = value(z);
    double h = 0.5;
    std::vector<double> cand(dim);
    while (h > 1e-6) {
      bool improved = false;
      for (std::size_t k = 0; k < dim; ++k) {
        for (int sgn = -1; sgn <= 1; sgn += 2) {
          cand = z;
          cand[k] += sgn * h;
          if (!project_b1(cand)) continue;
          const double v = value(cand);
          if (v < cur) {
            cur = v;
            z = cand;
            improved = true;
          }
        }
      }
      if (!improved) h *= 0.5;
    }
    best = std::min(best, cur);
  }
  return best;
}

}  // namespace blockcert
