#pragma once

// Shared numerical engine for the cell formula and the chain energies: a sum
// of bond terms J_j(i, mean of strains x_i..x_{i+j-1}) over strains x_0..x_{M-1}
// with clamped end layers and a fixed total strain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "homchain/errors.hpp"
#include "homchain/potential.hpp"

namespace homchain {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Hot-path potential: exact LJ form or its tangent-line approximation below a
// knot. Values are doubles with +inf on the hard-core branch.
struct BondPotential {
  PotentialSpec spec;
  bool approx = false;
  double knot = 0.0;
  double slope = 0.0;
  double knot_value = 0.0;

  double value(double z) const {
    if (approx && z < knot) return slope * (z - knot) + knot_value;
    return eval_raw(spec, z);
  }
  double d1(double z) const {
    if (approx && z < knot) return slope;
    if (z <= spec.shift) return -kInf;
    if (spec.kind != PotentialKind::registered_general) return detail::lj_d1(spec.delta, spec.epsilon, z - spec.shift);
    return derivative(spec, z);
  }
  double d2(double z) const {
    if (approx && z < knot) return 0.0;
    if (z <= spec.shift) return kInf;
    if (spec.kind != PotentialKind::registered_general) return detail::lj_d2(spec.delta, spec.epsilon, z - spec.shift);
    return second_derivative(spec, z);
  }
  double well() const { return minimizer(spec).first; }
  double depth() const { return minimizer(spec).second; }
};

inline BondPotential exact_bond(const PotentialSpec& s) {
  BondPotential b;
  b.spec = s;
  return b;
}

// knot_rel is measured from the potential's hard-core position.
inline BondPotential approx_bond(const PotentialSpec& s, double knot_rel, const ClassParams& cls) {
  const auto a = make_approximation(s, s.shift + knot_rel, cls);
  BondPotential b;
  b.spec = s;
  b.approx = true;
  b.knot = a.z_star;
  b.slope = a.slope_m;
  b.knot_value = a.knot_value;
  return b;
}

// Symmetric banded matrix: band[s][k] holds entry (s, s+k), k = 0..bw.
struct BandMatrix {
  int n = 0;
  int bw = 0;
  std::vector<double> data;

  BandMatrix(int n_, int bw_) : n(n_), bw(bw_), data(static_cast<std::size_t>(n_) * (bw_ + 1), 0.0) {}
  double& at(int s, int k) { return data[static_cast<std::size_t>(s) * (bw + 1) + k]; }
  double at(int s, int k) const { return data[static_cast<std::size_t>(s) * (bw + 1) + k]; }
};

// In-place banded Cholesky (upper factor stored in the same band layout).
inline bool banded_cholesky(BandMatrix& a) {
  for (int s = 0; s < a.n; ++s) {
    double d = a.at(s, 0);
    for (int k = 1; k <= a.bw && s - k >= 0; ++k) d -= a.at(s - k, k) * a.at(s - k, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    d = std::sqrt(d);
    a.at(s, 0) = d;
    for (int k = 1; k <= a.bw && s + k < a.n; ++k) {
      double v = a.at(s, k);
      for (int m = 1; m + k <= a.bw && s - m >= 0; ++m) v -= a.at(s - m, m) * a.at(s - m, m + k);
      a.at(s, k) = v / d;
    }
  }
  return true;
}

inline std::vector<double> banded_solve(const BandMatrix& u, std::vector<double> b) {
  // U^T y = b
  for (int s = 0; s < u.n; ++s) {
    double v = b[s];
    for (int k = 1; k <= u.bw && s - k >= 0; ++k) v -= u.at(s - k, k) * b[s - k];
    b[s] = v / u.at(s, 0);
  }
  // U x = y
  for (int s = u.n - 1; s >= 0; --s) {
    double v = b[s];
    for (int k = 1; k <= u.bw && s + k < u.n; ++k) v -= u.at(s, k) * b[s + k];
    b[s] = v / u.at(s, 0);
  }
  return b;
}

// Banded LDL^T without pivoting: unit lower factor in the band, D on the
// diagonal. Fails on a (near) zero pivot.
inline bool banded_ldlt(BandMatrix& a, int& negative_pivots) {
  negative_pivots = 0;
  for (int s = 0; s < a.n; ++s) {
    double d = a.at(s, 0);
    for (int k = 1; k <= a.bw && s - k >= 0; ++k) d -= a.at(s - k, k) * a.at(s - k, k) * a.at(s - k, 0);
    if (!std::isfinite(d) || std::abs(d) < 1e-300) return false;
    a.at(s, 0) = d;
    if (d < 0.0) ++negative_pivots;
    for (int k = 1; k <= a.bw && s + k < a.n; ++k) {
      double v = a.at(s, k);
      for (int m = 1; m + k <= a.bw && s - m >= 0; ++m) v -= a.at(s - m, m) * a.at(s - m, m + k) * a.at(s - m, 0);
      a.at(s, k) = v / d;
    }
  }
  return true;
}

inline std::vector<double> banded_ldlt_solve(const BandMatrix& f, std::vector<double> b) {
  for (int s = 0; s < f.n; ++s)
    for (int k = 1; k <= f.bw && s - k >= 0; ++k) b[s] -= f.at(s - k, k) * b[s - k];
  for (int s = 0; s < f.n; ++s) b[s] /= f.at(s, 0);
  for (int s = f.n - 1; s >= 0; --s)
    for (int k = 1; k <= f.bw && s + k < f.n; ++k) b[s] -= f.at(s, k) * b[s + k];
  return b;
}

struct DescentConfig {
  double grad_tol = 1e-8;
  int max_iter = 500;
  double strain_floor = 1e-8;
};

enum class DescentStatus { converged, max_iter };

struct DescentResult {
  std::vector<double> x;
  double energy = kInf;
  double pg_norm = kInf;
  int iterations = 0;
  DescentStatus status = DescentStatus::max_iter;
};

class StrainProblem {
public:
  // pots[j-1][i] is the order-j potential of the term starting at strain i,
  // i = 0..M-j. The first and last `clamp` strains are fixed to z; the free
  // strains keep their sum.
  StrainProblem(int M, double z, int clamp, std::vector<std::vector<BondPotential>> pots)
      : M_(M), K_(static_cast<int>(pots.size())), clamp_(clamp), z_(z), pots_(std::move(pots)) {
    if (M_ < 1) throw PreconditionError("strain problem: need at least one strain");
    if (K_ < 1) throw PreconditionError("strain problem: need K >= 1");
    for (int j = 1; j <= K_; ++j)
      if (static_cast<int>(pots_[j - 1].size()) != std::max(0, M_ - j + 1))
        throw PreconditionError("strain problem: wrong number of order-" + std::to_string(j) + " terms");
    if (2 * clamp_ > M_) throw PreconditionError("strain problem: clamp layers overlap");
  }

  int M() const { return M_; }
  int K() const { return K_; }
  int clamp() const { return clamp_; }
  double z() const { return z_; }
  int free_begin() const { return clamp_; }
  int free_end() const { return M_ - clamp_; }
  int free_count() const { return M_ - 2 * clamp_; }
  const BondPotential& pot(int j, int i) const { return pots_[j - 1][i]; }

  // Mean strain of the order-j term starting at i.
  double aggregate(const std::vector<double>& x, int j, int i) const {
    double s = 0.0;
    for (int k = 0; k < j; ++k) s += x[i + k];
    return s / j;
  }

  std::vector<double> affine() const { return std::vector<double>(M_, z_); }

  double energy(const std::vector<double>& x) const {
    double e = 0.0;
    for (int j = 1; j <= K_; ++j) {
      const auto& row = pots_[j - 1];
      double run = 0.0;
      for (int k = 0; k < j - 1; ++k) run += x[k];
      for (int i = 0; i + j <= M_; ++i) {
        run += x[i + j - 1];
        const double v = row[i].value(run / j);
        if (!(v < kInf)) return kInf;
        e += v;
        run -= x[i];
      }
    }
    return e;
  }

  // Energy of the terms that read strain s (for incremental updates).
  double local_energy(const std::vector<double>& x, int s) const {
    double e = 0.0;
    for (int j = 1; j <= K_; ++j)
      for (int i = std::max(0, s - j + 1); i <= std::min(s, M_ - j); ++i) {
        const double v = pots_[j - 1][i].value(aggregate(x, j, i));
        if (!(v < kInf)) return kInf;
        e += v;
      }
    return e;
  }

  std::vector<double> gradient(const std::vector<double>& x) const {
    std::vector<double> g(M_, 0.0);
    for (int j = 1; j <= K_; ++j)
      for (int i = 0; i + j <= M_; ++i) {
        const double d = pots_[j - 1][i].d1(aggregate(x, j, i)) / j;
        for (int k = 0; k < j; ++k) g[i + k] += d;
      }
    return g;
  }

  // Hessian restricted to the free strains.
  BandMatrix hessian_free(const std::vector<double>& x) const {
    const int n = free_count();
    BandMatrix h(n, K_ - 1);
    const int f0 = free_begin();
    for (int j = 1; j <= K_; ++j)
      for (int i = 0; i + j <= M_; ++i) {
        const double c = pots_[j - 1][i].d2(aggregate(x, j, i)) / (static_cast<double>(j) * j);
        for (int a = 0; a < j; ++a) {
          const int sa = i + a - f0;
          if (sa < 0 || sa >= n) continue;
          for (int b = a; b < j; ++b) {
            const int sb = i + b - f0;
            if (sb < 0 || sb >= n) continue;
            h.at(sa, sb - sa) += c;
          }
        }
      }
    return h;
  }

  // Gradient projected on {free strains, zero sum}.
  std::vector<double> projected_gradient(const std::vector<double>& g) const {
    const int n = free_count();
    std::vector<double> pg(n);
    double mean = 0.0;
    for (int s = 0; s < n; ++s) mean += g[free_begin() + s];
    mean /= n;
    for (int s = 0; s < n; ++s) pg[s] = g[free_begin() + s] - mean;
    return pg;
  }

  // Modified Newton with an equality constraint and Armijo backtracking.
  DescentResult descend(std::vector<double> x, const DescentConfig& cfg) const {
    DescentResult r;
    const int n = free_count();
    const int f0 = free_begin();
    double e = energy(x);
    if (!(e < kInf)) {
      r.x = std::move(x);
      return r;
    }
    if (n <= 1) {
      r.x = std::move(x);
      r.energy = e;
      r.pg_norm = 0.0;
      r.status = DescentStatus::converged;
      return r;
    }
    int it = 0;
    double pg_norm = kInf;
    for (; it <= cfg.max_iter; ++it) {
      const auto g = gradient(x);
      const auto pg = projected_gradient(g);
      pg_norm = 0.0;
      double g_norm = 0.0;
      for (int s = 0; s < n; ++s) {
        pg_norm = std::max(pg_norm, std::abs(pg[s]));
        g_norm = std::max(g_norm, std::abs(g[f0 + s]));
      }
      if (pg_norm <= cfg.grad_tol * std::max(1.0, g_norm)) {
        r.status = DescentStatus::converged;
        break;
      }
      if (it == cfg.max_iter) break;

      std::vector<double> gf(g.begin() + f0, g.begin() + f0 + n);
      const auto newton = newton_direction(x, gf);
      bool moved = armijo(x, e, newton, gf, cfg.strain_floor);
      if (!moved) {
        // Near the optimum the energy decrease drowns in rounding; accept a
        // Newton step that keeps the energy at rounding level and halves the
        // projected gradient.
        const double alpha = std::min(max_step(x, newton, cfg.strain_floor), 1.0);
        std::vector<double> trial = x;
        for (int s = 0; s < n; ++s) trial[f0 + s] = x[f0 + s] + alpha * newton[s];
        const double et = energy(trial);
        if (et < kInf && et <= e + 1e-13 * (std::abs(e) + 1.0)) {
          const auto pt = projected_gradient(gradient(trial));
          double pn = 0.0;
          for (double v : pt) pn = std::max(pn, std::abs(v));
          if (pn < 0.5 * pg_norm) {
            x.swap(trial);
            e = et;
            moved = true;
          }
        }
      }
      if (!moved) {
        std::vector<double> dir(n);
        for (int s = 0; s < n; ++s) dir[s] = -pg[s];
        moved = armijo(x, e, dir, gf, cfg.strain_floor);
      }
      if (!moved) break;
    }
    r.x = std::move(x);
    r.energy = energy(r.x);
    r.pg_norm = pg_norm;
    r.iterations = it;
    return r;
  }

private:
  // Backtracking from min(1, feasible step) with c = 1e-4 and halving.
  bool armijo(std::vector<double>& x, double& e, const std::vector<double>& dir, const std::vector<double>& gf,
              double floor) const {
    const int n = free_count();
    const int f0 = free_begin();
    double slope = 0.0;
    for (int s = 0; s < n; ++s) slope += gf[s] * dir[s];
    if (!(slope < 0.0)) return false;
    double alpha = std::min(max_step(x, dir, floor), 1.0);
    std::vector<double> trial = x;
    for (int ls = 0; ls < 80 && alpha > 0.0; ++ls, alpha *= 0.5) {
      for (int s = 0; s < n; ++s) trial[f0 + s] = x[f0 + s] + alpha * dir[s];
      const double et = energy(trial);
      if (et < e && et <= e + 1e-4 * alpha * slope) {
        x.swap(trial);
        e = et;
        return true;
      }
    }
    return false;
  }

  // Largest step keeping every free strain above the floor.
  double max_step(const std::vector<double>& x, const std::vector<double>& dir, double floor) const {
    double a = kInf;
    for (int s = 0; s < free_count(); ++s)
      if (dir[s] < 0.0) a = std::min(a, 0.99 * (x[free_begin() + s] - floor) / -dir[s]);
    return a;
  }

  // Newton step on the constraint surface {sum of free strains fixed}. The
  // exact step is used when the Hessian reduced to that surface is positive
  // definite, read off from the inertia: neg(H) - [1'H^-1 1 < 0] = 0.
  // Otherwise H is replaced by a diagonally dominant matrix with |H_ss| on the
  // diagonal, which turns negative curvature into curvature-scaled descent.
  std::vector<double> newton_direction(const std::vector<double>& x, const std::vector<double>& gf) const {
    const int n = free_count();
    const BandMatrix h0 = hessian_free(x);
    auto constrained = [&](const auto& solve) {
      const auto hg = solve(gf);
      const auto h1 = solve(std::vector<double>(n, 1.0));
      double num = 0.0, den = 0.0;
      for (int s = 0; s < n; ++s) {
        num += hg[s];
        den += h1[s];
      }
      const double mu = num / den;
      std::vector<double> d(n);
      for (int s = 0; s < n; ++s) d[s] = -hg[s] + mu * h1[s];
      return std::make_pair(d, den);
    };

    BandMatrix f = h0;
    int neg = 0;
    if (banded_ldlt(f, neg) && neg <= 1) {
      auto [d, den] = constrained([&](const std::vector<double>& b) { return banded_ldlt_solve(f, b); });
      const int reduced_neg = neg - (den < 0.0 ? 1 : 0);
      bool finite = std::isfinite(den) && den != 0.0;
      for (double v : d) finite = finite && std::isfinite(v);
      if (finite && reduced_neg == 0) return d;
    }

    BandMatrix h = h0;
    double scale = 0.0;
    for (int s = 0; s < n; ++s) scale = std::max(scale, std::abs(h0.at(s, 0)));
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = 1.0;
    for (int s = 0; s < n; ++s) {
      double off = 0.0;
      for (int k = 1; k <= h.bw; ++k) {
        if (s + k < n) off += std::abs(h0.at(s, k));
        if (s - k >= 0) off += std::abs(h0.at(s - k, k));
      }
      h.at(s, 0) = std::max(std::abs(h0.at(s, 0)), off + 1e-10 * scale);
    }
    if (!banded_cholesky(h)) {
      std::vector<double> d = projected_gradient_free(gf);
      for (auto& v : d) v = -v;
      return d;
    }
    return constrained([&](const std::vector<double>& b) { return banded_solve(h, b); }).first;
  }

  std::vector<double> projected_gradient_free(const std::vector<double>& gf) const {
    double mean = 0.0;
    for (double v : gf) mean += v;
    mean /= static_cast<double>(gf.size());
    std::vector<double> pg(gf.size());
    for (std::size_t s = 0; s < gf.size(); ++s) pg[s] = gf[s] - mean;
    return pg;
  }

  int M_;
  int K_;
  int clamp_;
  double z_;
  std::vector<std::vector<BondPotential>> pots_;
};

} // namespace homchain
