#pragma once

// Finite-window cell formulas: numerical minimization over clamped corrector
// profiles, a brute-force oracle for small instances, and Monte Carlo
// estimation of the N -> infinity limit.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homchain/errors.hpp"
#include "homchain/ext_real.hpp"
#include "homchain/parallel.hpp"
#include "homchain/potential.hpp"
#include "homchain/random_medium.hpp"
#include "homchain/stats.hpp"
#include "homchain/strain_problem.hpp"

namespace homchain {

struct SolverConfig {
  double grad_tol = 1e-8;
  int n_starts = 8;
  double strain_floor = 1e-8;
  int max_iter = 500;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct Window {
  double a = 0.0;
  double b = 1.0;
  friend bool operator==(const Window&, const Window&) = default;
};

// Knot of approximation level L: (1/(2d)) 2^{-L}, measured from the hard core.
inline double knot_position(const ClassParams& cls, int L) {
  if (L < 0) throw PreconditionError("knot level must be >= 0");
  return std::ldexp(0.5 / cls.d, -L);
}

struct CellProblem {
  ChainModel model;
  double z = 1.0;
  std::int64_t N = 2;
  int K = 1;
  Window window;
  std::optional<int> approx_L;

  IndexRange sites() const { return window_indices(N, window.a, window.b); }

  void validate() const {
    if (std::isnan(z) || std::isinf(z)) throw DomainError("cell problem: strain must be finite");
    if (K < 1) throw PreconditionError("cell problem: K must be >= 1");
    if (K != model.K()) throw PreconditionError("cell problem: K differs from the medium's interaction range");
    if (N < 2 * static_cast<std::int64_t>(K)) throw PreconditionError("cell problem: need N >= 2K");
    if (!(window.a < window.b)) throw PreconditionError("cell problem: empty window");
    if (sites().count < 2 * static_cast<std::int64_t>(K))
      throw PreconditionError("cell problem: window holds fewer than 2K sites");
    if (approx_L && *approx_L < 0) throw PreconditionError("cell problem: approximation level must be >= 0");
  }
};

enum class SolveStatus { converged, max_iter, infeasible_infinite };

inline std::string to_string(SolveStatus s) {
  switch (s) {
  case SolveStatus::converged: return "converged";
  case SolveStatus::max_iter: return "max_iter";
  case SolveStatus::infeasible_infinite: return "infeasible_infinite";
  }
  return "?";
}

struct CandidateRecord {
  std::string name;
  double value = kInf; // per site, after descent
  int iterations = 0;
};

struct CellDiagnostics {
  std::vector<CandidateRecord> candidates;
  std::string winner;
  double start_spread = 0.0; // max - min over random starts
  bool starts_disagree = false;
};

struct CellSolution {
  ExtReal value = kInfinity;
  std::vector<double> phi;     // phi^0 .. phi^M
  std::vector<double> strains; // z^0 .. z^{M-1}
  SolveStatus status = SolveStatus::infeasible_infinite;
  int candidates_tried = 0;
  CellDiagnostics diagnostics;
};

// Strain-form problem of a cell: M strains, K-1 clamped on each side.
inline StrainProblem make_strain_problem(const CellProblem& p, bool use_approx) {
  const auto r = p.sites();
  const int M = static_cast<int>(r.count);
  const ClassParams& cls = p.model.class_params();
  std::vector<std::vector<BondPotential>> pots(p.K);
  for (int j = 1; j <= p.K; ++j) {
    pots[j - 1].reserve(M - j + 1);
    for (int i = 0; i + j <= M; ++i) {
      const PotentialSpec s = p.model.potential_at(r.first + i, j);
      pots[j - 1].push_back(use_approx ? approx_bond(s, knot_position(cls, *p.approx_L), cls) : exact_bond(s));
    }
  }
  return StrainProblem(M, p.z, p.K - 1, std::move(pots));
}

// phi^0 = 0, phi^{i+1} = phi^i + (z^i - z); clamp layers set exactly to zero.
inline std::vector<double> corrector_from_strains(const std::vector<double>& x, double z, int K) {
  const int M = static_cast<int>(x.size());
  std::vector<double> phi(M + 1, 0.0);
  for (int i = 0; i < M; ++i) phi[i + 1] = phi[i] + (x[i] - z);
  for (int i = 0; i < K && i <= M; ++i) {
    phi[i] = 0.0;
    phi[M - i] = 0.0;
  }
  return phi;
}

namespace detail {

inline double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double a : v) s += a * a;
  return std::sqrt(s);
}

inline CellSolution package(const StrainProblem& prob, std::vector<double> x, SolveStatus status, int K) {
  CellSolution sol;
  const double e = prob.energy(x);
  sol.value = e < kInf ? ExtReal(e / prob.M()) : kInfinity;
  sol.phi = corrector_from_strains(x, prob.z(), K);
  sol.strains = std::move(x);
  sol.status = status;
  return sol;
}

// Inverts J' on [lo, hi] where J' is nondecreasing: returns x with J'(x) = lam.
inline double invert_derivative(const BondPotential& b, double lam, double lo, double hi) {
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double d = b.d1(x) - lam;
    if (d == 0.0) return x;
    if (d > 0.0)
      hi = x;
    else
      lo = x;
    const double c = b.d2(x);
    double nx = (c > 0.0 && std::isfinite(c)) ? x - d / c : 0.5 * (lo + hi);
    if (!(nx > lo && nx < hi)) nx = 0.5 * (lo + hi);
    if (std::abs(nx - x) <= 1e-15 * std::max(1.0, std::abs(x)) || hi - lo <= 1e-15 * std::max(1.0, hi)) return nx;
    x = nx;
  }
  return x;
}

struct Branch {
  double lo; // open end (hard core) or well
  double hi;
};

// Multiplier bisection for min sum J_i(x_i) with mean x = z over the given
// monotone-derivative branches. Returns nullopt when z is outside the range.
inline std::optional<std::pair<std::vector<double>, double>>
branch_dual(const std::vector<BondPotential>& pots, const std::vector<Branch>& br, double z, double tol,
            bool lower_branch) {
  const std::size_t n = pots.size();
  const double target = z * static_cast<double>(n);
  auto strains = [&](double lam) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = invert_derivative(pots[i], lam, br[i].lo, br[i].hi);
    return x;
  };
  auto total = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  };
  double lo_sum = 0.0, hi_sum = 0.0;
  for (const auto& b : br) {
    lo_sum += b.lo;
    hi_sum += b.hi;
  }
  if (!(target > lo_sum && target <= hi_sum)) return std::nullopt;

  // Bracket the multiplier.
  double lam_lo, lam_hi;
  if (lower_branch) {
    lam_hi = 0.0;
    lam_lo = -1.0;
    int guard = 0;
    while (total(strains(lam_lo)) > target) {
      lam_lo *= 4.0;
      if (++guard > 200) throw NumericalError("dual: multiplier bracket not found");
    }
  } else {
    lam_lo = 0.0;
    lam_hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) lam_hi = std::max(lam_hi, pots[i].d1(br[i].hi));
  }
  std::vector<double> x;
  for (int it = 0; it < 300; ++it) {
    const double lam = 0.5 * (lam_lo + lam_hi);
    x = strains(lam);
    const double s = total(x);
    if (std::abs(s - target) <= tol * static_cast<double>(n)) return std::make_pair(x, lam);
    if (s > target)
      lam_hi = lam;
    else
      lam_lo = lam;
    if (lam_hi - lam_lo <= 1e-300) break;
  }
  throw NumericalError("dual: multiplier bisection did not reach the tolerance");
}

} // namespace detail

// K = 1 convex-branch solution by bisection on the shared multiplier. Returns
// nullopt when z exceeds the mean well (the crack candidate governs there).
inline std::optional<CellSolution> solve_cell_dual_k1(const std::vector<PotentialSpec>& potentials, double z,
                                                      double tol = 1e-12) {
  if (potentials.empty()) throw PreconditionError("dual: empty potential list");
  if (std::isnan(z) || std::isinf(z)) throw DomainError("dual: strain must be finite");
  std::vector<BondPotential> pots;
  std::vector<detail::Branch> br;
  for (const auto& p : potentials) {
    pots.push_back(exact_bond(p));
    br.push_back({p.shift, minimizer(p).first});
  }
  const auto res = detail::branch_dual(pots, br, z, tol, true);
  if (!res) return std::nullopt;
  std::vector<std::vector<BondPotential>> rows{pots};
  const StrainProblem prob(static_cast<int>(pots.size()), z, 0, std::move(rows));
  auto sol = detail::package(prob, res->first, SolveStatus::converged, 1);
  sol.candidates_tried = 1;
  sol.diagnostics.winner = "dual";
  sol.diagnostics.candidates.push_back({"dual", sol.value.to_double(), 0});
  return sol;
}

// One designated free strain carries the residual, all other free strains sit
// at their order-1 wells. Scans every position.
inline std::optional<std::vector<double>> crack_candidate(const StrainProblem& prob) {
  if (!(prob.z() > 0.0)) throw PreconditionError("crack candidate: z must be > 0");
  std::vector<double> x = prob.affine();
  const int f0 = prob.free_begin();
  const int f1 = prob.free_end();
  double wells = 0.0;
  for (int s = f0; s < f1; ++s) {
    x[s] = prob.pot(1, s).well();
    wells += x[s];
  }
  const double target = prob.z() * prob.free_count();
  int best = -1;
  double best_delta = kInf;
  for (int p = f0; p < f1; ++p) {
    const double residual = target - (wells - x[p]);
    if (!(residual > 0.0)) continue;
    const double keep = x[p];
    const double before = prob.local_energy(x, p);
    x[p] = residual;
    const double after = prob.local_energy(x, p);
    x[p] = keep;
    const double change = after - before;
    if (change < best_delta) {
      best_delta = change;
      best = p;
    }
  }
  if (best < 0) return std::nullopt;
  x[best] = target - (wells - x[best]);
  return x;
}

inline std::optional<std::vector<double>> crack_candidate(const std::vector<PotentialSpec>& potentials, double z,
                                                          int K) {
  const int M = static_cast<int>(potentials.size());
  if (K < 1 || M < 2 * K) throw PreconditionError("crack candidate: need K >= 1 and at least 2K sites");
  std::vector<std::vector<BondPotential>> pots(K);
  for (int j = 1; j <= K; ++j)
    for (int i = 0; i + j <= M; ++i) pots[j - 1].push_back(exact_bond(potentials[i]));
  return crack_candidate(StrainProblem(M, z, K - 1, std::move(pots)));
}

namespace detail {

inline DescentConfig descent_config(const SolverConfig& cfg, bool approx) {
  DescentConfig d;
  d.grad_tol = cfg.grad_tol;
  d.max_iter = cfg.max_iter;
  d.strain_floor = approx ? -kInf : cfg.strain_floor;
  return d;
}

inline std::vector<std::pair<std::string, std::vector<double>>> portfolio(const StrainProblem& prob,
                                                                          const SolverConfig& cfg, bool approx) {
  std::vector<std::pair<std::string, std::vector<double>>> starts;
  const double z = prob.z();
  starts.emplace_back("affine", prob.affine());
  const int f0 = prob.free_begin();
  const int f1 = prob.free_end();
  const int F = prob.free_count();

  if (z > 0.0) {
    // convex branch (order-1 potentials of the free strains)
    std::vector<BondPotential> pots;
    std::vector<Branch> lower, upper;
    for (int s = f0; s < f1; ++s) {
      const auto& b = prob.pot(1, s);
      pots.push_back(exact_bond(b.spec));
      const double w = b.well();
      lower.push_back({b.spec.shift, w});
      upper.push_back({w, inflection_point(b.spec)});
    }
    auto place = [&](const std::vector<double>& xf) {
      std::vector<double> x = prob.affine();
      for (int s = 0; s < F; ++s) x[f0 + s] = xf[s];
      return x;
    };
    try {
      if (auto d = branch_dual(pots, lower, z, 1e-12, true)) starts.emplace_back("dual", place(d->first));
    } catch (const NumericalError&) {
    }
    try {
      if (auto d = branch_dual(pots, upper, z, 1e-12, false)) starts.emplace_back("stretched", place(d->first));
    } catch (const NumericalError&) {
    }
    if (auto c = crack_candidate(prob)) starts.emplace_back("crack", std::move(*c));
  }

  double wbar = 0.0;
  for (int s = f0; s < f1; ++s) wbar += prob.pot(1, s).well();
  wbar /= F;
  double amp = 0.1 * wbar;
  if (!approx && z > 0.0) amp = std::min(amp, 0.5 * z);
  for (int k = 0; k < cfg.n_starts; ++k) {
    std::vector<double> x = prob.affine();
    double mean = 0.0;
    for (int s = f0; s < f1; ++s) {
      x[s] = z + amp * (2.0 * uniform01(cfg.seed, s, 1000 + static_cast<std::uint64_t>(k)) - 1.0);
      mean += x[s] - z;
    }
    mean /= F;
    for (int s = f0; s < f1; ++s) x[s] -= mean;
    starts.emplace_back("start" + std::to_string(k), std::move(x));
  }
  return starts;
}

inline CellSolution solve_strain_problem(const StrainProblem& prob, const SolverConfig& cfg, bool approx, int K,
                                         const std::vector<std::vector<double>>& warm_starts) {
  auto starts = portfolio(prob, cfg, approx);
  for (std::size_t k = 0; k < warm_starts.size(); ++k) {
    if (static_cast<int>(warm_starts[k].size()) != prob.M())
      throw PreconditionError("warm start has the wrong number of strains");
    starts.emplace_back("warm" + std::to_string(k), warm_starts[k]);
  }
  const auto dcfg = descent_config(cfg, approx);
  CellDiagnostics diag;
  std::optional<DescentResult> best;
  std::vector<double> best_phi;
  double lo_start = kInf, hi_start = -kInf;
  for (auto& [name, x0] : starts) {
    auto r = prob.descend(std::move(x0), dcfg);
    const double v = r.energy / prob.M();
    diag.candidates.push_back({name, v, r.iterations});
    if (name.rfind("start", 0) == 0 && v < kInf) {
      lo_start = std::min(lo_start, v);
      hi_start = std::max(hi_start, v);
    }
    if (!(r.energy < kInf)) continue;
    auto phi = corrector_from_strains(r.x, prob.z(), K);
    bool take = !best;
    if (best) {
      const double tie = 1e-12 * std::max(1.0, std::abs(best->energy));
      if (r.energy < best->energy - tie)
        take = true;
      else if (std::abs(r.energy - best->energy) <= tie && l2_norm(phi) < l2_norm(best_phi))
        take = true;
    }
    if (take) {
      best = std::move(r);
      best_phi = std::move(phi);
      diag.winner = name;
    }
  }
  if (lo_start < kInf) {
    diag.start_spread = hi_start - lo_start;
    diag.starts_disagree = diag.start_spread > 1e-6;
  }
  CellSolution sol;
  if (!best) {
    sol.value = kInfinity;
    sol.status = SolveStatus::infeasible_infinite;
    sol.strains = prob.affine();
    sol.phi = std::vector<double>(prob.M() + 1, 0.0);
  } else {
    sol = package(prob, std::move(best->x),
                  best->status == DescentStatus::converged ? SolveStatus::converged : SolveStatus::max_iter, K);
  }
  sol.candidates_tried = static_cast<int>(starts.size());
  sol.diagnostics = std::move(diag);
  return sol;
}

} // namespace detail

inline CellSolution solve_cell(const CellProblem& problem, const SolverConfig& cfg = {},
                               const std::vector<std::vector<double>>& warm_starts = {}) {
  problem.validate();
  if (problem.approx_L) throw PreconditionError("solve_cell: use solve_cell_approx for approximated potentials");
  const auto prob = make_strain_problem(problem, false);
  if (!(problem.z > 0.0)) {
    CellSolution sol;
    sol.value = kInfinity;
    sol.status = SolveStatus::infeasible_infinite;
    sol.strains = prob.affine();
    sol.phi = std::vector<double>(prob.M() + 1, 0.0);
    return sol;
  }
  return detail::solve_strain_problem(prob, cfg, false, problem.K, warm_starts);
}

inline CellSolution solve_cell_approx(const CellProblem& problem, const SolverConfig& cfg = {},
                                      const std::vector<std::vector<double>>& warm_starts = {}) {
  problem.validate();
  if (!problem.approx_L) throw PreconditionError("solve_cell_approx: approximation level required");
  const auto prob = make_strain_problem(problem, true);
  return detail::solve_strain_problem(prob, cfg, true, problem.K, warm_starts);
}

// Energy of a corrector profile for the problem (exact or approximated).
inline ExtReal cell_energy(const CellProblem& problem, const std::vector<double>& phi) {
  problem.validate();
  const auto prob = make_strain_problem(problem, problem.approx_L.has_value());
  if (static_cast<int>(phi.size()) != prob.M() + 1) throw PreconditionError("cell_energy: profile has wrong length");
  std::vector<double> x(prob.M());
  for (int i = 0; i < prob.M(); ++i) x[i] = problem.z + phi[i + 1] - phi[i];
  const double e = prob.energy(x);
  return e < kInf ? ExtReal(e / prob.M()) : kInfinity;
}

// Trace of approximation levels L = 0..L_max next to the exact value. Levels
// are solved from the finest down with the previous optimum as a warm start.
struct ApproxTrace {
  std::vector<int> levels;
  std::vector<double> values;
  double exact = kInf;
};

inline ApproxTrace approx_trace(CellProblem problem, int L_max, const SolverConfig& cfg = {}) {
  problem.approx_L.reset();
  const auto exact = solve_cell(problem, cfg);
  ApproxTrace t;
  t.exact = exact.value.to_double();
  std::vector<std::vector<double>> warm;
  if (exact.value.is_finite()) warm.push_back(exact.strains);
  t.levels.resize(L_max + 1);
  t.values.resize(L_max + 1);
  for (int L = L_max; L >= 0; --L) {
    problem.approx_L = L;
    const auto s = solve_cell_approx(problem, cfg, warm);
    t.levels[L] = L;
    t.values[L] = s.value.to_double();
    warm.push_back(s.strains);
  }
  return t;
}

// ---------------------------------------------------------------------------
// Brute-force oracle.

namespace detail {

inline void polish(const StrainProblem& prob, std::vector<double>& x, double step) {
  const int f0 = prob.free_begin();
  const int f1 = prob.free_end();
  double e = prob.energy(x);
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  for (double h = step; h > 1e-15 * std::max(1.0, scale); h *= 0.5) {
    bool improved = true;
    int sweeps = 0;
    while (improved && sweeps++ < 1000) {
      improved = false;
      for (int a = f0; a < f1; ++a)
        for (int b = f0; b < f1; ++b) {
          if (a == b) continue;
          x[a] += h;
          x[b] -= h;
          const double et = prob.energy(x);
          if (et < e) {
            e = et;
            improved = true;
          } else {
            x[a] -= h;
            x[b] += h;
          }
        }
    }
  }
}

} // namespace detail

inline constexpr double kOracleBudget = 5e8;

inline ExtReal oracle_cell(const CellProblem& problem, double grid_step) {
  problem.validate();
  if (problem.N > 6 || problem.K > 2) throw PreconditionError("oracle_cell: refuses N > 6 or K > 2");
  if (!(grid_step > 0.0 && grid_step <= 1e-2)) throw PreconditionError("oracle_cell: grid_step must be in (0, 1e-2]");
  const bool approx = problem.approx_L.has_value();
  if (!approx && !(problem.z > 0.0)) return kInfinity;
  if (approx) throw UnsupportedError("oracle_cell: approximated potentials are not searched");
  const auto prob = make_strain_problem(problem, false);
  const int M = prob.M();
  const int f0 = prob.free_begin();
  const int F = prob.free_count();
  const double target = problem.z * F;
  const auto S = static_cast<std::int64_t>(std::floor(target / grid_step));

  std::vector<double> best_x;
  double best_e = kInf;
  if (problem.K == 1) {
    // min-plus dynamic program over the first M-1 strains; the last one takes
    // the residual.
    const double cost = static_cast<double>(M) * static_cast<double>(S) * static_cast<double>(S) / 2.0;
    if (cost > kOracleBudget) throw PreconditionError("oracle_cell: grid too fine for this instance");
    const std::size_t W = static_cast<std::size_t>(S) + 1;
    std::vector<double> dp(W, kInf), nxt(W);
    std::vector<std::vector<std::int32_t>> choice(M, std::vector<std::int32_t>(W, -1));
    dp[0] = 0.0;
    for (int s = 0; s + 1 < M; ++s) {
      std::fill(nxt.begin(), nxt.end(), kInf);
      std::vector<double> table(W, kInf);
      for (std::size_t k = 1; k < W; ++k) table[k] = prob.pot(1, s).value(static_cast<double>(k) * grid_step);
      for (std::size_t t = 0; t < W; ++t) {
        if (!(dp[t] < kInf)) continue;
        for (std::size_t k = 1; t + k < W; ++k) {
          const double v = dp[t] + table[k];
          if (v < nxt[t + k]) {
            nxt[t + k] = v;
            choice[s][t + k] = static_cast<std::int32_t>(k);
          }
        }
      }
      dp.swap(nxt);
    }
    std::size_t best_t = 0;
    for (std::size_t t = 0; t < W; ++t) {
      if (!(dp[t] < kInf)) continue;
      const double residual = target - static_cast<double>(t) * grid_step;
      if (!(residual > 0.0)) continue;
      const double v = dp[t] + prob.pot(1, M - 1).value(residual);
      if (v < best_e) {
        best_e = v;
        best_t = t;
      }
    }
    if (best_e < kInf) {
      best_x.assign(M, 0.0);
      best_x[M - 1] = target - static_cast<double>(best_t) * grid_step;
      std::size_t t = best_t;
      for (int s = M - 2; s >= 0; --s) {
        const auto k = static_cast<std::size_t>(choice[s][t]);
        best_x[s] = static_cast<double>(k) * grid_step;
        t -= k;
      }
    }
  } else {
    // Enumerate the grid simplex of the free strains.
    double leaves = 1.0;
    for (int k = 1; k < F; ++k) leaves *= static_cast<double>(S) / k;
    if (leaves * M > kOracleBudget) throw PreconditionError("oracle_cell: grid too fine for this instance");
    std::vector<double> x = prob.affine();
    auto rec = [&](auto&& self, int pos, double used) -> void {
      if (pos == f0 + F - 1) {
        const double residual = target - used;
        if (!(residual > 0.0)) return;
        x[pos] = residual;
        const double e = prob.energy(x);
        if (e < best_e) {
          best_e = e;
          best_x = x;
        }
        return;
      }
      for (std::int64_t k = 1; used + static_cast<double>(k) * grid_step < target; ++k) {
        x[pos] = static_cast<double>(k) * grid_step;
        self(self, pos + 1, used + x[pos]);
      }
    };
    rec(rec, f0, 0.0);
  }
  if (!(best_e < kInf)) return kInfinity;
  detail::polish(prob, best_x, grid_step);
  return ExtReal(prob.energy(best_x) / M);
}

// ---------------------------------------------------------------------------
// Monte Carlo estimate of the N -> infinity limit.

struct TraceRow {
  std::int64_t N = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  std::size_t samples = 0;
  double wall_ms = 0.0;
  std::vector<double> values; // per seed, in seed order
};

struct JhomEstimate {
  double estimate = 0.0;
  double ci = 0.0;
  std::vector<TraceRow> trace;
  stats::InverseFit fit; // diagnostic only
  int failures = 0;      // descents that ended at max_iter
};

// Medium realizations for sample k (shared across the schedule).
inline std::uint64_t sample_seed(std::uint64_t base, std::size_t k) { return derive_seed(base, k); }

inline JhomEstimate estimate_jhom(const ChainModel& model, double z, const std::vector<std::int64_t>& schedule,
                                  std::size_t samples, const SolverConfig& cfg = {}, Window window = {}) {
  if (schedule.size() < 2) throw PreconditionError("estimate_jhom: schedule needs >= 2 entries");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(schedule[k] > schedule[k - 1])) throw PreconditionError("estimate_jhom: schedule must be increasing");
  if (samples < 1) throw PreconditionError("estimate_jhom: need >= 1 sample");
  const DistributionSpec& spec = model.spec();
  JhomEstimate est;
  std::vector<double> ns, means;
  for (auto N : schedule) {
    TraceRow row;
    row.N = N;
    row.values.assign(samples, 0.0);
    std::vector<int> bad(samples, 0);
    const auto t0 = std::chrono::steady_clock::now();
    parallel_for(samples, cfg.jobs, [&](std::size_t k) {
      CellProblem p;
      p.model = build(spec, sample_seed(model.seed(), k));
      p.z = z;
      p.N = N;
      p.K = spec.K;
      p.window = window;
      SolverConfig c = cfg;
      c.seed = derive_seed(cfg.seed, k);
      const auto sol = solve_cell(p, c);
      if (z > 0.0 && sol.value.is_infinite()) throw NumericalError("estimate_jhom: infinite cell value at z > 0");
      row.values[k] = sol.value.to_double();
      bad[k] = sol.status == SolveStatus::max_iter;
    });
    const auto t1 = std::chrono::steady_clock::now();
    row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    for (int b : bad) est.failures += b;
    if (z > 0.0) {
      const auto s = stats::summarize(row.values);
      row.mean = s.mean;
      row.stderr_mean = s.stderr_mean;
    } else {
      row.mean = kInf;
      row.stderr_mean = 0.0;
    }
    row.samples = samples;
    ns.push_back(static_cast<double>(N));
    means.push_back(row.mean);
    est.trace.push_back(std::move(row));
  }
  est.estimate = est.trace.back().mean;
  est.ci = stats::kZ95 * est.trace.back().stderr_mean;
  if (z > 0.0) est.fit = stats::fit_inverse(ns, means);
  else est.fit = {kInf, 0.0};
  return est;
}

// ---------------------------------------------------------------------------
// Subadditivity of the clamped cell energy under adjacent windows.

struct SubadditivityReport {
  std::int64_t count_a = 0, count_b = 0, count_ab = 0;
  double value_a = kInf, value_b = kInf, value_ab = kInf;
  double lhs = kInf;   // |N(AuB)| value(AuB)
  double rhs = kInf;   // |NA| value(A) + |NB| value(B)
  double slack = 0.0;
  double margin = kInf; // rhs + slack - lhs
  bool passed = true;
  bool vacuous = false;
};

inline SubadditivityReport subadditivity_probe(const ChainModel& model, double z, Window A, Window B, std::int64_t N,
                                               const SolverConfig& cfg = {}) {
  if (!(A.b == B.a)) throw PreconditionError("subadditivity_probe: windows must be adjacent with A left of B");
  SubadditivityReport r;
  auto make = [&](Window w) {
    CellProblem p;
    p.model = model;
    p.z = z;
    p.N = N;
    p.K = model.K();
    p.window = w;
    return p;
  };
  const auto pa = make(A);
  const auto pb = make(B);
  const auto pab = make({A.a, B.b});
  r.count_a = pa.sites().count;
  r.count_b = pb.sites().count;
  r.count_ab = pab.sites().count;
  if (!(z > 0.0)) {
    r.vacuous = true;
    return r;
  }
  const auto sa = solve_cell(pa, cfg);
  const auto sb = solve_cell(pb, cfg);
  std::vector<double> joined = sa.strains;
  joined.insert(joined.end(), sb.strains.begin(), sb.strains.end());
  const auto sab = solve_cell(pab, cfg, {joined});
  r.value_a = sa.value.to_double();
  r.value_b = sb.value.to_double();
  r.value_ab = sab.value.to_double();
  r.lhs = static_cast<double>(r.count_ab) * r.value_ab;
  r.rhs = static_cast<double>(r.count_a) * r.value_a + static_cast<double>(r.count_b) * r.value_b;
  r.slack = 1e-9 * (std::abs(r.rhs) + 1.0);
  r.margin = r.rhs + r.slack - r.lhs;
  r.passed = r.margin >= 0.0;
  return r;
}

} // namespace homchain
