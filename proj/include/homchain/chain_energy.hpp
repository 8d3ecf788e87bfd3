#pragma once

// Discrete chain energies E_n and E_n^ell on the lattice with spacing 1/n, and
// their minimization under exact end pinning.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "homchain/cell_solver.hpp"
#include "homchain/errors.hpp"
#include "homchain/ext_real.hpp"
#include "homchain/random_medium.hpp"
#include "homchain/strain_problem.hpp"

namespace homchain {

struct Deformation {
  std::int64_t n = 1;
  std::vector<double> values; // u^0 .. u^n

  static Deformation affine(std::int64_t n, double slope) {
    Deformation u;
    u.n = n;
    u.values.resize(static_cast<std::size_t>(n) + 1);
    for (std::int64_t i = 0; i <= n; ++i) u.values[i] = slope * static_cast<double>(i) / static_cast<double>(n);
    u.values.back() = slope;
    return u;
  }

  // u^0 = 0 and u^{i+1} = u^i + x_i / n.
  static Deformation from_strains(const std::vector<double>& x) {
    Deformation u;
    u.n = static_cast<std::int64_t>(x.size());
    u.values.assign(x.size() + 1, 0.0);
    const double h = 1.0 / static_cast<double>(u.n);
    for (std::size_t i = 0; i < x.size(); ++i) u.values[i + 1] = u.values[i] + x[i] * h;
    return u;
  }

  void validate() const {
    if (n < 1) throw PreconditionError("deformation: n must be >= 1");
    if (values.size() != static_cast<std::size_t>(n) + 1) throw PreconditionError("deformation: need n+1 values");
    for (double v : values)
      if (!std::isfinite(v)) throw DomainError("deformation: non-finite nodal value");
  }

  // Bond strains (u^{i+1} - u^i) / lambda_n.
  std::vector<double> strains() const {
    validate();
    std::vector<double> x(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) x[i] = (values[i + 1] - values[i]) * static_cast<double>(n);
    return x;
  }
};

struct BoundaryCondition {
  double ell = 1.0;
  void validate() const {
    if (!(ell > 0.0) || !std::isfinite(ell)) throw PreconditionError("boundary condition: ell must be finite and > 0");
  }
};

inline StrainProblem make_chain_problem(const ChainModel& model, std::int64_t n, int K, double ell) {
  if (K < 1 || K > model.K()) throw PreconditionError("chain: K must be in [1, model range]");
  if (n < 1) throw PreconditionError("chain: n must be >= 1");
  const int M = static_cast<int>(n);
  std::vector<std::vector<BondPotential>> pots(K);
  for (int j = 1; j <= K; ++j)
    for (int i = 0; i + j <= M; ++i) pots[j - 1].push_back(exact_bond(model.potential_at(i, j)));
  return StrainProblem(M, ell, 0, std::move(pots));
}

inline ExtReal energy(const ChainModel& model, const Deformation& u, int K) {
  const auto x = u.strains();
  const auto prob = make_chain_problem(model, u.n, K, 0.0);
  const double e = prob.energy(x);
  return e < kInf ? ExtReal(e / static_cast<double>(u.n)) : kInfinity;
}

inline ExtReal energy_bc(const ChainModel& model, const Deformation& u, int K, const BoundaryCondition& bc) {
  u.validate();
  if (u.values.front() != 0.0 || u.values.back() != bc.ell) return kInfinity;
  return energy(model, u, K);
}

struct ChainMinimum {
  Deformation u;
  ExtReal value = kInfinity;
  SolveStatus status = SolveStatus::infeasible_infinite;
  int candidates_tried = 0;
  CellDiagnostics diagnostics;
};

inline ChainMinimum minimize_chain(const ChainModel& model, std::int64_t n, int K, const BoundaryCondition& bc,
                                   const SolverConfig& cfg = {}) {
  bc.validate();
  if (n < 2 * static_cast<std::int64_t>(K)) throw PreconditionError("minimize_chain: need n >= 2K");
  const auto prob = make_chain_problem(model, n, K, bc.ell);
  auto sol = detail::solve_strain_problem(prob, cfg, false, 0, {});
  ChainMinimum r;
  r.u = Deformation::from_strains(sol.strains);
  r.u.values.back() = bc.ell; // pinned exactly; the integral differs by rounding only
  r.value = sol.value;
  r.status = sol.status;
  r.candidates_tried = sol.candidates_tried;
  r.diagnostics = std::move(sol.diagnostics);
  return r;
}

// Piecewise-affine interpolation of nodal values on [0, 1].
class PiecewiseAffine {
public:
  explicit PiecewiseAffine(Deformation u) : u_(std::move(u)) { u_.validate(); }

  double operator()(double x) const {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("interpolation: x outside [0, 1]");
    const double t = x * static_cast<double>(u_.n);
    const auto r = static_cast<std::int64_t>(std::llround(t));
    if (static_cast<double>(r) / static_cast<double>(u_.n) == x) return u_.values[r];
    const auto i = std::min(static_cast<std::int64_t>(std::floor(t)), u_.n - 1);
    const double w = t - static_cast<double>(i);
    return u_.values[i] + w * (u_.values[i + 1] - u_.values[i]);
  }

private:
  Deformation u_;
};

inline PiecewiseAffine interpolate_affine(const Deformation& u) { return PiecewiseAffine(u); }

} // namespace homchain
