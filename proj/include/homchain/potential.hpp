#pragma once

// Lennard-Jones type bond potentials: evaluation, derivatives, the linear
// z*-approximation below a knot, and class-membership diagnostics.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "homchain/errors.hpp"
#include "homchain/ext_real.hpp"
#include "homchain/format.hpp"

namespace homchain {

inline constexpr double kTolConvex = 1e-9;
inline constexpr double kMinimizerTol = 1e-12;

inline void require_not_nan(double z, const char* where) {
  if (std::isnan(z)) throw DomainError(std::string(where) + ": NaN strain");
}

// ---------------------------------------------------------------------------
// Convex envelope Psi(z) = coeff * z^(-exponent) on z > 0, +inf on z <= 0.

struct Psi {
  double coeff = 1.0;
  double exponent = 12.0;

  ExtReal operator()(double z) const {
    require_not_nan(z, "Psi");
    if (z <= 0.0) return kInfinity;
    return ExtReal::from_double(coeff * std::pow(z, -exponent));
  }

  // "inv12" is the default z^-12; "power:<coeff>:<exponent>" is the general form.
  std::string id() const {
    if (coeff == 1.0 && exponent == 12.0) return "inv12";
    return "power:" + format_double(coeff) + ":" + format_double(exponent);
  }

  static Psi parse(const std::string& id) {
    if (id == "inv12") return Psi{};
    if (id.rfind("power:", 0) == 0) {
      const auto rest = id.substr(6);
      const auto colon = rest.find(':');
      if (colon == std::string::npos) throw std::invalid_argument("Psi: bad id '" + id + "'");
      Psi p{parse_double(rest.substr(0, colon)), parse_double(rest.substr(colon + 1))};
      if (!(p.coeff > 0.0) || !(p.exponent > 0.0))
        throw std::invalid_argument("Psi: coefficient and exponent must be positive");
      return p;
    }
    throw std::invalid_argument("Psi: unknown id '" + id + "'");
  }

  friend bool operator==(const Psi&, const Psi&) = default;
};

// Class constants (alpha, b, d, Psi) of the admissible potential family.
struct ClassParams {
  double alpha = 1.0;
  double b = 1.0;
  double d = 1.0;
  Psi psi{};

  std::vector<std::string> violations() const {
    std::vector<std::string> v;
    if (!(alpha > 0.0 && alpha <= 1.0)) v.push_back("class.alpha must lie in (0,1]");
    if (!(b > 0.0)) v.push_back("class.b must be > 0");
    if (!(d >= 1.0)) v.push_back("class.d must be >= 1");
    if (!(psi.coeff > 0.0 && psi.exponent > 0.0)) v.push_back("class.psi must be a positive power");
    return v;
  }

  void validate() const {
    auto v = violations();
    if (!v.empty()) throw ValidationError(std::move(v));
  }

  friend bool operator==(const ClassParams&, const ClassParams&) = default;
};

// ---------------------------------------------------------------------------
// Registered general potentials.

struct GeneralPotential {
  std::string name;
  std::function<double(double)> value;      // may return +inf on the hard-core branch
  std::function<double(double)> derivative; // optional
  double shift = 0.0;                       // value is +inf for z <= shift
  // Filled by the registry from a numerical minimizer search.
  double well = 0.0;
  double depth = 0.0;
};

namespace detail {

inline double central_difference(const std::function<double(double)>& f, double z) {
  const double h = 1e-7 * std::max(1.0, std::abs(z));
  return (f(z + h) - f(z - h)) / (2.0 * h);
}

// Golden-section search on a bracketing triple, then bisection on the sign of
// the derivative until the bracket is narrower than `tol`.
inline std::pair<double, double> minimize_unimodal(const std::function<double(double)>& f,
                                                   const std::function<double(double)>& df,
                                                   double shift, double tol) {
  // Coarse geometric scan for a bracket.
  double best_z = 0.0;
  double best_v = std::numeric_limits<double>::infinity();
  int best_k = 0;
  constexpr int kLo = -60;
  constexpr int kHi = 60;
  for (int k = kLo; k <= kHi; ++k) {
    const double z = shift + std::exp2(k / 6.0);
    const double v = f(z);
    if (v < best_v) {
      best_v = v;
      best_z = z;
      best_k = k;
    }
  }
  if (!std::isfinite(best_v) || best_k == kLo || best_k == kHi)
    throw NumericalError("minimizer: no interior bracket found");
  (void)best_z;
  double lo = shift + std::exp2((best_k - 1) / 6.0);
  double hi = shift + std::exp2((best_k + 1) / 6.0);

  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (hi - lo) > 1e-6 * std::max(1.0, std::abs(lo)); ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(d);
    }
  }
  // Widen slightly so the derivative brackets the root.
  const double w = std::max(hi - lo, 1e-6);
  lo = std::max(shift + 0.5 * (lo - shift), lo - w);
  hi = hi + w;
  if (!(df(lo) < 0.0 && df(hi) > 0.0))
    throw NumericalError("minimizer: derivative does not change sign on the bracket");
  for (int it = 0; it < 400 && (hi - lo) > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (df(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  if (hi - lo > tol) throw NumericalError("minimizer: bisection did not converge");
  const double zmin = 0.5 * (lo + hi);
  return {zmin, f(zmin)};
}

} // namespace detail

class PotentialRegistry {
public:
  static PotentialRegistry& instance() {
    static PotentialRegistry reg;
    return reg;
  }

  // Registers (or replaces) a named potential. The minimizer is located once here.
  std::shared_ptr<const GeneralPotential> add(std::string name, std::function<double(double)> value,
                                              std::function<double(double)> derivative = {},
                                              double shift = 0.0) {
    auto gp = std::make_shared<GeneralPotential>();
    gp->name = name;
    gp->value = std::move(value);
    gp->derivative = std::move(derivative);
    gp->shift = shift;
    auto f = gp->value;
    std::function<double(double)> df = gp->derivative;
    if (!df) df = [f](double z) { return detail::central_difference(f, z); };
    auto [w, v] = detail::minimize_unimodal(f, df, shift, kMinimizerTol);
    gp->well = w;
    gp->depth = v;
    std::lock_guard lock(mu_);
    entries_[name] = gp;
    return gp;
  }

  std::shared_ptr<const GeneralPotential> find(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(name);
    if (it == entries_.end()) throw std::invalid_argument("unknown registered potential '" + name + "'");
    return it->second;
  }

  std::vector<std::string> names() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [k, _] : entries_) out.push_back(k);
    return out;
  }

private:
  PotentialRegistry() {
    // 12-6 form with unit well; analytically classical LJ with delta = epsilon = 1.
    add(
        "lj_12_6",
        [](double z) {
          if (z <= 0.0) return std::numeric_limits<double>::infinity();
          const double r6 = 1.0 / (z * z * z * z * z * z);
          return r6 * r6 - 2.0 * r6;
        },
        [](double z) {
          const double r6 = 1.0 / (z * z * z * z * z * z);
          return 12.0 * (r6 - r6 * r6) / z;
        });
    // 9-6 Mie form, J(1) = -1; no analytic derivative (exercises the fallback).
    add("mie_9_6", [](double z) {
      if (z <= 0.0) return std::numeric_limits<double>::infinity();
      return 2.0 * std::pow(z, -9.0) - 3.0 * std::pow(z, -6.0);
    });
  }

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const GeneralPotential>> entries_;
};

// ---------------------------------------------------------------------------
// Potential specification.

enum class PotentialKind { classical_lj, shifted_lj, registered_general };

inline std::string to_string(PotentialKind k) {
  switch (k) {
  case PotentialKind::classical_lj: return "classical_lj";
  case PotentialKind::shifted_lj: return "shifted_lj";
  case PotentialKind::registered_general: return "registered_general";
  }
  return "?";
}

inline PotentialKind potential_kind_from_string(const std::string& s) {
  if (s == "classical_lj") return PotentialKind::classical_lj;
  if (s == "shifted_lj") return PotentialKind::shifted_lj;
  if (s == "registered_general") return PotentialKind::registered_general;
  throw std::invalid_argument("unknown potential kind '" + s + "'");
}

// J(z) = eps (delta/(z-shift))^6 [(delta/(z-shift))^6 - 2] for the LJ forms.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::classical_lj;
  double delta = 1.0;
  double epsilon = 1.0;
  double shift = 0.0;
  std::shared_ptr<const GeneralPotential> general;

  static PotentialSpec classical(double delta, double epsilon) {
    PotentialSpec s;
    s.delta = delta;
    s.epsilon = epsilon;
    s.validate();
    return s;
  }

  static PotentialSpec shifted(double delta, double epsilon, double shift) {
    PotentialSpec s;
    s.kind = PotentialKind::shifted_lj;
    s.delta = delta;
    s.epsilon = epsilon;
    s.shift = shift;
    s.validate();
    return s;
  }

  static PotentialSpec registered(const std::string& name) {
    PotentialSpec s;
    s.kind = PotentialKind::registered_general;
    s.general = PotentialRegistry::instance().find(name);
    s.shift = s.general->shift;
    s.delta = s.general->well - s.shift;
    s.epsilon = -s.general->depth;
    return s;
  }

  // Unique minimizer of J (absolute strain).
  double well() const { return shift + delta; }

  void validate() const {
    std::vector<std::string> v;
    if (!(delta > 0.0) || !std::isfinite(delta)) v.push_back("potential.delta must be finite and > 0");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) v.push_back("potential.epsilon must be finite and > 0");
    if (!(shift >= 0.0) || !std::isfinite(shift)) v.push_back("potential.shift must be finite and >= 0");
    if (kind == PotentialKind::classical_lj && shift != 0.0) v.push_back("classical_lj has no shift");
    if (kind == PotentialKind::registered_general && !general) v.push_back("registered potential not resolved");
    if (!v.empty()) throw ValidationError(std::move(v));
  }

  friend bool operator==(const PotentialSpec& a, const PotentialSpec& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == PotentialKind::registered_general)
      return a.general && b.general && a.general->name == b.general->name;
    return a.delta == b.delta && a.epsilon == b.epsilon && a.shift == b.shift;
  }
};

// ---------------------------------------------------------------------------
// Evaluation. The double-valued helpers below are the hot path; callers that
// need extended-real semantics go through eval().

namespace detail {

inline double lj_value(double delta, double eps, double x) {
  const double r = delta / x;
  const double r2 = r * r;
  const double r6 = r2 * r2 * r2;
  return eps * r6 * (r6 - 2.0);
}

inline double lj_d1(double delta, double eps, double x) {
  const double r = delta / x;
  const double r2 = r * r;
  const double r6 = r2 * r2 * r2;
  return 12.0 * eps * r6 * (1.0 - r6) / x;
}

inline double lj_d2(double delta, double eps, double x) {
  const double r = delta / x;
  const double r2 = r * r;
  const double r6 = r2 * r2 * r2;
  return eps * (156.0 * r6 * r6 - 84.0 * r6) / (x * x);
}

} // namespace detail

// Raw value; +inf (as double) on the hard-core branch.
inline double eval_raw(const PotentialSpec& s, double z) {
  if (s.kind == PotentialKind::registered_general) {
    if (z <= s.shift) return std::numeric_limits<double>::infinity();
    return s.general->value(z);
  }
  const double x = z - s.shift;
  if (x <= 0.0) return std::numeric_limits<double>::infinity();
  return detail::lj_value(s.delta, s.epsilon, x);
}

inline ExtReal eval(const PotentialSpec& s, double z) {
  require_not_nan(z, "eval");
  return ExtReal::from_double(eval_raw(s, z));
}

inline double derivative(const PotentialSpec& s, double z) {
  require_not_nan(z, "derivative");
  if (z <= s.shift) throw DomainError("derivative: strain on the infinite branch");
  if (s.kind == PotentialKind::registered_general) {
    if (s.general->derivative) return s.general->derivative(z);
    return detail::central_difference(s.general->value, z);
  }
  return detail::lj_d1(s.delta, s.epsilon, z - s.shift);
}

inline double second_derivative(const PotentialSpec& s, double z) {
  require_not_nan(z, "second_derivative");
  if (z <= s.shift) throw DomainError("second_derivative: strain on the infinite branch");
  if (s.kind == PotentialKind::registered_general) {
    const double h = 1e-5 * std::max(1.0, std::abs(z - s.shift));
    const double hh = std::min(h, 0.5 * (z - s.shift));
    if (s.general->derivative)
      return (s.general->derivative(z + hh) - s.general->derivative(z - hh)) / (2.0 * hh);
    const auto& f = s.general->value;
    return (f(z + hh) - 2.0 * f(z) + f(z - hh)) / (hh * hh);
  }
  return detail::lj_d2(s.delta, s.epsilon, z - s.shift);
}

// (argmin, min value). Closed form for the LJ forms; numerical otherwise.
inline std::pair<double, double> minimizer(const PotentialSpec& s) {
  if (s.kind != PotentialKind::registered_general) return {s.well(), -s.epsilon};
  return {s.general->well, s.general->depth};
}

// Smallest strain beyond the well where J'' changes sign (end of the convex
// stretched branch).
inline double inflection_point(const PotentialSpec& s) {
  if (s.kind != PotentialKind::registered_general)
    return s.shift + s.delta * std::pow(13.0 / 7.0, 1.0 / 6.0);
  const double w = s.well();
  double lo = w;
  double hi = w + 0.01 * std::max(1.0, s.delta);
  int guard = 0;
  while (second_derivative(s, hi) > 0.0) {
    lo = hi;
    hi = w + 2.0 * (hi - w);
    if (++guard > 80) throw NumericalError("inflection_point: no sign change of J''");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (second_derivative(s, mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Smallest element of the subdifferential at z_star, inside the convex branch
// (shift, shift + 1/d).
inline double subgradient_min(const PotentialSpec& s, double z_star, const ClassParams& cls) {
  require_not_nan(z_star, "subgradient_min");
  const double x = z_star - s.shift;
  if (!(x > 0.0 && x < 1.0 / cls.d))
    throw PreconditionError("subgradient_min: knot must lie in (shift, shift + 1/d)");
  return derivative(s, z_star);
}

// ---------------------------------------------------------------------------
// z*-approximation: tangent line with the smallest subgradient below the knot.

struct ApproxPotential {
  PotentialSpec base;
  double z_star = 0.0;
  double slope_m = 0.0;
  double knot_value = 0.0; // J(z_star)
};

inline ApproxPotential make_approximation(const PotentialSpec& s, double z_star, const ClassParams& cls) {
  ApproxPotential a;
  a.base = s;
  a.z_star = z_star;
  a.slope_m = subgradient_min(s, z_star, cls);
  a.knot_value = eval(s, z_star).value();
  return a;
}

inline ExtReal eval_approx(const ApproxPotential& a, double z) {
  require_not_nan(z, "eval_approx");
  if (z < a.z_star) return ExtReal(a.slope_m * (z - a.z_star) + a.knot_value);
  return eval(a.base, z);
}

// Deterministic bound M with slope_m <= -M for every class member at this knot.
inline double slope_lower_bound(const ClassParams& cls, double z_star) {
  const double inv_d = 1.0 / cls.d;
  if (!(z_star < inv_d)) throw PreconditionError("slope_lower_bound: knot must be < 1/d");
  const double upper_at = cls.d * std::max(cls.psi(inv_d).to_double(), inv_d);
  const ExtReal psi_star = cls.psi(z_star);
  if (psi_star.is_infinite()) return std::numeric_limits<double>::infinity();
  const double lower_at_knot = psi_star.value() / cls.d - cls.d;
  const double bound = -(upper_at - lower_at_knot) / (inv_d - z_star);
  return bound > 0.0 ? bound : 0.0;
}

// Class-uniform Lipschitz bound on (rho, delta) from the sandwich: the tangent
// slope at rho is dominated by the chord from rho/2.
inline double lipschitz_bound(const ClassParams& cls, double rho) {
  if (!(rho > 0.0)) throw PreconditionError("lipschitz_bound: rho must be > 0");
  const double half = 0.5 * rho;
  const double upper_half = cls.d * std::max(cls.psi(half).to_double(), half);
  const double lower_rho = cls.psi(rho).to_double() / cls.d - cls.d;
  return std::max(0.0, (upper_half - lower_rho) / half);
}

// Largest difference quotient on a uniform grid of (rho, well).
inline double empirical_lipschitz(const PotentialSpec& s, double rho, int points = 1000) {
  const double lo = std::max(rho, s.shift + 1e-12);
  const double hi = s.well();
  if (!(lo < hi)) throw PreconditionError("empirical_lipschitz: rho must be below the well");
  double best = 0.0;
  const double h = (hi - lo) / (points + 1);
  double prev = eval_raw(s, lo + h);
  for (int k = 2; k <= points; ++k) {
    const double cur = eval_raw(s, lo + k * h);
    best = std::max(best, std::abs(cur - prev) / h);
    prev = cur;
  }
  return best;
}

namespace detail {
inline double radical_inverse(std::uint64_t n, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (n > 0) {
    r += f * static_cast<double>(n % base);
    n /= base;
    f *= inv;
  }
  return r;
}
} // namespace detail

// Hoelder coefficient on (well, infinity), sampled with Halton pairs capped at
// 50 times the well position.
inline double holder_coefficient(const PotentialSpec& s, double alpha, int pairs = 10000) {
  const double lo = s.well();
  const double hi = s.shift + 50.0 * s.delta;
  double best = 0.0;
  for (int k = 1; k <= pairs; ++k) {
    const double x = lo + (hi - lo) * detail::radical_inverse(static_cast<std::uint64_t>(k), 2);
    const double y = lo + (hi - lo) * detail::radical_inverse(static_cast<std::uint64_t>(k), 3);
    if (x == y) continue;
    const double q = std::abs(eval_raw(s, x) - eval_raw(s, y)) / std::pow(std::abs(x - y), alpha);
    best = std::max(best, q);
  }
  return best;
}

// ---------------------------------------------------------------------------
// Class membership diagnostics.

struct StrainGrid {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1e-3;
};

inline StrainGrid default_grid(const PotentialSpec& s, const ClassParams& cls) {
  return StrainGrid{s.shift, s.shift + 4.0 * cls.d, 1e-3};
}

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct MembershipReport {
  std::vector<CheckResult> checks;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }

  const CheckResult& get(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::out_of_range("no check named " + name);
  }
};

// Grid-based audit of the class conditions. Conditions are checked in the
// shifted coordinate x = z - shift, matching the hard-core remark.
inline MembershipReport check_class_membership(const PotentialSpec& s, const ClassParams& cls,
                                               const StrainGrid& grid) {
  cls.validate();
  if (!(grid.step > 0.0 && grid.step <= 1e-3))
    throw PreconditionError("check_class_membership: grid resolution must be <= 1e-3");
  if (grid.lo > s.shift + grid.step || grid.hi < s.shift + 4.0 * cls.d)
    throw PreconditionError("check_class_membership: grid must cover (shift, shift + 4d]");

  MembershipReport rep;
  const auto [well, depth] = minimizer(s);
  const double w = well - s.shift;
  const double eps = -depth;
  auto add = [&](std::string n, bool ok, std::string det) {
    rep.checks.push_back({std::move(n), ok, std::move(det)});
  };

  add("delta_in_range", w > 1.0 / cls.d && w < cls.d,
      "delta=" + format_double(w) + " vs (1/d,d)=(" + format_double(1.0 / cls.d) + "," + format_double(cls.d) + ")");
  add("negative_minimum", depth < 0.0, "J(delta)=" + format_double(depth));

  double tail_sup = 0.0;
  bool lower_ok = true;
  bool upper_ok = true;
  bool convex_ok = true;
  double worst_lower = 0.0;
  double worst_upper = 0.0;
  double worst_convex = 0.0;

  const auto n_steps = static_cast<long>(std::floor((grid.hi - grid.lo) / grid.step));
  double prev2 = std::numeric_limits<double>::quiet_NaN();
  double prev1 = std::numeric_limits<double>::quiet_NaN();
  double z_last = grid.lo;
  for (long k = 0; k <= n_steps; ++k) {
    const double z = grid.lo + static_cast<double>(k) * grid.step;
    const double x = z - s.shift;
    if (x <= 0.0) continue;
    const double j = eval_raw(s, z);
    z_last = z;
    if (!std::isfinite(j)) {
      prev2 = prev1 = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    if (x > w) tail_sup = std::max(tail_sup, std::abs(j));
    const double psi = cls.psi(x).to_double();
    if (std::isfinite(psi)) {
      const double lo_b = psi / cls.d - cls.d;
      const double hi_b = cls.d * std::max(psi, std::abs(x));
      const double slack = 1e-12 * std::max({1.0, std::abs(j), std::abs(lo_b)});
      if (lo_b > j + slack) {
        lower_ok = false;
        worst_lower = std::max(worst_lower, lo_b - j);
      }
      if (j > hi_b + 1e-12 * std::max({1.0, std::abs(j), hi_b})) {
        upper_ok = false;
        worst_upper = std::max(worst_upper, j - hi_b);
      }
    }
    // Second differences on (shift, delta).
    if (!std::isnan(prev2) && x - grid.step < w) {
      const double d2 = prev2 - 2.0 * prev1 + j;
      const double round = 1e-13 * (std::abs(prev2) + 2.0 * std::abs(prev1) + std::abs(j));
      if (d2 < -(kTolConvex + round)) {
        convex_ok = false;
        worst_convex = std::min(worst_convex, d2);
      }
    }
    prev2 = prev1;
    prev1 = j;
  }

  add("tail_bound", tail_sup < cls.b, "sup|J| on (delta,inf)=" + format_double(tail_sup) + " vs b=" + format_double(cls.b));
  add("sandwich_lower", lower_ok, lower_ok ? "ok" : "max violation " + format_double(worst_lower));
  add("sandwich_upper", upper_ok, upper_ok ? "ok" : "max violation " + format_double(worst_upper));
  add("convex_below_well", convex_ok, convex_ok ? "ok" : "min second difference " + format_double(worst_convex));
  const double tail = std::abs(eval_raw(s, z_last));
  add("decay", tail < 0.01 * eps, "|J(z_max)|=" + format_double(tail));
  return rep;
}

// Class constants covering a family of LJ-type members given by their
// (delta, epsilon) extremes. Psi = c z^-12 with c the geometric mean of the
// repulsive coefficients eps*delta^12; d large enough for both sandwich sides.
inline ClassParams derive_class_params(const std::vector<std::pair<double, double>>& delta_eps) {
  if (delta_eps.empty()) throw PreconditionError("derive_class_params: empty family");
  double a_min = std::numeric_limits<double>::infinity();
  double a_max = 0.0;
  double eps_max = 0.0;
  double delta_max = 0.0;
  double delta_min = std::numeric_limits<double>::infinity();
  for (auto [dl, ep] : delta_eps) {
    const double a = ep * std::pow(dl, 12.0);
    a_min = std::min(a_min, a);
    a_max = std::max(a_max, a);
    eps_max = std::max(eps_max, ep);
    delta_max = std::max(delta_max, dl);
    delta_min = std::min(delta_min, dl);
  }
  const double c = std::sqrt(a_min * a_max);
  const double ratio = std::sqrt(a_max / a_min);
  ClassParams cls;
  cls.alpha = 1.0;
  cls.b = eps_max + 1.0;
  cls.d = 1.25 * std::max({eps_max + ratio, delta_max, 1.0 / delta_min, 1.0});
  cls.psi = Psi{c, 12.0};
  return cls;
}

} // namespace homchain
