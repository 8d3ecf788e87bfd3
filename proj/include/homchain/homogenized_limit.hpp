#pragma once

// Tables of the homogenized density, the continuum functional on
// piecewise-affine-plus-jumps profiles, and structural checks on tables.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <optional>
#include <string>
#include <vector>

#include "homchain/cell_solver.hpp"
#include "homchain/config.hpp"
#include "homchain/errors.hpp"
#include "homchain/ext_real.hpp"
#include "homchain/potential.hpp"
#include "homchain/random_medium.hpp"

namespace homchain {

struct TableMeta {
  std::string spec_hash;
  std::vector<std::int64_t> schedule;
  std::size_t samples = 0;
  std::uint64_t base_seed = 0;
  int K = 1;
  ClassParams cls{};
  std::optional<double> mean_delta;   // E[delta] when computable
  std::optional<double> mean_minimum; // E[J(delta)] when computable
  std::string timestamp;              // not part of the reproducible payload
};

struct JhomTable {
  std::vector<double> z_grid;
  std::vector<double> values; // +inf for z <= 0
  std::vector<double> ci;
  std::vector<double> finite_size; // finite-N bias allowance; empty when unknown
  std::vector<std::string> notes; // per point; non-empty marks a failure
  TableMeta meta;

  std::size_t size() const { return z_grid.size(); }

  // statistical plus finite-size uncertainty at point k
  double uncertainty(std::size_t k) const { return ci[k] + (k < finite_size.size() ? finite_size[k] : 0.0); }

  bool has_failures() const {
    return std::any_of(notes.begin(), notes.end(), [](const std::string& s) { return !s.empty(); });
  }

  void validate() const {
    std::vector<std::string> v;
    if (values.size() != z_grid.size() || ci.size() != z_grid.size()) v.push_back("table columns differ in length");
    for (std::size_t k = 1; k < z_grid.size(); ++k)
      if (!(z_grid[k] > z_grid[k - 1])) v.push_back("table grid must be strictly increasing");
    for (std::size_t k = 0; k < z_grid.size() && k < values.size(); ++k) {
      if (z_grid[k] <= 0.0 && !std::isinf(values[k])) v.push_back("table value at z <= 0 must be +inf");
      if (z_grid[k] > 0.0 && !std::isfinite(values[k]) && (notes.size() <= k || notes[k].empty()))
        v.push_back("table value at z > 0 must be finite");
    }
    if (!v.empty()) throw ValidationError(std::move(v));
  }
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::optional<std::pair<double, double>> try_plateau(const DistributionSpec& spec) {
  if (spec.K != 1) return std::nullopt;
  try {
    return std::make_pair(expectation(spec, Quantity::delta), expectation(spec, Quantity::J_at_delta));
  } catch (const UnsupportedError&) {
    return std::nullopt;
  }
}

// Every grid point uses the same medium seeds (common random numbers).
inline JhomTable build_table(const DistributionSpec& spec, const std::vector<double>& z_grid,
                             const std::vector<std::int64_t>& schedule, std::size_t samples,
                             const SolverConfig& cfg = {}, std::uint64_t base_seed = 1) {
  spec.validate();
  JhomTable t;
  t.z_grid = z_grid;
  t.values.assign(z_grid.size(), kInf);
  t.ci.assign(z_grid.size(), 0.0);
  t.finite_size.assign(z_grid.size(), 0.0);
  t.notes.assign(z_grid.size(), "");
  t.meta.spec_hash = spec_hash(spec);
  t.meta.schedule = schedule;
  t.meta.samples = samples;
  t.meta.base_seed = base_seed;
  t.meta.K = spec.K;
  t.meta.cls = spec.class_params();
  if (auto p = try_plateau(spec)) {
    t.meta.mean_delta = p->first;
    t.meta.mean_minimum = p->second;
  }
  t.meta.timestamp = utc_timestamp();
  for (std::size_t k = 1; k < z_grid.size(); ++k)
    if (!(z_grid[k] > z_grid[k - 1])) throw PreconditionError("build_table: grid must be strictly increasing");
  const ChainModel model = build(spec, base_seed);
  for (std::size_t k = 0; k < z_grid.size(); ++k) {
    if (!std::isfinite(z_grid[k])) throw DomainError("build_table: non-finite grid point");
    if (z_grid[k] <= 0.0) continue;
    try {
      const auto est = estimate_jhom(model, z_grid[k], schedule, samples, cfg);
      t.values[k] = est.estimate;
      t.ci[k] = est.ci;
      if (est.trace.size() >= 2) {
        // twice the 1/N-extrapolated bias at the largest N
        const auto& a = est.trace[est.trace.size() - 2];
        const auto& b = est.trace.back();
        t.finite_size[k] = 2.0 * std::abs(b.mean - a.mean) * static_cast<double>(a.N) / static_cast<double>(b.N - a.N);
      }
      if (est.failures > 0) t.notes[k] = std::to_string(est.failures) + " descents stopped at max_iter";
    } catch (const std::exception& e) {
      t.values[k] = std::numeric_limits<double>::quiet_NaN();
      t.notes[k] = e.what();
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// Monotone piecewise-cubic (Fritsch-Carlson / Fritsch-Butland) interpolation.

class MonotoneCubic {
public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n < 2 || y_.size() != n) throw PreconditionError("interpolation: need >= 2 points");
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      h[k] = x_[k + 1] - x_[k];
      if (!(h[k] > 0.0)) throw PreconditionError("interpolation: abscissae must increase");
      s[k] = (y_[k + 1] - y_[k]) / h[k];
    }
    m_.assign(n, 0.0);
    if (n == 2) {
      m_[0] = m_[1] = s[0];
      return;
    }
    for (std::size_t k = 1; k + 1 < n; ++k) {
      if (s[k - 1] * s[k] <= 0.0) {
        m_[k] = 0.0;
      } else {
        const double w1 = 2.0 * h[k] + h[k - 1];
        const double w2 = h[k] + 2.0 * h[k - 1];
        m_[k] = (w1 + w2) / (w1 / s[k - 1] + w2 / s[k]);
      }
    }
    m_[0] = end_slope(h[0], h[1], s[0], s[1]);
    m_[n - 1] = end_slope(h[n - 2], h[n - 3], s[n - 2], s[n - 3]);
  }

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  double operator()(double x) const {
    if (!(x >= lo() && x <= hi())) throw DomainError("interpolation: " + format_double(x) + " outside the table range [" +
                                                      format_double(lo()) + ", " + format_double(hi()) + "]");
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t k = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    if (k >= x_.size() - 1) k = x_.size() - 2;
    if (x == x_[k]) return y_[k];
    if (x == x_[k + 1]) return y_[k + 1];
    const double h = x_[k + 1] - x_[k];
    const double t = (x - x_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * m_[k] + (-2 * t3 + 3 * t2) * y_[k + 1] +
           (t3 - t2) * h * m_[k + 1];
  }

private:
  static double end_slope(double h0, double h1, double s0, double s1) {
    double d = ((2 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d * s0 <= 0.0) return 0.0;
    if (s0 * s1 <= 0.0 && std::abs(d) > std::abs(3 * s0)) return 3 * s0;
    return d;
  }

  std::vector<double> x_, y_, m_;
};

// Interpolant over the finite (z > 0) part of a table.
inline MonotoneCubic table_interpolant(const JhomTable& t) {
  std::vector<double> x, y;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t.z_grid[k] > 0.0 && std::isfinite(t.values[k])) {
      x.push_back(t.z_grid[k]);
      y.push_back(t.values[k]);
    }
  return MonotoneCubic(std::move(x), std::move(y));
}

inline ExtReal jhom_at(const JhomTable& t, double z) {
  if (!(z > 0.0)) return kInfinity;
  return ExtReal(table_interpolant(t)(z));
}

// ---------------------------------------------------------------------------
// Piecewise-affine profiles with nonnegative jumps.

struct Piece {
  double a = 0.0;
  double b = 1.0;
  double slope = 0.0;
};

struct Jump {
  double x = 0.0;
  double size = 0.0;
};

struct BVRepresentation {
  std::vector<Piece> pieces;
  std::vector<Jump> jumps;
  double bc_ell = 1.0;

  static BVRepresentation affine(double ell) { return {{{0.0, 1.0, ell}}, {}, ell}; }

  // Tiling and total-stretch checks; jump signs are the functional's business.
  void validate() const {
    std::vector<std::string> v;
    if (pieces.empty()) v.push_back("representation needs at least one piece");
    double pos = 0.0;
    double total = 0.0;
    for (const auto& p : pieces) {
      if (std::abs(p.a - pos) > 1e-12) v.push_back("pieces must tile [0,1] without gaps");
      if (!(p.b > p.a)) v.push_back("pieces must have positive length");
      if (!std::isfinite(p.slope)) v.push_back("piece slopes must be finite");
      total += p.slope * (p.b - p.a);
      pos = p.b;
    }
    if (!pieces.empty() && std::abs(pos - 1.0) > 1e-12) v.push_back("pieces must end at 1");
    for (const auto& j : jumps) {
      if (!(j.x >= 0.0 && j.x <= 1.0)) v.push_back("jump location outside [0,1]");
      total += j.size;
    }
    if (std::abs(total - bc_ell) > 1e-10 * std::max(1.0, std::abs(bc_ell)))
      v.push_back("elastic stretch plus jumps must equal bc_ell");
    if (!v.empty()) throw ValidationError(std::move(v));
  }
};

inline ExtReal eval_ehom(const BVRepresentation& rep, const JhomTable& table) {
  rep.validate();
  for (const auto& j : rep.jumps)
    if (j.size < 0.0) return kInfinity;
  for (const auto& p : rep.pieces)
    if (!(p.slope > 0.0)) return kInfinity;
  const auto f = table_interpolant(table);
  double sum = 0.0;
  for (const auto& p : rep.pieces) sum += (p.b - p.a) * f(p.slope);
  return ExtReal(sum);
}

// ---------------------------------------------------------------------------
// Structural checks.

struct StructureReport {
  std::vector<CheckResult> checks;
  std::optional<double> plateau_onset;

  bool all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
  }
  const CheckResult& get(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return c;
    throw std::out_of_range("no check named " + name);
  }
};

inline constexpr double kStructureAbsSlack = 1e-9;

inline StructureReport check_structure(const JhomTable& t) {
  std::vector<std::size_t> fin;
  for (std::size_t k = 0; k < t.size(); ++k)
    if (t.z_grid[k] > 0.0 && std::isfinite(t.values[k])) fin.push_back(k);
  if (fin.size() < 5) throw PreconditionError("check_structure: need at least 5 finite points");
  StructureReport r;
  const auto& z = t.z_grid;
  const auto& v = t.values;
  std::vector<double> c(t.size());
  for (std::size_t k = 0; k < t.size(); ++k) c[k] = t.uncertainty(k);

  {
    std::string worst;
    bool ok = true;
    for (std::size_t q = 1; q + 1 < fin.size(); ++q) {
      const auto i0 = fin[q - 1], i1 = fin[q], i2 = fin[q + 1];
      const double h1 = z[i1] - z[i0], h2 = z[i2] - z[i1];
      const double s1 = (v[i1] - v[i0]) / h1, s2 = (v[i2] - v[i1]) / h2;
      const double slack = (c[i0] + c[i1]) / h1 + (c[i1] + c[i2]) / h2 + kStructureAbsSlack * (1.0 + std::abs(s1) + std::abs(s2));
      if (s2 - s1 < -slack) {
        ok = false;
        worst = "negative second difference at z=" + format_double(z[i1]);
      }
    }
    r.checks.push_back({"convexity", ok, ok ? "second differences within slack" : worst});
  }
  {
    bool ok = true;
    std::string where;
    for (std::size_t q = 1; q < fin.size(); ++q) {
      const auto a = fin[q - 1], b = fin[q];
      if (v[b] > v[a] + c[a] + c[b] + kStructureAbsSlack * (1.0 + std::abs(v[a]))) {
        ok = false;
        where = "increase between z=" + format_double(z[a]) + " and z=" + format_double(z[b]);
      }
    }
    r.checks.push_back({"monotone_decrease", ok, ok ? "non-increasing within slack" : where});
  }
  {
    bool ok = true;
    for (std::size_t k = 0; k < t.size(); ++k)
      if (z[k] <= 0.0 && !std::isinf(v[k])) ok = false;
    r.checks.push_back({"infinite_at_nonpositive", ok, ok ? "+inf at every z <= 0" : "finite value at z <= 0"});
  }
  {
    const auto& cls = t.meta.cls;
    const double K = t.meta.K;
    bool ok = true;
    std::string detail;
    for (auto k : fin) {
      const double floor_v = K / cls.d * cls.psi(z[k]).to_double() - K * cls.d;
      if (v[k] + c[k] + kStructureAbsSlack * (1.0 + std::abs(v[k])) < floor_v) {
        ok = false;
        detail = "below the floor at z=" + format_double(z[k]);
      }
    }
    const auto k0 = fin.front();
    if (ok)
      detail = "smallest positive grid point z=" + format_double(z[k0]) + ": value " + format_double(v[k0]) +
               " >= floor " + format_double(K / cls.d * cls.psi(z[k0]).to_double() - K * cls.d);
    r.checks.push_back({"lower_bound_floor", ok, detail});
  }
  if (t.meta.K == 1 && t.meta.mean_delta && t.meta.mean_minimum) {
    const double ed = *t.meta.mean_delta;
    const double pv = *t.meta.mean_minimum;
    bool ok = true;
    std::string detail;
    bool any = false;
    for (auto k : fin)
      if (z[k] >= ed) {
        any = true;
        const double tol = std::max(0.05, 3.0 * c[k]);
        if (std::abs(v[k] - pv) > tol) {
          ok = false;
          detail = "value " + format_double(v[k]) + " at z=" + format_double(z[k]) + " off the plateau " + format_double(pv);
        }
      }
    // onset: smallest grid point from which every value is on the plateau
    std::optional<double> onset;
    for (std::size_t q = fin.size(); q-- > 0;) {
      const auto k = fin[q];
      if (std::abs(v[k] - pv) <= std::max(0.05, 3.0 * c[k]))
        onset = z[k];
      else
        break;
    }
    r.plateau_onset = onset;
    if (ok) detail = any ? "flat at " + format_double(pv) + " beyond E[delta]=" + format_double(ed) +
                               (onset ? ", detected onset z=" + format_double(*onset) : "")
                         : "no grid point beyond E[delta]";
    r.checks.push_back({"plateau", ok, detail});
  } else {
    r.checks.push_back({"plateau", true, "not applicable (K != 1 or no closed-form expectation)"});
  }
  return r;
}

inline std::pair<double, double> closed_form_plateau(const DistributionSpec& spec) {
  if (spec.K != 1) throw UnsupportedError("closed_form_plateau: only nearest-neighbour media have a proven plateau");
  return {expectation(spec, Quantity::delta), expectation(spec, Quantity::J_at_delta)};
}

} // namespace homchain
