#pragma once

// Subcommands of the command-line harness. Exit codes: 0 pass, 1 usage or I/O
// error, 2 numeric failure or failed check.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "homchain/cell_solver.hpp"
#include "homchain/chain_energy.hpp"
#include "homchain/config.hpp"
#include "homchain/homogenized_limit.hpp"
#include "homchain/io.hpp"
#include "homchain/random_medium.hpp"
#include "homchain/stats.hpp"

namespace homchain {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

struct CliOptions {
  std::filesystem::path out_dir = ".";
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  bool diagnostics = false;
};

inline std::uint64_t effective_seed(const RunConfig& c, const CliOptions& o) { return o.seed ? *o.seed : c.seed; }

inline SolverConfig effective_solver(const RunConfig& c, const CliOptions& o) {
  SolverConfig s = c.solver;
  s.jobs = o.jobs;
  s.seed = effective_seed(c, o);
  return s;
}

inline std::filesystem::path output_path(const RunConfig& c, const CliOptions& o, const std::string& suffix) {
  return o.out_dir / (c.name + "_" + suffix);
}

// ---------------------------------------------------------------------------
// Named pass/fail checks shared by `verify` and the acceptance suite.

struct NamedCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline void print_checks(std::ostream& os, const std::vector<NamedCheck>& checks) {
  std::size_t w = 0;
  for (const auto& c : checks) w = std::max(w, c.name.size());
  for (const auto& c : checks) {
    os << (c.passed ? "PASS  " : "FAIL  ") << c.name << std::string(w - c.name.size() + 2, ' ') << c.detail << '\n';
  }
}

// Marginal of delta at several indices across seeds, compared by two-sample KS.
inline NamedCheck stationarity_check(const DistributionSpec& spec, std::size_t seeds, std::uint64_t base_seed,
                                     const std::vector<std::int64_t>& indices = {0, 17, -40}) {
  std::vector<std::vector<double>> samples(indices.size());
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto m = build(spec, base_seed + s);
    for (std::size_t k = 0; k < indices.size(); ++k)
      samples[k].push_back(minimizer(m.potential_at(indices[k])).first);
  }
  double worst = 0.0;
  const double crit = stats::ks_critical_1pct(seeds, seeds);
  for (std::size_t k = 1; k < indices.size(); ++k) worst = std::max(worst, stats::ks_statistic(samples[0], samples[k]));
  return {"stationarity", worst < crit,
          "max KS " + format_double(worst) + " vs 1% critical " + format_double(crit) + " over " + std::to_string(seeds) +
              " seeds"};
}

// Same realization queried in shuffled orders from several threads.
inline NamedCheck determinism_check(const DistributionSpec& spec, std::uint64_t seed, int threads = 4) {
  std::vector<std::int64_t> idx;
  for (std::int64_t i = -300; i <= 300; ++i) idx.push_back(i);
  const auto ref_model = build(spec, seed);
  std::vector<PotentialSpec> ref;
  for (auto i : idx) ref.push_back(ref_model.potential_at(i));
  bool ok = true;
  std::mutex mu;
  const auto m = build(spec, seed);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      std::vector<std::size_t> order(idx.size());
      for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
      std::mt19937_64 rng(static_cast<std::uint64_t>(t) + 1);
      std::shuffle(order.begin(), order.end(), rng);
      for (auto k : order)
        if (!(m.potential_at(idx[k]) == ref[k])) {
          std::lock_guard lock(mu);
          ok = false;
        }
    });
  for (auto& th : pool) th.join();
  return {"determinism", ok, ok ? "shuffled multi-threaded queries reproduce the realization" : "query order changed values"};
}

inline NamedCheck group_action_check(const DistributionSpec& spec, std::uint64_t seed, int probes = 100) {
  const auto m = build(spec, seed);
  bool ok = true;
  for (int p = 0; p < probes; ++p) {
    const auto a = static_cast<std::int64_t>(hash_key(seed, p, 11) % 2001) - 1000;
    const auto b = static_cast<std::int64_t>(hash_key(seed, p, 12) % 2001) - 1000;
    const auto i = static_cast<std::int64_t>(hash_key(seed, p, 13) % 2001) - 1000;
    ok = ok && m.shift(a).shift(b).potential_at(i) == m.shift(a + b).potential_at(i);
    ok = ok && m.shift(0).potential_at(i) == m.potential_at(i);
    ok = ok && m.shift(a).potential_at(i) == m.potential_at(i + a);
  }
  return {"group_action", ok, std::to_string(probes) + " composition/identity probes"};
}

inline NamedCheck ergodic_average_check(const DistributionSpec& spec, std::uint64_t seed, std::int64_t N = 100000,
                                        double tol = 0.05) {
  double expected = 0.0;
  try {
    expected = expectation(spec, Quantity::delta);
  } catch (const UnsupportedError&) {
    return {"ergodic_average", true, "skipped: no invariant expectation"};
  }
  const double avg = sample_average(build(spec, seed), Quantity::delta, 1, N);
  const bool ok = std::abs(avg - expected) <= tol;
  return {"ergodic_average", ok,
          "average delta " + format_double(avg) + " vs E[delta] " + format_double(expected) + " (N=" + std::to_string(N) + ")"};
}

inline NamedCheck holder_audit_check(const DistributionSpec& spec, std::uint64_t seed) {
  const auto a = holder_audit(build(spec, seed), {50, 200, 800});
  std::string d = "running averages";
  for (double v : a.averages) d += " " + format_double(v);
  return {"holder_integrability", !a.growing, d};
}

inline std::vector<NamedCheck> structure_checks(const JhomTable& t) {
  std::vector<NamedCheck> out;
  const auto r = check_structure(t);
  for (const auto& c : r.checks) out.push_back({"structure." + c.name, c.passed, c.detail});
  return out;
}

inline NamedCheck subadditivity_check(const DistributionSpec& spec, std::uint64_t seed, int probes, std::int64_t N,
                                      const SolverConfig& cfg) {
  if (spec.K != 1) return {"subadditivity", true, "skipped: probes use nearest-neighbour media"};
  int passed = 0;
  double worst = kInf;
  std::vector<SubadditivityReport> reports(static_cast<std::size_t>(probes));
  parallel_for(reports.size(), cfg.jobs, [&](std::size_t p) {
    const double z = 0.5 + 2.5 * uniform01(seed, static_cast<std::int64_t>(p), 21);
    const double a = -1.0 + 2.0 * uniform01(seed, static_cast<std::int64_t>(p), 22);
    const double la = 0.25 + 0.75 * uniform01(seed, static_cast<std::int64_t>(p), 23);
    const double lb = 0.25 + 0.75 * uniform01(seed, static_cast<std::int64_t>(p), 24);
    const auto m = build(spec, derive_seed(seed, p));
    SolverConfig c = cfg;
    c.seed = derive_seed(cfg.seed, p);
    c.jobs = 1;
    reports[p] = subadditivity_probe(m, z, {a, a + la}, {a + la, a + la + lb}, N, c);
  });
  for (const auto& r : reports) {
    passed += r.passed;
    worst = std::min(worst, r.margin);
  }
  return {"subadditivity", passed == probes,
          std::to_string(passed) + "/" + std::to_string(probes) + " probes, smallest margin " + format_double(worst)};
}

// Two disjoint seed batches at the same strain.
inline NamedCheck seed_independence_check(const DistributionSpec& spec, double z, const std::vector<std::int64_t>& schedule,
                                          std::size_t samples, std::uint64_t seed, const SolverConfig& cfg) {
  const auto e1 = estimate_jhom(build(spec, derive_seed(seed, 101)), z, schedule, samples, cfg);
  const auto e2 = estimate_jhom(build(spec, derive_seed(seed, 202)), z, schedule, samples, cfg);
  const double gap = std::abs(e1.estimate - e2.estimate);
  const double tol = e1.ci + e2.ci + 1e-9 * (1.0 + std::abs(e1.estimate));
  return {"seed_independence", gap <= tol,
          "z=" + format_double(z) + ": gap " + format_double(gap) + " vs combined CI " + format_double(tol)};
}

inline NamedCheck window_independence_check(const DistributionSpec& spec, double z, const std::vector<std::int64_t>& schedule,
                                            std::size_t samples, std::uint64_t seed, const SolverConfig& cfg) {
  const auto m = build(spec, seed);
  const auto e1 = estimate_jhom(m, z, schedule, samples, cfg, {0.0, 1.0});
  const auto e2 = estimate_jhom(m, z, schedule, samples, cfg, {0.3, 1.7});
  const double gap = std::abs(e1.estimate - e2.estimate);
  const double tol = e1.ci + e2.ci + 1e-9 * (1.0 + std::abs(e1.estimate));
  return {"window_independence", gap <= tol,
          "z=" + format_double(z) + ": [0,1) vs [0.3,1.7) gap " + format_double(gap) + " vs combined CI " + format_double(tol)};
}

// ---------------------------------------------------------------------------
// Oracle corpus: small instances over mixed media.

struct OracleInstance {
  std::string label;
  DistributionSpec spec;
  std::uint64_t seed = 1;
  std::int64_t N = 2;
  double z = 1.0;
};

inline DistributionSpec two_valued_spec(int K = 1) {
  DistributionSpec s;
  s.kind = DistributionKind::iid_discrete;
  s.support = {{PotentialSpec::classical(1.0, 3.0), 0.81},
               {PotentialSpec::classical(1.0, 8.0), 0.09},
               {PotentialSpec::classical(6.0, 3.0), 0.09},
               {PotentialSpec::classical(6.0, 8.0), 0.01}};
  s.K = K;
  return s;
}

inline DistributionSpec markov_example_spec() {
  DistributionSpec s;
  s.kind = DistributionKind::markov_shift;
  s.states = {PotentialSpec::classical(1.0, 3.0), PotentialSpec::classical(2.0, 4.0)};
  s.transition = {{0.9, 0.1}, {0.2, 0.8}};
  return s;
}

inline std::vector<OracleInstance> oracle_corpus() {
  struct Medium {
    std::string label;
    DistributionSpec spec;
    std::int64_t N;
    std::uint64_t seed;
  };
  const std::vector<Medium> media = {
      {"deterministic K1 N2", DistributionSpec::deterministic(PotentialSpec::classical(2.0, 1.0)), 2, 1},
      {"uniform K1 N3", DistributionSpec::uniform_box({1, 2, 3, 4}), 3, 11},
      {"two-valued K1 N4", two_valued_spec(), 4, 5},
      {"uniform K2 N4", DistributionSpec::uniform_box({1, 2, 3, 4}, 2), 4, 23},
      {"two-valued K2 N4", two_valued_spec(2), 4, 3},
      {"markov K1 N4", markov_example_spec(), 4, 9},
  };
  std::vector<OracleInstance> out;
  for (const auto& m : media)
    for (double z : {0.8, 1.2, 1.6, 2.5}) out.push_back({m.label + " z=" + format_double(z), m.spec, m.seed, m.N, z});
  return out;
}

struct OracleComparison {
  std::string label;
  double solver = kInf;
  double oracle = kInf;
  double gap = 0.0;
  bool passed = false;
};

inline constexpr double kOracleTol = 1e-5;

inline OracleComparison compare_with_oracle(const OracleInstance& inst, double grid_step, const SolverConfig& cfg) {
  CellProblem p;
  p.model = build(inst.spec, inst.seed);
  p.z = inst.z;
  p.N = inst.N;
  p.K = inst.spec.K;
  OracleComparison c;
  c.label = inst.label;
  c.solver = solve_cell(p, cfg).value.to_double();
  c.oracle = oracle_cell(p, grid_step).to_double();
  if (std::isinf(c.solver) && std::isinf(c.oracle)) {
    c.gap = 0.0;
  } else {
    c.gap = std::abs(c.solver - c.oracle);
  }
  c.passed = c.gap <= kOracleTol * std::max(1.0, std::abs(c.oracle));
  return c;
}

// ---------------------------------------------------------------------------
// Subcommands.

inline int cmd_tabulate(const RunConfig& c, const CliOptions& o, std::ostream& os = std::cout) {
  if (c.z_grid.empty()) {
    os << "tabulate: config has no z_grid\n";
    return kExitUsage;
  }
  spdlog::info("tabulate: {} grid points, schedule up to N={}, {} samples", c.z_grid.size(), c.schedule.back(),
               c.samples);
  const auto t = build_table(c.distribution, c.z_grid, c.schedule, c.samples, effective_solver(c, o), effective_seed(c, o));
  const auto hash = c.hash();
  write_text(output_path(c, o, "table.csv"), table_csv(t, hash));
  write_text(output_path(c, o, "table_meta.json"), table_meta_json(t, hash).dump(2) + "\n");
  for (std::size_t k = 0; k < t.size(); ++k)
    os << "z=" << format_double(t.z_grid[k]) << "  J_hom=" << format_double(t.values[k]) << "  ci=" << format_double(t.ci[k])
       << (t.notes[k].empty() ? "" : "  [" + t.notes[k] + "]") << '\n';
  os << "wrote " << output_path(c, o, "table.csv").string() << '\n';
  return t.has_failures() ? kExitNumeric : kExitOk;
}

struct ConvergenceResult {
  // per level: "exact" first, then L = 0..L_max
  std::vector<std::string> levels;
  std::vector<std::vector<stats::Summary>> by_N; // [level][schedule index]
  bool ordering_ok = true;                       // every approx sample <= exact sample
  bool monotone = true;
  double cauchy_gap = 0.0;
};

inline ConvergenceResult run_convergence(const DistributionSpec& spec, double z, const std::vector<std::int64_t>& schedule,
                                         std::size_t samples, int L_max, const SolverConfig& cfg, std::uint64_t seed) {
  ConvergenceResult r;
  r.levels.push_back("exact");
  for (int L = 0; L <= L_max; ++L) r.levels.push_back(std::to_string(L));
  const std::size_t nl = r.levels.size();
  r.by_N.assign(nl, {});
  const auto base = build(spec, seed);
  for (auto N : schedule) {
    std::vector<std::vector<double>> vals(nl, std::vector<double>(samples));
    std::vector<char> ordered(samples, 1);
    parallel_for(samples, cfg.jobs, [&](std::size_t k) {
      CellProblem p;
      p.model = build(spec, sample_seed(base.seed(), k));
      p.z = z;
      p.N = N;
      p.K = spec.K;
      SolverConfig c = cfg;
      c.seed = derive_seed(cfg.seed, k);
      c.jobs = 1;
      const auto t = approx_trace(p, L_max, c);
      vals[0][k] = t.exact;
      for (int L = 0; L <= L_max; ++L) {
        vals[L + 1][k] = t.values[L];
        if (!(t.values[L] <= t.exact + 1e-12 * (1.0 + std::abs(t.exact)))) ordered[k] = 0;
      }
    });
    for (std::size_t l = 0; l < nl; ++l) r.by_N[l].push_back(stats::summarize(vals[l]));
    for (char ok : ordered) r.ordering_ok = r.ordering_ok && ok;
  }
  // L-trace at the largest N
  for (int L = 1; L <= L_max; ++L) {
    const double prev = r.by_N[L][schedule.size() - 1].mean;
    const double cur = r.by_N[L + 1][schedule.size() - 1].mean;
    if (!(cur >= prev - 1e-12 * (1.0 + std::abs(prev)))) r.monotone = false;
  }
  if (L_max >= 1)
    r.cauchy_gap = std::abs(r.by_N[L_max + 1][schedule.size() - 1].mean - r.by_N[L_max][schedule.size() - 1].mean);
  return r;
}

inline int cmd_converge(const RunConfig& c, const CliOptions& o, std::ostream& os = std::cout) {
  if (!c.z) {
    os << "converge: config has no z\n";
    return kExitUsage;
  }
  const auto cfg = effective_solver(c, o);
  const auto r = run_convergence(c.distribution, *c.z, c.schedule, c.samples, c.L_max, cfg, effective_seed(c, o));
  const auto hash = c.hash();
  std::ostringstream byn, byl;
  byn << csv_header(hash, "level,N,mean,stderr,samples");
  for (std::size_t l = 0; l < r.levels.size(); ++l)
    for (std::size_t k = 0; k < c.schedule.size(); ++k)
      byn << r.levels[l] << ',' << c.schedule[k] << ',' << format_double(r.by_N[l][k].mean) << ','
          << format_double(r.by_N[l][k].stderr_mean) << ',' << r.by_N[l][k].samples << '\n';
  byl << csv_header(hash, "L,mean,stderr");
  const std::size_t last = c.schedule.size() - 1;
  for (std::size_t l = 1; l < r.levels.size(); ++l)
    byl << r.levels[l] << ',' << format_double(r.by_N[l][last].mean) << ',' << format_double(r.by_N[l][last].stderr_mean) << '\n';
  byl << "exact," << format_double(r.by_N[0][last].mean) << ',' << format_double(r.by_N[0][last].stderr_mean) << '\n';
  write_text(output_path(c, o, "trace_by_N.csv"), byn.str());
  write_text(output_path(c, o, "trace_by_L.csv"), byl.str());
  const bool cauchy = r.cauchy_gap < c.cauchy_tol;
  os << "L-trace at N=" << c.schedule.back() << ":";
  for (std::size_t l = 1; l < r.levels.size(); ++l) os << ' ' << format_double(r.by_N[l][last].mean);
  os << "  exact " << format_double(r.by_N[0][last].mean) << '\n';
  os << "monotone=" << (r.monotone ? "yes" : "no") << " cauchy_gap=" << format_double(r.cauchy_gap)
     << " approx<=exact=" << (r.ordering_ok ? "yes" : "no") << '\n';
  if (c.distribution.K >= 1) {
    const auto& cls = c.distribution.class_params();
    const double K = c.distribution.K;
    os << "floor (K/d)Psi(z)-Kd = " << format_double(K / cls.d * cls.psi(*c.z).to_double() - K * cls.d) << '\n';
  }
  return r.monotone && cauchy && r.ordering_ok ? kExitOk : kExitNumeric;
}

inline int cmd_minimize(const RunConfig& c, const CliOptions& o, std::ostream& os = std::cout) {
  if (!c.ell) {
    os << "minimize: config has no chain.ell\n";
    return kExitUsage;
  }
  const auto cfg = effective_solver(c, o);
  const auto model = build(c.distribution, effective_seed(c, o));
  const auto hash = c.hash();
  const auto est = estimate_jhom(model, *c.ell, c.schedule, c.samples, cfg);
  bool ok = true;
  Json diag = Json::array();
  for (auto n : c.chain_n) {
    SolverConfig sc = cfg;
    sc.jobs = 1;
    const auto m = minimize_chain(model, n, c.distribution.K, {*c.ell}, sc);
    write_text(output_path(c, o, "deformation_n" + std::to_string(n) + ".csv"), deformation_csv(m.u, hash));
    const double gap = std::abs(m.value.to_double() - est.estimate);
    const double tol = std::max(c.gap_tolerance, est.ci);
    ok = ok && gap <= tol;
    os << "n=" << n << " min_value=" << m.value << " jhom_estimate=" << format_double(est.estimate)
       << " gap=" << format_double(gap) << " tolerance=" << format_double(tol) << '\n';
    diag.push_back(Json{{"n", n}, {"status", to_string(m.status)}, {"diagnostics", diagnostics_json(m.diagnostics)}});
  }
  if (o.diagnostics) write_text(output_path(c, o, "minimize_diagnostics.json"), diag.dump(2) + "\n");
  return ok ? kExitOk : kExitNumeric;
}

inline int cmd_oracle(const RunConfig& c, const CliOptions& o, std::ostream& os = std::cout) {
  auto corpus = oracle_corpus();
  for (std::int64_t N = 2 * c.distribution.K; N <= 4; ++N)
    for (double z : {0.8, 1.2, 1.6, 2.5})
      corpus.push_back({c.name + " N=" + std::to_string(N) + " z=" + format_double(z), c.distribution, effective_seed(c, o), N, z});
  const auto cfg = effective_solver(c, o);
  std::vector<OracleComparison> res(corpus.size());
  parallel_for(corpus.size(), o.jobs, [&](std::size_t k) { res[k] = compare_with_oracle(corpus[k], c.grid_step, cfg); });
  std::vector<NamedCheck> checks;
  for (const auto& r : res)
    checks.push_back({r.label, r.passed,
                      "solver " + format_double(r.solver) + " oracle " + format_double(r.oracle) + " gap " + format_double(r.gap)});
  print_checks(os, checks);
  const bool ok = std::all_of(res.begin(), res.end(), [](const auto& r) { return r.passed; });
  return ok ? kExitOk : kExitNumeric;
}

// Table read from verify.table_fixture; values may be the string "inf".
inline std::optional<JhomTable> table_fixture(const RunConfig& c) {
  if (!c.table_fixture) return std::nullopt;
  const auto& j = *c.table_fixture;
  const auto num = [](const Json& v) { return v.is_string() ? parse_double(v.get<std::string>()) : v.get<double>(); };
  JhomTable t;
  for (const auto& v : j.at("z")) t.z_grid.push_back(num(v));
  for (const auto& v : j.at("value")) t.values.push_back(num(v));
  if (j.contains("ci"))
    for (const auto& v : j.at("ci")) t.ci.push_back(num(v));
  else
    t.ci.assign(t.z_grid.size(), 0.0);
  t.notes.assign(t.z_grid.size(), "");
  t.meta.K = c.distribution.K;
  t.meta.cls = c.distribution.class_params();
  if (const auto pl = try_plateau(c.distribution)) {
    t.meta.mean_delta = pl->first;
    t.meta.mean_minimum = pl->second;
  }
  t.validate();
  return t;
}

inline int cmd_verify(const RunConfig& c, const CliOptions& o, std::ostream& os = std::cout) {
  const auto planted_table = table_fixture(c);
  const auto seed = effective_seed(c, o);
  const auto cfg = effective_solver(c, o);
  const auto& spec = c.distribution;
  std::vector<NamedCheck> checks;
  checks.push_back(determinism_check(spec, seed));
  checks.push_back(group_action_check(spec, seed));
  checks.push_back(stationarity_check(spec, c.ks_seeds, seed));
  checks.push_back(ergodic_average_check(spec, seed));
  checks.push_back(holder_audit_check(spec, seed));

  const bool stationary = spec.kind != DistributionKind::nonstationary_fixture;
  if (planted_table) {
    for (auto& ch : structure_checks(*planted_table)) checks.push_back(std::move(ch));
  } else if (stationary && c.z_grid.size() >= 5) {
    const auto t = build_table(spec, c.z_grid, c.schedule, c.samples, cfg, seed);
    for (auto& ch : structure_checks(t)) checks.push_back(std::move(ch));
  }
  if (stationary) {
    const double z = c.z ? *c.z : 1.0;
    checks.push_back(subadditivity_check(spec, seed, c.subadditivity_probes, c.schedule.front(), cfg));
    checks.push_back(seed_independence_check(spec, z, c.schedule, c.samples, seed, cfg));
    checks.push_back(window_independence_check(spec, z, c.schedule, c.samples, seed, cfg));
  }
  print_checks(os, checks);
  const bool ok = std::all_of(checks.begin(), checks.end(), [](const auto& ch) { return ch.passed; });
  return ok ? kExitOk : kExitNumeric;
}

} // namespace homchain
