// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <thread>

#include "homchain/homchain.hpp"

using namespace homchain;

namespace {

const ParamBox kBox{1.0, 2.0, 3.0, 4.0};
const std::uint64_t kSeed = 7;
const std::vector<std::int64_t> kSchedule{200, 800, 3200};
const std::size_t kSamples = 16;

SolverConfig solver() {
  SolverConfig c;
  c.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return c;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

// estimates are shared between criteria
const JhomEstimate& estimate(const std::string& medium, double z) {
  static std::map<std::pair<std::string, double>, JhomEstimate> cache;
  const auto key = std::make_pair(medium, z);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  const auto spec = medium == "uniform" ? DistributionSpec::uniform_box(kBox) : two_valued_spec();
  return cache[key] = estimate_jhom(build(spec, kSeed), z, kSchedule, kSamples, solver());
}

Outcome plateau() {
  Outcome o{true, ""};
  for (double z : {1.5, 2.0, 3.0}) {
    const auto& e = estimate("uniform", z);
    const double tol = std::max(0.05, 3.0 * e.ci);
    const bool ok = std::abs(e.estimate + 3.5) <= tol;
    o.passed = o.passed && ok;
    o.detail += "z=" + format_double(z) + ": " + format_double(e.estimate) + " (tol " + format_double(tol) + ") ";
  }
  return o;
}

Outcome discrimination() {
  const auto& u2 = estimate("uniform", 2.0);
  const auto& t2 = estimate("two_valued", 2.0);
  const auto& u1 = estimate("uniform", 1.0);
  const auto& t1 = estimate("two_valued", 1.0);
  const double gap2 = std::abs(u2.estimate - t2.estimate), ci2 = u2.ci + t2.ci;
  const double gap1 = std::abs(u1.estimate - t1.estimate), ci1 = u1.ci + t1.ci;
  return {gap2 <= ci2 && gap1 > ci1, "z=2: gap " + format_double(gap2) + " <= CI " + format_double(ci2) + "; z=1: " +
                                         format_double(u1.estimate) + " vs " + format_double(t1.estimate) + ", gap " +
                                         format_double(gap1) + " > CI " + format_double(ci1)};
}

Outcome min_value_convergence() {
  const auto model = build(DistributionSpec::deterministic(PotentialSpec::classical(2.0, 1.0)), 1);
  Outcome o{true, ""};
  std::vector<double> ns, errs;
  for (std::int64_t n : {250, 500, 1000, 2000}) {
    const auto r = minimize_chain(model, n, 1, {3.0}, solver());
    const double err = std::abs(r.value.value() + 1.0);
    o.passed = o.passed && err <= 5.0 / static_cast<double>(n);
    ns.push_back(static_cast<double>(n));
    errs.push_back(err);
    o.detail += "n=" + std::to_string(n) + " err " + format_double(err) + "  ";
  }
  const auto fit = stats::fit_inverse(ns, errs);
  o.detail += "fit err ~ " + format_double(fit.v_inf) + " + " + format_double(fit.c) + "/n";
  return o;
}

Outcome oracle() {
  int passed = 0, total = 0;
  double worst = 0.0;
  std::string failures;
  for (const auto& inst : oracle_corpus()) {
    const auto c = compare_with_oracle(inst, 1e-2, solver());
    ++total;
    passed += c.passed;
    worst = std::max(worst, c.gap / std::max(1.0, std::abs(c.oracle)));
    if (!c.passed) failures += " " + inst.label;
  }
  return {passed == total && total == 24,
          std::to_string(passed) + "/" + std::to_string(total) + " instances, worst relative gap " + format_double(worst) + failures};
}

Outcome structure() {
  const auto t = build_table(DistributionSpec::uniform_box(kBox), {-0.5, 0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.5, 2, 2.5, 3},
                             kSchedule, kSamples, solver(), kSeed);
  const auto r = check_structure(t);
  Outcome o{!t.has_failures(), t.has_failures() ? "table has failed points; " : ""};
  for (const char* name : {"convexity", "monotone_decrease", "infinite_at_nonpositive", "lower_bound_floor"}) {
    const auto& c = r.get(name);
    o.passed = o.passed && c.passed;
    o.detail += std::string(name) + (c.passed ? " ok" : " FAILED (" + c.detail + ")") + "; ";
  }
  o.passed = o.passed && t.z_grid[2] == 0.2 && std::isfinite(t.values[2]);
  o.detail += "J(0.2)=" + format_double(t.values[2]);
  return o;
}

Outcome approximation() {
  const auto r = run_convergence(DistributionSpec::uniform_box(kBox), 1.2, {200, 800}, kSamples, 5, solver(), kSeed);
  std::string trace;
  for (std::size_t l = 1; l < r.levels.size(); ++l) trace += " " + format_double(r.by_N[l].back().mean);
  return {r.monotone && r.cauchy_gap < 1e-3 && r.ordering_ok,
          "L-trace" + trace + " exact " + format_double(r.by_N[0].back().mean) + "; monotone " + (r.monotone ? "yes" : "no") +
              ", last gap " + format_double(r.cauchy_gap) + ", approx<=exact " + (r.ordering_ok ? "yes" : "no")};
}

Outcome subadditivity() {
  const auto c = subadditivity_check(DistributionSpec::uniform_box(kBox), kSeed, 50, 400, solver());
  return {c.passed, c.detail};
}

Outcome ergodic() {
  Outcome o{true, ""};
  const std::vector<std::pair<std::string, DistributionSpec>> media = {
      {"uniform", DistributionSpec::uniform_box(kBox)}, {"two-valued", two_valued_spec()}, {"markov", markov_example_spec()}};
  for (const auto& [name, spec] : media) {
    const auto c = ergodic_average_check(spec, kSeed, 100000, 0.05);
    o.passed = o.passed && c.passed && c.detail.rfind("skipped", 0) != 0;
    o.detail += name + ": " + c.detail + "; ";
  }
  return o;
}

} // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 plateau", plateau},
      {"2 distribution_discrimination", discrimination},
      {"3 min_value_convergence", min_value_convergence},
      {"4 oracle_equivalence", oracle},
      {"5 structural_battery", structure},
      {"6 approximation_exchange", approximation},
      {"7 subadditivity", subadditivity},
      {"8 ergodic_averaging", ergodic},
  };
  std::set<int> only;
  for (int a = 1; a < argc; ++a) only.insert(std::atoi(argv[a]));

  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!only.empty() && !only.count(static_cast<int>(k + 1))) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.passed;
    std::cout << (o.passed ? "PASS  " : "FAIL  ") << criteria[k].first << "  [" << format_double(std::round(secs * 10) / 10)
              << " s]  " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
