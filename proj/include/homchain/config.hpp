#pragma once

// JSON (de)serialization of specs and run configurations. Objects reject
// unknown keys; the config hash is FNV-1a over the canonical dump.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "homchain/cell_solver.hpp"
#include "homchain/errors.hpp"
#include "homchain/potential.hpp"
#include "homchain/random_medium.hpp"

namespace homchain {

using Json = nlohmann::json;

inline constexpr const char* kSchema = "homchain/1";

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string json_hash(const Json& j) { return hex64(fnv1a64(j.dump())); }

namespace detail {

inline void require_object(const Json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ValidationError({where + " must be an object"});
  std::vector<std::string> v;
  for (const auto& [k, _] : j.items())
    if (!allowed.count(k)) v.push_back(where + ": unknown key '" + k + "'");
  if (!v.empty()) throw ValidationError(std::move(v));
}

template <class T>
T get(const Json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError({where + ": missing key '" + key + "'"});
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError({where + "." + key + " has the wrong type"});
  }
}

template <class T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  return get<T>(j, key, where);
}

inline std::pair<double, double> interval(const Json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ValidationError({where + " must be a [lo, hi] pair"});
  return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace detail

// ---------------------------------------------------------------------------
// Potentials and classes.

inline Json to_json(const PotentialSpec& p) {
  Json j;
  j["kind"] = to_string(p.kind);
  if (p.kind == PotentialKind::registered_general) {
    j["name"] = p.general ? p.general->name : "";
    return j;
  }
  j["delta"] = p.delta;
  j["epsilon"] = p.epsilon;
  if (p.kind == PotentialKind::shifted_lj) j["shift"] = p.shift;
  return j;
}

inline PotentialSpec potential_from_json(const Json& j, const std::string& where = "potential") {
  detail::require_object(j, where, {"kind", "delta", "epsilon", "shift", "name"});
  const auto kind = potential_kind_from_string(detail::get_or<std::string>(j, "kind", "classical_lj", where));
  switch (kind) {
  case PotentialKind::classical_lj:
    if (j.contains("shift") || j.contains("name")) throw ValidationError({where + ": classical_lj takes delta, epsilon"});
    return PotentialSpec::classical(detail::get<double>(j, "delta", where), detail::get<double>(j, "epsilon", where));
  case PotentialKind::shifted_lj:
    return PotentialSpec::shifted(detail::get<double>(j, "delta", where), detail::get<double>(j, "epsilon", where),
                                  detail::get<double>(j, "shift", where));
  case PotentialKind::registered_general:
    return PotentialSpec::registered(detail::get<std::string>(j, "name", where));
  }
  throw ValidationError({where + ": unknown kind"});
}

inline Json to_json(const ClassParams& c) {
  return Json{{"alpha", c.alpha}, {"b", c.b}, {"d", c.d}, {"psi", c.psi.id()}};
}

inline ClassParams class_from_json(const Json& j, const std::string& where = "class") {
  detail::require_object(j, where, {"alpha", "b", "d", "psi"});
  ClassParams c;
  c.alpha = detail::get<double>(j, "alpha", where);
  c.b = detail::get<double>(j, "b", where);
  c.d = detail::get<double>(j, "d", where);
  try {
    c.psi = Psi::parse(detail::get_or<std::string>(j, "psi", "inv12", where));
  } catch (const std::invalid_argument& e) {
    throw ValidationError({where + ".psi: " + e.what()});
  }
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Distributions.

inline Json to_json(const DistributionSpec& s) {
  Json j;
  j["kind"] = to_string(s.kind);
  j["K"] = s.K;
  switch (s.kind) {
  case DistributionKind::iid_discrete: {
    Json arr = Json::array();
    for (const auto& w : s.support) arr.push_back(Json{{"potential", to_json(w.potential)}, {"probability", w.probability}});
    j["support"] = arr;
    break;
  }
  case DistributionKind::iid_uniform_box:
  case DistributionKind::nonstationary_fixture:
    j["box"] = Json{{"delta", {s.box.delta_lo, s.box.delta_hi}}, {"epsilon", {s.box.epsilon_lo, s.box.epsilon_hi}}};
    break;
  case DistributionKind::markov_shift:
  case DistributionKind::sequence_fixture: {
    Json arr = Json::array();
    for (const auto& p : s.states) arr.push_back(to_json(p));
    j["states"] = arr;
    if (s.kind == DistributionKind::markov_shift) j["transition"] = s.transition;
    break;
  }
  }
  if (!s.order_scales.empty()) {
    Json arr = Json::array();
    for (const auto& o : s.order_scales) arr.push_back(Json{{"delta", o.delta}, {"epsilon", o.epsilon}});
    j["order_scales"] = arr;
  }
  if (s.cls) j["class"] = to_json(*s.cls);
  return j;
}

inline DistributionSpec distribution_from_json(const Json& j, const std::string& where = "distribution") {
  detail::require_object(j, where, {"kind", "support", "box", "states", "transition", "K", "order_scales", "class"});
  DistributionSpec s;
  s.kind = distribution_kind_from_string(detail::get<std::string>(j, "kind", where));
  s.K = detail::get_or<int>(j, "K", 1, where);
  if (j.contains("support")) {
    for (std::size_t k = 0; k < j["support"].size(); ++k) {
      const auto& e = j["support"][k];
      const std::string w = where + ".support[" + std::to_string(k) + "]";
      detail::require_object(e, w, {"potential", "probability"});
      s.support.push_back({potential_from_json(detail::get<Json>(e, "potential", w), w + ".potential"),
                           detail::get<double>(e, "probability", w)});
    }
  }
  if (j.contains("box")) {
    const auto& b = j["box"];
    detail::require_object(b, where + ".box", {"delta", "epsilon"});
    const auto [dl, dh] = detail::interval(detail::get<Json>(b, "delta", where + ".box"), where + ".box.delta");
    const auto [el, eh] = detail::interval(detail::get<Json>(b, "epsilon", where + ".box"), where + ".box.epsilon");
    s.box = {dl, dh, el, eh};
  }
  if (j.contains("states"))
    for (std::size_t k = 0; k < j["states"].size(); ++k)
      s.states.push_back(potential_from_json(j["states"][k], where + ".states[" + std::to_string(k) + "]"));
  if (j.contains("transition")) s.transition = detail::get<std::vector<std::vector<double>>>(j, "transition", where);
  if (j.contains("order_scales"))
    for (const auto& o : j["order_scales"]) {
      detail::require_object(o, where + ".order_scales[]", {"delta", "epsilon"});
      s.order_scales.push_back({detail::get_or<double>(o, "delta", 1.0, where), detail::get_or<double>(o, "epsilon", 1.0, where)});
    }
  if (j.contains("class")) s.cls = class_from_json(j["class"], where + ".class");
  s.validate();
  return s;
}

inline std::string spec_hash(const DistributionSpec& s) { return json_hash(to_json(s)); }

// ---------------------------------------------------------------------------
// Run configuration.

struct RunConfig {
  std::string name = "run";
  DistributionSpec distribution;
  std::uint64_t seed = 1;
  std::vector<double> z_grid;
  std::optional<double> z;
  std::vector<std::int64_t> schedule{200, 800};
  std::size_t samples = 8;
  int L_max = 5;
  SolverConfig solver;
  // chain minimization
  std::vector<std::int64_t> chain_n{1000};
  std::optional<double> ell;
  double gap_tolerance = 0.05;
  // convergence study
  double cauchy_tol = 1e-3;
  // oracle regression
  double grid_step = 1e-2;
  // verification battery
  int subadditivity_probes = 10;
  std::size_t ks_seeds = 2000;
  std::optional<Json> table_fixture; // planted (z, value, ci) table for the structure checks
  Json raw; // canonical parsed document, for hashing

  std::string hash() const { return json_hash(raw); }
};

inline SolverConfig solver_from_json(const Json& j, SolverConfig base = {}) {
  detail::require_object(j, "solver", {"grad_tol", "n_starts", "strain_floor", "max_iter"});
  base.grad_tol = detail::get_or<double>(j, "grad_tol", base.grad_tol, "solver");
  base.n_starts = detail::get_or<int>(j, "n_starts", base.n_starts, "solver");
  base.strain_floor = detail::get_or<double>(j, "strain_floor", base.strain_floor, "solver");
  base.max_iter = detail::get_or<int>(j, "max_iter", base.max_iter, "solver");
  std::vector<std::string> v;
  if (!(base.grad_tol > 0.0)) v.push_back("solver.grad_tol must be > 0");
  if (base.n_starts < 0) v.push_back("solver.n_starts must be >= 0");
  if (!(base.strain_floor > 0.0)) v.push_back("solver.strain_floor must be > 0");
  if (base.max_iter < 1) v.push_back("solver.max_iter must be >= 1");
  if (!v.empty()) throw ValidationError(std::move(v));
  return base;
}

inline RunConfig config_from_json(const Json& j) {
  detail::require_object(j, "config",
                         {"schema", "name", "distribution", "seed", "z_grid", "z", "schedule", "samples", "L_max", "solver",
                          "chain", "converge", "oracle", "verify"});
  if (detail::get<std::string>(j, "schema", "config") != kSchema)
    throw ValidationError({std::string("config: schema must be '") + kSchema + "'"});
  RunConfig c;
  c.raw = j;
  c.name = detail::get_or<std::string>(j, "name", "run", "config");
  c.distribution = distribution_from_json(detail::get<Json>(j, "distribution", "config"));
  c.seed = detail::get_or<std::uint64_t>(j, "seed", 1, "config");
  c.z_grid = detail::get_or<std::vector<double>>(j, "z_grid", {}, "config");
  if (j.contains("z")) c.z = detail::get<double>(j, "z", "config");
  c.schedule = detail::get_or<std::vector<std::int64_t>>(j, "schedule", c.schedule, "config");
  c.samples = detail::get_or<std::size_t>(j, "samples", c.samples, "config");
  c.L_max = detail::get_or<int>(j, "L_max", c.L_max, "config");
  if (j.contains("solver")) c.solver = solver_from_json(j["solver"]);
  if (j.contains("chain")) {
    const auto& ch = j["chain"];
    detail::require_object(ch, "chain", {"n", "ell", "tolerance"});
    c.chain_n = detail::get_or<std::vector<std::int64_t>>(ch, "n", c.chain_n, "chain");
    if (ch.contains("ell")) c.ell = detail::get<double>(ch, "ell", "chain");
    c.gap_tolerance = detail::get_or<double>(ch, "tolerance", c.gap_tolerance, "chain");
  }
  if (j.contains("converge")) {
    detail::require_object(j["converge"], "converge", {"cauchy_tol"});
    c.cauchy_tol = detail::get_or<double>(j["converge"], "cauchy_tol", c.cauchy_tol, "converge");
  }
  if (j.contains("oracle")) {
    detail::require_object(j["oracle"], "oracle", {"grid_step"});
    c.grid_step = detail::get_or<double>(j["oracle"], "grid_step", c.grid_step, "oracle");
  }
  if (j.contains("verify")) {
    detail::require_object(j["verify"], "verify", {"subadditivity_probes", "ks_seeds", "table_fixture"});
    c.subadditivity_probes = detail::get_or<int>(j["verify"], "subadditivity_probes", c.subadditivity_probes, "verify");
    c.ks_seeds = detail::get_or<std::size_t>(j["verify"], "ks_seeds", c.ks_seeds, "verify");
    if (j["verify"].contains("table_fixture")) {
      const auto& t = j["verify"]["table_fixture"];
      detail::require_object(t, "verify.table_fixture", {"z", "value", "ci"});
      c.table_fixture = t;
    }
  }

  std::vector<std::string> v;
  for (std::size_t k = 1; k < c.z_grid.size(); ++k)
    if (!(c.z_grid[k] > c.z_grid[k - 1])) v.push_back("z_grid must be strictly increasing");
  for (double z : c.z_grid)
    if (!std::isfinite(z)) v.push_back("z_grid entries must be finite");
  if (c.z && !std::isfinite(*c.z)) v.push_back("z must be finite");
  if (c.schedule.size() < 2) v.push_back("schedule needs at least two entries");
  for (std::size_t k = 0; k < c.schedule.size(); ++k) {
    if (c.schedule[k] < 2 * c.distribution.K) v.push_back("schedule entries must be >= 2K");
    if (k > 0 && !(c.schedule[k] > c.schedule[k - 1])) v.push_back("schedule must be increasing");
  }
  if (c.samples < 2) v.push_back("samples must be >= 2");
  if (c.L_max < 0) v.push_back("L_max must be >= 0");
  for (auto n : c.chain_n)
    if (n < 2 * c.distribution.K) v.push_back("chain.n entries must be >= 2K");
  if (c.ell && !(*c.ell > 0.0)) v.push_back("chain.ell must be > 0");
  if (!(c.grid_step > 0.0 && c.grid_step <= 1e-2)) v.push_back("oracle.grid_step must be in (0, 1e-2]");
  if (!v.empty()) throw ValidationError(std::move(v));
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError({"config '" + path + "' is not valid JSON: " + e.what()});
  }
  return config_from_json(j);
}

} // namespace homchain
