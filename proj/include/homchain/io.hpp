#pragma once

// CSV and JSON outputs. Every file carries the hash of the producing config;
// numbers use the shortest round-trip form with "inf" for +infinity.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "homchain/cell_solver.hpp"
#include "homchain/chain_energy.hpp"
#include "homchain/config.hpp"
#include "homchain/format.hpp"
#include "homchain/homogenized_limit.hpp"

namespace homchain {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline std::string csv_header(const std::string& config_hash, const std::string& columns) {
  return "# config_hash: " + config_hash + "\n" + columns + "\n";
}

inline std::string table_csv(const JhomTable& t, const std::string& config_hash) {
  std::ostringstream os;
  os << csv_header(config_hash, "z,value,ci");
  for (std::size_t k = 0; k < t.size(); ++k)
    os << format_double(t.z_grid[k]) << ',' << format_double(t.values[k]) << ',' << format_double(t.ci[k]) << '\n';
  return os.str();
}

inline Json table_meta_json(const JhomTable& t, const std::string& config_hash) {
  Json j;
  j["schema"] = kSchema;
  j["config_hash"] = config_hash;
  j["spec_hash"] = t.meta.spec_hash;
  j["schedule"] = t.meta.schedule;
  j["samples"] = t.meta.samples;
  j["base_seed"] = t.meta.base_seed;
  j["K"] = t.meta.K;
  j["class"] = to_json(t.meta.cls);
  if (t.meta.mean_delta) j["mean_delta"] = *t.meta.mean_delta;
  if (t.meta.mean_minimum) j["mean_minimum"] = *t.meta.mean_minimum;
  j["timestamp"] = t.meta.timestamp;
  Json notes = Json::array();
  for (std::size_t k = 0; k < t.notes.size(); ++k)
    if (!t.notes[k].empty()) notes.push_back(Json{{"z", t.z_grid[k]}, {"note", t.notes[k]}});
  j["failures"] = notes;
  return j;
}

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

} // namespace detail

// Reads the (z, value, ci) columns; the meta block is left default.
inline JhomTable read_table_csv(const std::string& text) {
  JhomTable t;
  std::istringstream is(text);
  std::string line;
  bool header = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "z,value,ci") throw ValidationError({"table CSV: unexpected header '" + line + "'"});
      header = true;
      continue;
    }
    const auto f = detail::split(line, ',');
    if (f.size() != 3) throw ValidationError({"table CSV: expected 3 fields in '" + line + "'"});
    t.z_grid.push_back(parse_double(f[0]));
    t.values.push_back(parse_double(f[1]));
    t.ci.push_back(parse_double(f[2]));
  }
  t.notes.assign(t.z_grid.size(), "");
  return t;
}

inline std::string trace_csv(const JhomEstimate& e, const std::string& config_hash) {
  std::ostringstream os;
  os << csv_header(config_hash, "N,mean,stderr,samples,wall_ms");
  for (const auto& r : e.trace)
    os << r.N << ',' << format_double(r.mean) << ',' << format_double(r.stderr_mean) << ',' << r.samples << ','
       << format_double(r.wall_ms) << '\n';
  return os.str();
}

inline std::string deformation_csv(const Deformation& u, const std::string& config_hash) {
  std::ostringstream os;
  os << csv_header(config_hash, "i,x,u");
  for (std::int64_t i = 0; i <= u.n; ++i)
    os << i << ',' << format_double(static_cast<double>(i) / static_cast<double>(u.n)) << ','
       << format_double(u.values[i]) << '\n';
  return os.str();
}

inline Json diagnostics_json(const CellDiagnostics& d) {
  Json c = Json::array();
  for (const auto& r : d.candidates) c.push_back(Json{{"name", r.name}, {"value", format_double(r.value)}, {"iterations", r.iterations}});
  return Json{{"winner", d.winner},
              {"start_spread", d.start_spread},
              {"starts_disagree", d.starts_disagree},
              {"candidates", c}};
}

} // namespace homchain
