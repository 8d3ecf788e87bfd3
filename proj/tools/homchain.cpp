#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "homchain/homchain.hpp"

namespace {

void configure_logging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* lvl = std::getenv("HOMCHAIN_LOG")) {
    const std::string s = lvl;
    if (s == "error") spdlog::set_level(spdlog::level::err);
    else if (s == "warn") spdlog::set_level(spdlog::level::warn);
    else if (s == "info") spdlog::set_level(spdlog::level::info);
    else if (s == "debug") spdlog::set_level(spdlog::level::debug);
    else spdlog::warn("HOMCHAIN_LOG='{}' not recognized; using warn", s);
  }
}

} // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Stochastic homogenization of Lennard-Jones chains"};
  app.require_subcommand(1);

  std::string config_path;
  homchain::CliOptions opts;
  opts.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::uint64_t seed = 0;

  app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", opts.out_dir, "Output directory");
  app.add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
  app.add_flag("--diagnostics", opts.diagnostics, "Write per-candidate solver diagnostics");

  using Cmd = int (*)(const homchain::RunConfig&, const homchain::CliOptions&, std::ostream&);
  const std::vector<std::pair<std::string, std::pair<std::string, Cmd>>> commands = {
      {"tabulate", {"Tabulate J_hom over the config z_grid", homchain::cmd_tabulate}},
      {"converge", {"Convergence traces in N and in the approximation level", homchain::cmd_converge}},
      {"minimize", {"Minimize the chain energy and compare with J_hom(ell)", homchain::cmd_minimize}},
      {"verify", {"Run the invariant battery", homchain::cmd_verify}},
      {"oracle", {"Compare the cell solver with the brute-force oracle", homchain::cmd_oracle}},
  };
  for (const auto& [name, entry] : commands) app.add_subcommand(name, entry.first)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? homchain::kExitOk : homchain::kExitUsage;
  }
  if (*seed_opt) opts.seed = seed;

  try {
    const auto cfg = homchain::load_config(config_path);
    for (const auto& [name, entry] : commands)
      if (app.got_subcommand(name)) return entry.second(cfg, opts, std::cout);
  } catch (const homchain::ValidationError& e) {
    std::cerr << "invalid configuration:\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << '\n';
    return homchain::kExitUsage;
  } catch (const homchain::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return homchain::kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return homchain::kExitUsage;
  }
  return homchain::kExitUsage;
}
