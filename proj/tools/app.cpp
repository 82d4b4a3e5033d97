// Copyright 2026 The wavelink Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "app.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <thread>

#include "CLI11.hpp"
#include "scenarios.hpp"
#include "wavelink/errors.hpp"

namespace wavelink::cli {

namespace {

ScenarioConfig resolve(const std::string& target, const std::vector<std::string>& sets) {
  std::vector<Override> overrides;
  for (const auto& s : sets) overrides.push_back(parse_override(s));
  if (std::filesystem::exists(target)) return load_config(target, overrides);
  if (const Recipe* r = find_recipe(target)) return parse_config(r->config, "recipe " + r->name, overrides);
  throw ConfigError(target + ": no such file or recipe");
}

// Restores the previous warning sink on scope exit.
struct WarningsTo {
  explicit WarningsTo(std::ostream& err) {
    set_warning_handler([&err](const std::string& m) { err << "warning: " << m << '\n'; });
  }
  ~WarningsTo() { set_warning_handler(nullptr); }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"wavelink: simulations of itinerant photon transfer between superconducting nodes"};
  app.require_subcommand(1);

  std::string target;
  std::vector<std::string> sets;
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string output_dir;
  auto* run = app.add_subcommand("run", "Run a scenario config or a shipped recipe");
  run->add_option("config", target, "Config file or recipe name")->required();
  run->add_option("--set", sets, "Override, key=value with a dotted key path");
  run->add_option("--workers", workers, "Worker threads for sweeps")->check(CLI::Range(1, 1024));
  run->add_option("--output-dir", output_dir, "Replaces output_dir from the config");

  std::string show;
  auto* list = app.add_subcommand("recipes", "List shipped recipes");
  list->add_option("--show", show, "Print the config of one recipe");

  auto* validate = app.add_subcommand("validate", "Check a config without running it");
  validate->add_option("config", target, "Config file or recipe name")->required();
  validate->add_option("--set", sets, "Override, key=value with a dotted key path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*list) {
    if (!show.empty()) {
      const Recipe* r = find_recipe(show);
      if (!r) {
        err << "error: unknown recipe '" << show << "'\n";
        return kExitUsage;
      }
      out << r->config;
      return kExitOk;
    }
    std::size_t width = 0;
    for (const auto& r : recipes()) width = std::max(width, r.name.size());
    for (const auto& r : recipes()) out << std::left << std::setw(width + 2) << r.name << r.description << '\n';
    return kExitOk;
  }

  WarningsTo warnings(err);
  ScenarioConfig cfg;
  try {
    cfg = resolve(target, sets);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (*validate) {
    out << "ok: scenario " << scenario_name(cfg.scenario) << '\n';
    return kExitOk;
  }
  if (!output_dir.empty()) cfg.output_dir = output_dir;

  try {
    const RunOutcome r = run_scenario(cfg, workers);
    out << r.summary["results"].dump(2) << '\n';
    out << "wrote " << r.files.size() << " files to " << cfg.output_dir << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ReconstructionError& e) {
    err << "reconstruction failed: " << e.what() << '\n';
    return kExitReconstruction;
  } catch (const Error& e) {
    err << "simulation failed: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace wavelink::cli
