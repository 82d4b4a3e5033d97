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

#ifndef WAVELINK_TOOLS_SCENARIOS_HPP_
#define WAVELINK_TOOLS_SCENARIOS_HPP_

#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace wavelink::cli {

inline constexpr const char* kVersion = "0.1.0";

struct Recipe {
  std::string name;
  std::string description;
  /// YAML document shipped under configs/.
  std::string config;
};

/// Shipped recipes sorted by name.
const std::vector<Recipe>& recipes();
const Recipe* find_recipe(const std::string& name);

struct Artifact {
  std::string path;  // relative to the output directory
  std::uintmax_t bytes = 0;
};

struct RunOutcome {
  /// Deterministic for a fixed config and seed (no timings or dates).
  nlohmann::ordered_json summary;
  std::vector<Artifact> files;
};

/// Executes the scenario, writing CSV/JSON artifacts, summary.json and
/// manifest.json into cfg.output_dir. Library errors propagate: callers map
/// ReconstructionError to a reconstruction failure and other library
/// errors to a simulation failure.
RunOutcome run_scenario(const ScenarioConfig& cfg, int workers);

}  // namespace wavelink::cli

#endif  // WAVELINK_TOOLS_SCENARIOS_HPP_
