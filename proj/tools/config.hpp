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

#ifndef WAVELINK_TOOLS_CONFIG_HPP_
#define WAVELINK_TOOLS_CONFIG_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wavelink/circuitmodel.hpp"
#include "wavelink/jc.hpp"

namespace wavelink::cli {

/// Parse or validation problem in a scenario document. what() carries the
/// "<source>:<line>: " prefix when a location is known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { kTransfer, kModes, kEmitRecapture, kNoon, kTomography, kCircuit, kOptimize };

const char* scenario_name(ScenarioKind kind);

/// Evenly spaced values, end points included.
struct Range {
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
  std::vector<double> values() const;
};

struct DeviceConfig {
  /// "ideal" (lossless nodes) or "measured" (tabulated coherence times).
  std::string preset = "ideal";
  NodeDevice node1;
  NodeDevice node2;
};

struct PulseConfig {
  double kappa_c = 0.5e9;    // 1/s
  double kappa_m = 0.6e9;    // 1/s
  double kappa_max = 0.6e9;  // 1/s
  double t0 = 2.62e-9;
  double window_before = 20e-9;
  double window_after = 25e-9;
  double step = 0.1e-9;
  /// Gaussian filter on the release rate; 0 leaves it sharp.
  double filter_sigma = 0.0;
  double line_loss = 0.0;
  double phase_offset = 0.0;
};

struct TransferConfig {
  /// Resonator states to send: "fock:N" or "superposition:N".
  std::vector<std::string> inputs{"fock:1", "superposition:1"};
  int truncation = 2;
  bool calibrate_phase = true;
};

struct ModesConfig {
  int n_modes = 5;
  double fsr = 2 * M_PI * 31e6;   // rad/s
  double g_rw = 2 * M_PI * 1.5e6;  // rad/s
  double mode_t1 = 0.0;            // 0: lossless
  Range detuning{-2 * M_PI * 60e6, 2 * M_PI * 60e6, 121};  // rad/s
  Range hold{0.0, 400e-9, 81};
};

struct EmitRecaptureConfig {
  double pulse_width = 20e-9;
  double kappa = 2 * M_PI * 20e6;  // 1/s
  Range delay{0.0, 100e-9, 11};
  Range detuning{-2 * M_PI * 40e6, 2 * M_PI * 40e6, 161};  // rad/s
  double step = 0.1e-9;
};

struct NoonConfig {
  int n = 1;
  int truncation = 3;
  /// Joint grid points per axis and quadrature extent.
  int grid = 3;
  double extent = 1.2;
  double noise = 0.0;
};

struct TomographyConfig {
  /// |0> + |n> prepared in node 1 and sent to node 2.
  int n = 1;
  int truncation = 4;
  int grid = 9;
  double extent = 2.0;
  double noise = 0.0;
  /// Wigner CSV grid points per axis.
  int wigner_points = 41;
  double wigner_extent = 2.0;
  /// When set, reconstructs this JSON dataset instead of simulating one.
  std::string dataset_file;
};

struct CircuitConfig {
  /// "boxmodes", "anharmonicity", "coupler" or "fsr".
  std::string kind = "boxmodes";
  std::string box = "die";
  circuit::BoxGeometry box_geometry = circuit::BoxGeometry::die();
  int max_index = 3;
  circuit::ResonatorGeometry resonator;
  int points = 200;
  circuit::CouplerParams coupler;
  Range flux{-0.5, 0.5, 201};
  double epsilon_r = 11.4;
  double line_length = 2.0;
};

struct OptimizeConfig {
  std::string stage = "emission";
  int knots = 6;
  int budget = 150;
  double filter_sigma = 3e-9;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::kTransfer;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  DeviceConfig device;
  PulseConfig pulses;
  TransferConfig transfer;
  ModesConfig modes;
  EmitRecaptureConfig emit_recapture;
  NoonConfig noon;
  TomographyConfig tomography;
  CircuitConfig circuit;
  OptimizeConfig optimize;
};

/// key=value with a dotted key path, e.g. "pulses.t0_s=3e-9".
using Override = std::pair<std::string, std::string>;
Override parse_override(const std::string& text);

/// Parses a YAML scenario document. Unknown keys and physical quantities
/// without a unit suffix are rejected; `source` names the document in
/// diagnostics.
ScenarioConfig parse_config(const std::string& text, const std::string& source,
                            const std::vector<Override>& overrides = {});
ScenarioConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});

}  // namespace wavelink::cli

#endif  // WAVELINK_TOOLS_CONFIG_HPP_
