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

#ifndef WAVELINK_OPTIMIZE_HPP_
#define WAVELINK_OPTIMIZE_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wavelink/cascade.hpp"
#include "wavelink/lindblad.hpp"
#include "wavelink/pulses.hpp"

namespace wavelink {

// ---------------------------------------------------------------------------
// Pulse parameterization and objective
// ---------------------------------------------------------------------------

enum class OptimizationStage { kEmission, kCapture, kJoint };

/// Coupler rate kappa(t) through knots: linear interpolation held constant
/// outside the knot span, clipped at 0, then Gaussian filtered.
struct PulseParameterization {
  std::vector<double> knot_times;
  double kappa_max = 0.6e9;
  /// 0 disables the filter.
  double filter_sigma = 3e-9;
  OptimizationStage stage = OptimizationStage::kEmission;

  /// Number of free values (twice the knot count for kJoint).
  int dimension() const;
  /// Throws ParameterError for bad knots (count outside [3, 24], not
  /// strictly increasing) and InvalidDimension / ParameterError for values
  /// of the wrong length or outside [0, kappa_max].
  void validate() const;
  void validate_values(const std::vector<double>& values) const;
  /// kappa(t) for one knot-value set on the grid.
  PulseShape kappa(const std::vector<double>& knot_values, const TimeGrid& grid) const;
};

/// Evenly spaced knots on [t0 - 12 ns, t0 + 8 ns].
std::vector<double> default_knot_times(int count, double t0 = 2.62e-9);

/// Target wavepacket and simulation window of the transfer being tuned.
struct TransferScenario {
  double kappa_c = 0.5e9;
  double t0 = 2.62e-9;
  double window_before = 30e-9;
  double window_after = 50e-9;
  double step = 0.1e-9;
  SolverOptions solver{};

  TimeGrid grid() const;
  /// sech wavepacket of width 1/kappa_c centred on t0.
  PulseShape target() const;
};

/// Simulated figure of merit for one knot-value vector:
///   kEmission: population of the target mode after release of |1>;
///   kCapture: resonator population after absorbing the target mode;
///   kJoint: run_transfer efficiency with the emitted mode as envelope
///           (values are emission knots followed by capture knots).
/// Simulation failures return 0 and emit a warning.
double objective_transfer(const std::vector<double>& values, const PulseParameterization& params,
                          const TransferScenario& scenario = {});

// ---------------------------------------------------------------------------
// Black-box optimizer
// ---------------------------------------------------------------------------

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static Bounds uniform(int dimension, double lo, double hi);
  int dimension() const { return static_cast<int>(lower.size()); }
  void validate() const;
};

struct OptimizerSettings {
  int budget = 150;
  std::uint64_t seed = 0;
  /// Share of the budget spent in the surrogate phase.
  double surrogate_fraction = 0.7;
  /// Space-filling points before the first surrogate fit; <= 0 picks
  /// max(5, 2 d), capped at a third of the surrogate phase.
  int initial_points = 0;
  int acquisition_candidates = 2000;
  /// Expected-improvement margin, in standardized objective units.
  double xi = 0.01;
  double gp_noise = 1e-6;
  /// Initial Nelder-Mead step as a fraction of each bound range.
  double simplex_step = 0.1;
  /// Threads for the initial design batch.
  int workers = 1;
};

struct EvaluationRecord {
  std::vector<double> params;
  double value = 0.0;
  double wall_time = 0.0;
  /// "initial", "surrogate" or "simplex".
  std::string phase;
  bool ok = true;
};

struct OptimizationReport {
  std::vector<double> best_params;
  double best_value = 0.0;
  /// Phase that produced the best point: "surrogate" (includes the initial
  /// design) or "simplex".
  std::string method;
  std::vector<EvaluationRecord> log;
  OptimizerSettings settings;
  /// Last surrogate length scale (normalized coordinates).
  double length_scale = 0.0;
  int cache_hits = 0;

  std::string to_json() const;
  void write_log_csv(std::ostream& out) const;
};

using Objective = std::function<double(const std::vector<double>&)>;

/// Maximizes `objective` inside `bounds`: Gaussian-process surrogate with
/// expected improvement for surrogate_fraction of the budget, then
/// Nelder-Mead from the incumbent. Repeated points are served from a cache
/// and do not count against the budget. Deterministic for a given seed.
/// Throws ParameterError for budget < 20 and ConvergenceError when no
/// evaluation succeeds.
OptimizationReport optimize_pulse(const Objective& objective, const Bounds& bounds,
                                  const OptimizerSettings& settings = {});

}  // namespace wavelink

#endif  // WAVELINK_OPTIMIZE_HPP_
