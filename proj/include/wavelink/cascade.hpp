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

#ifndef WAVELINK_CASCADE_HPP_
#define WAVELINK_CASCADE_HPP_

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wavelink/hilbert.hpp"
#include "wavelink/lindblad.hpp"
#include "wavelink/pulses.hpp"

namespace wavelink {

/// Below this remaining (emission) or accumulated (capture) norm the
/// virtual-cavity couplings are clamped to zero.
inline constexpr double kNormEpsilon = 1e-6;

/// One tunable resonator and its coupler to the waveguide.
struct NodeParams {
  /// Resonator truncation N_max.
  int truncation = 5;
  /// Coupler decay rate kappa(t), rad/s.
  Schedule gamma = Schedule::constant(0.0);
  /// Resonator frequency offset in the rotating frame, rad/s.
  double detuning = 0.0;
  /// Energy decay and Ramsey dephasing times, s.
  double t1 = std::numeric_limits<double>::infinity();
  double t2 = std::numeric_limits<double>::infinity();

  /// Checks t1, t2 > 0, t2 <= 2 t1 and nonnegative sampled gamma.
  void validate() const;
  /// Pure-dephasing rate 1/t2' = 1/t2 - 1/(2 t1), 1/s.
  double pure_dephasing_rate() const;
};

enum class Stage { kEmission, kCapture };

/// A single emission or capture stage: node mode c and virtual mode a_u
/// (emission) or a_v (capture).
struct TransferSystem {
  HilbertSpec spec;
  LindbladSystem sys;
  Stage stage;
  std::size_t node_index = 0;
  std::size_t virtual_index = 1;
};

/// Multimode waveguide seen as a comb of standing modes.
struct WaveguideModel {
  int n_modes = 5;
  /// Free spectral range, rad/s.
  double fsr = 2 * M_PI * 31e6;
  /// Frequency of the central mode in the rotating frame, rad/s.
  double mode_center = 0.0;
  /// Resonator-waveguide coupling per mode, rad/s.
  double g_rw = 2 * M_PI * 1.5e6;
  double mode_t1 = std::numeric_limits<double>::infinity();
};

// ---------------------------------------------------------------------------
// Couplings
// ---------------------------------------------------------------------------

/// g_u(t) = u*(t) / sqrt(1 - int_{t_start}^t |u|^2), evaluated on the linear
/// interpolant of u (normalized to unit continuous norm); zero once the
/// remaining norm drops below kNormEpsilon. Requires |sum |u|^2 dt - 1|
/// <= 1e-4.
Schedule emission_coupling(const PulseShape& u);

/// g_v(t) = -v*(t) / sqrt(int_{t_start}^t |v|^2); zero while the
/// accumulated norm is below kNormEpsilon.
Schedule capture_coupling(const PulseShape& v);

/// Stage on the two-mode space {resonator(node.truncation),
/// virtual_cavity(virtual_truncation)}; virtual_truncation < 0 selects the
/// node truncation. The time span is the envelope grid.
TransferSystem build_stage(const NodeParams& node, const PulseShape& envelope, Stage stage,
                           int virtual_truncation = -1);

/// Same stage acting on subsystems `node_index` (resonator) and
/// `virtual_index` (virtual cavity) of a larger layout.
LindbladSystem build_stage_on(const HilbertSpec& spec, std::size_t node_index,
                              std::size_t virtual_index, const NodeParams& node,
                              const PulseShape& envelope, Stage stage);

// ---------------------------------------------------------------------------
// Two-stage transfer
// ---------------------------------------------------------------------------

/// Beamsplitter-type attenuation with transmission 1 - line_loss followed by
/// the phase rotation exp(-i line_phase n).
DensityMatrix apply_line(const DensityMatrix& rho, double line_phase, double line_loss);

/// E = p_capture / p_release. Warns above 1.05 (only possible with noisy
/// inputs).
double transfer_efficiency(double p_release, double p_capture);

enum class TransferRoute {
  /// Process maps restricted to the occupied input subspace, applied blockwise.
  kChannel,
  /// Direct evolution of the full joint state with the virtual mode appended.
  kDirect,
};

struct TransferOptions {
  double line_phase = 0.0;
  double line_loss = 0.0;
  /// Virtual-cavity truncation; < 0 selects the emitter truncation.
  int virtual_truncation = -1;
  SolverOptions solver{};
  /// Number of points in the recorded stage trajectories (0 to skip).
  int trajectory_points = 201;
  TransferRoute route = TransferRoute::kChannel;
};

struct TransferResult {
  DensityMatrix receiver_state;
  /// Virtual-mode state after emission, before the line.
  DensityMatrix emitted_state;
  /// Mean photon number receiver / initial emitter; NaN for vacuum input.
  double efficiency = 0.0;
  /// Observables "n_node" and "n_virtual" on each stage.
  Trajectory emission;
  Trajectory capture;
};

/// Release from `emitter` into the virtual mode u, line hand-off, capture
/// by `receiver` with v = u.
TransferResult run_transfer(const NodeParams& emitter, const NodeParams& receiver,
                            const PulseShape& envelope, const DensityMatrix& rho0_emitter,
                            const TransferOptions& options = {});

/// Transfer between two resonator subsystems of a joint state, leaving all
/// other subsystems as spectators. Returns the joint state on the same
/// layout. The emitter keeps whatever was not released.
DensityMatrix transfer_modes(const DensityMatrix& joint, const HilbertSpec& spec,
                             std::size_t emitter_index, std::size_t receiver_index,
                             const NodeParams& emitter, const NodeParams& receiver,
                             const PulseShape& envelope, const TransferOptions& options = {});

/// Applies a column-stacking superoperator on the given subsystems (in that
/// order) of a joint state; identity on the rest.
Matrix apply_local_superoperator(const Matrix& rho, const HilbertSpec& spec,
                                 const std::vector<std::size_t>& targets, const Matrix& superop);

// ---------------------------------------------------------------------------
// Pulse design helpers
// ---------------------------------------------------------------------------

/// Normalized single-photon mode emitted by a resonator with decay gamma(t)
/// and the given detuning: u ~ sqrt(gamma) exp(-int gamma / 2 - i detuning t).
PulseShape emitted_envelope(const Schedule& gamma, const TimeGrid& grid, double detuning = 0.0);

/// Total emitted probability 1 - exp(-int gamma dt) over the grid.
double emitted_fraction(const Schedule& gamma, const TimeGrid& grid);

/// gamma(t) = |v|^2 / int_{t_start}^t |v|^2, capped at kappa_max; absorbs v
/// without reflection where the cap is inactive.
PulseShape matched_capture_kappa(const PulseShape& v, double kappa_max);

/// Copy of gamma switched off after the time at which the emitted fraction
/// reaches `fraction` (bisection to 1e-4 in fraction).
PulseShape truncate_at_fraction(const PulseShape& gamma, double fraction);

/// Line phase that makes the receiver coherence <0|rho|1> real and positive
/// for a (|0> + |1>)/sqrt(2) input under the given settings.
double calibrate_line_phase(const NodeParams& emitter, const NodeParams& receiver,
                            const PulseShape& envelope, const TransferOptions& options = {});

// ---------------------------------------------------------------------------
// Waveguide scenarios
// ---------------------------------------------------------------------------

/// Matrix of values on a two-axis sweep; values(i, j) belongs to rows[i],
/// cols[j].
struct SweepMap {
  std::string row_label;
  std::string col_label;
  std::vector<double> rows;
  std::vector<double> cols;
  Eigen::MatrixXd values;
};

/// CSV with a header row "<row_label>\<col_label>, col values..." and one row
/// per sweep point of the first axis.
void write_sweep_csv(std::ostream& out, const SweepMap& map);

/// Resonator population after each hold time while coupled to the standing
/// modes at mode_center + k fsr, for each resonator detuning. The state lives
/// in the single-excitation manifold {vacuum, resonator, modes}; `rho0` is a
/// resonator state with support on {|0>, |1>}.
SweepMap simulate_standing_modes(const NodeParams& node, const WaveguideModel& wg,
                                 const std::vector<double>& resonator_detunings,
                                 const std::vector<double>& hold_times, const DensityMatrix& rho0,
                                 const SolverOptions& solver = {});

struct EmitRecaptureSettings {
  /// Coupler rate during release and capture, rad/s.
  PulseShape release_gamma;
  PulseShape capture_gamma;
  /// Virtual mode used for the round trip; defaults to the emitted mode of
  /// release_gamma.
  std::optional<PulseShape> envelope;
  SolverOptions solver{};
};

/// Round trip of (|0> + |1>)/sqrt(2): emission, idle phase exp(i detuning
/// delay) on the single-photon amplitude, capture. Values are the overlap
/// <+|rho|+> with the reference phase fixed at zero detuning.
SweepMap simulate_emit_recapture(const NodeParams& node, const std::vector<double>& delays,
                                 const std::vector<double>& detunings,
                                 const EmitRecaptureSettings& settings);

}  // namespace wavelink

#endif  // WAVELINK_CASCADE_HPP_
