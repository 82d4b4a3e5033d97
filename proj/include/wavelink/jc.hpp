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

#ifndef WAVELINK_JC_HPP_
#define WAVELINK_JC_HPP_

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "wavelink/cascade.hpp"
#include "wavelink/hilbert.hpp"
#include "wavelink/lindblad.hpp"
#include "wavelink/pulses.hpp"

namespace wavelink {

/// Qubit-resonator swap time pi / (2 g sqrt(n)) for the |e, n-1> <-> |g, n>
/// exchange.
double swap_time(int n, double g);

/// One qubit-resonator node.
struct NodeDevice {
  /// Qubit-resonator coupling, rad/s.
  double g_qr = 2 * M_PI * 6.8e6;
  /// Qubit levels (2 or 3); ef operations need 3.
  int qubit_levels = 3;
  /// Resonator truncation N_max.
  int truncation = 4;
  /// Relative ef coupling (transmon ladder: matrix element sqrt(2) ef_ratio).
  double ef_ratio = 1.0;
  double qubit_t1 = std::numeric_limits<double>::infinity();
  double qubit_t2 = std::numeric_limits<double>::infinity();
  double resonator_t1 = std::numeric_limits<double>::infinity();
  double resonator_t2 = std::numeric_limits<double>::infinity();

  void validate() const;
  bool lossless() const;
};

/// Measured coherence of node 1 or 2 of the reference device.
NodeDevice measured_node(int index, int truncation = 4);

/// Qubits and resonators laid out as {q1, r1, q2, r2, ...}.
class NodeLayout {
 public:
  explicit NodeLayout(std::vector<NodeDevice> nodes);

  std::size_t size() const { return nodes_.size(); }
  const NodeDevice& node(std::size_t k) const { return nodes_.at(k); }
  const std::vector<NodeDevice>& nodes() const { return nodes_; }
  const HilbertSpec& spec() const { return spec_; }
  std::size_t qubit_index(std::size_t k) const { return 2 * k; }
  std::size_t resonator_index(std::size_t k) const { return 2 * k + 1; }
  DensityMatrix ground_state() const;

 private:
  std::vector<NodeDevice> nodes_;
  HilbertSpec spec_;
};

struct NodeState {
  NodeLayout layout;
  DensityMatrix rho;

  DensityMatrix qubit(std::size_t k) const;
  DensityMatrix resonator(std::size_t k) const;
  /// Joint state of all resonators in node order.
  DensityMatrix resonators() const;
};

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

enum class Transition { kGE, kEF };

enum class StepKind { kQubitDrive, kSwap, kTransfer, kIdle, kDisplace };

struct SequenceStep {
  StepKind kind = StepKind::kIdle;
  /// Node the step acts on; for transfers, the emitting node.
  int target = 0;
  Transition transition = Transition::kGE;
  /// Rotation angle and axis phase of a qubit drive, rad.
  double angle = 0.0;
  double phase = 0.0;
  /// Swap or idle duration, s.
  double duration = 0.0;
  /// Released fraction of a transfer, in (0, 1].
  double fraction = 1.0;
  /// Transfer receiver; < 0 picks the other node of a two-node layout.
  int receiver = -1;
  Complex alpha = 0.0;

  static SequenceStep drive(int target, Transition tr, double angle, double phase = 0.0);
  static SequenceStep swap(int target, double duration, Transition tr = Transition::kGE);
  static SequenceStep transfer(int emitter, double fraction = 1.0, int receiver = -1);
  static SequenceStep idle(double duration);
  static SequenceStep displace(int target, Complex alpha);

  void validate() const;
  bool operator==(const SequenceStep&) const = default;
};

std::string sequence_to_json(const std::vector<SequenceStep>& steps);
std::vector<SequenceStep> sequence_from_json(const std::string& text);

/// Release-and-catch settings used by transfer steps. The release rate is
/// the logistic kappa_m / (1 + exp(-kappa_c (t - t0))) unless overridden; the
/// receiver rate is matched to the emitted mode and capped at kappa_max.
struct TransferSettings {
  double kappa_c = 0.5e9;
  double kappa_m = 0.6e9;
  double t0 = 2.62e-9;
  /// Simulation window around t0, s.
  double window_before = 20e-9;
  double window_after = 25e-9;
  double step = 0.1e-9;
  std::optional<PulseShape> release_gamma;
  double kappa_max = 0.6e9;
  double line_loss = 0.0;
  /// Added to the calibrated line phase (or used alone when not calibrating).
  double phase_offset = 0.0;
  bool calibrate_phase = true;
  int virtual_truncation = -1;
  SolverOptions solver{};

  PulseShape release() const;
};

struct ExecutionOptions {
  TransferSettings transfer{};
  SolverOptions solver{};
  /// 0 gives instantaneous qubit rotations; otherwise a Gaussian drive of
  /// this standard deviation truncated at +-2 sigma.
  double drive_sigma = 0.0;
};

/// Runs the steps in order on the joint state. Swaps and idles evolve the
/// full layout with every decoherence channel; transfers act on the two
/// resonators and idle the qubits for the transfer window.
NodeState run_sequence(const NodeLayout& layout, const std::vector<SequenceStep>& steps,
                       const DensityMatrix& rho0, const ExecutionOptions& options = {});
NodeState run_sequence(const NodeLayout& layout, const std::vector<SequenceStep>& steps,
                       const ExecutionOptions& options = {});

// ---------------------------------------------------------------------------
// State preparation
// ---------------------------------------------------------------------------

/// n (ge pi, swap tau_0 / sqrt(k)) pairs on one node.
std::vector<SequenceStep> fock_sequence(int n, const NodeDevice& node, int target = 0);
NodeState prepare_fock(int n, const NodeDevice& node, const ExecutionOptions& options = {});

/// Swap durations for |0> + |2>. kDiagram: ef swap tau_0 / sqrt(2) then ge
/// swap tau_0 / sqrt(2). kLongSecond: tau_0 / sqrt(2) then tau_0.
enum class SuperpositionOrdering { kDiagram, kLongSecond };

std::vector<SequenceStep> superposition_sequence(
    int n, const NodeDevice& node, int target = 0,
    SuperpositionOrdering ordering = SuperpositionOrdering::kDiagram);
NodeState prepare_superposition(int n, const NodeDevice& node, const ExecutionOptions& options = {},
                                SuperpositionOrdering ordering = SuperpositionOrdering::kDiagram);

/// (|n0> - |0n>) / sqrt(2) on the two resonators of a two-node layout.
std::vector<SequenceStep> noon_sequence(int n, const NodeLayout& layout);
/// The sign of the target is set through the transfer line phase: with
/// calibration on, phase_offset is shifted by pi for n = 1.
NodeState prepare_noon(int n, const NodeLayout& layout, const ExecutionOptions& options = {});

/// Ideal (|n0> - |0n>) / sqrt(2) on two resonators of the given truncations.
DensityMatrix noon_target(int n, int truncation_1, int truncation_2);

// ---------------------------------------------------------------------------
// Rabi-trace model
// ---------------------------------------------------------------------------

/// P_e(t) = sum_n P_n sin^2(sqrt(n) g t).
std::vector<double> rabi_trace(const std::vector<double>& fock_probs, double g,
                               const std::vector<double>& times);

}  // namespace wavelink

#endif  // WAVELINK_JC_HPP_
