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

#include "wavelink/jc.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

#include "wavelink/errors.hpp"

namespace wavelink {

namespace {

double pure_dephasing(double t1, double t2) {
  if (!std::isfinite(t2)) return 0.0;
  const double r = 1.0 / t2 - (std::isfinite(t1) ? 0.5 / t1 : 0.0);
  return std::max(r, 0.0);
}

void check_coherence(double t1, double t2, const char* what) {
  if (!(t1 > 0.0) || !(t2 > 0.0)) {
    throw ParameterError(std::string(what) + ": t1 and t2 must be positive");
  }
  if (std::isfinite(t2) && t2 > 2.0 * t1 * (1.0 + 1e-12)) {
    throw ParameterError(std::string(what) + ": t2 exceeds 2 t1");
  }
}

// Lowering operator of one qubit transition, with its ladder matrix element.
Matrix transition_lowering(const NodeDevice& node, Transition tr) {
  if (tr == Transition::kGE) return transition(node.qubit_levels, 0, 1);
  if (node.qubit_levels < 3) throw InvalidDimension("ef transition needs a three-level qubit");
  return std::sqrt(2.0) * node.ef_ratio * transition(node.qubit_levels, 1, 2);
}

// cos(phi) X + sin(phi) Y on the transition subspace.
Matrix drive_axis(int levels, Transition tr, double phase) {
  const int lo = tr == Transition::kGE ? 0 : 1;
  if (lo + 1 >= levels) throw InvalidDimension("ef transition needs a three-level qubit");
  const Matrix down = transition(levels, lo, lo + 1);
  const Complex e = std::exp(Complex(0.0, phase));
  return std::conj(e) * down + e * down.adjoint();
}

void add_decoherence(LindbladSystem& sys, const NodeLayout& layout, bool qubits_only) {
  const HilbertSpec& spec = layout.spec();
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const NodeDevice& n = layout.node(k);
    const Matrix b = embed(spec, layout.qubit_index(k), qubit_lowering(n.qubit_levels, n.ef_ratio));
    if (std::isfinite(n.qubit_t1)) sys.add_collapse(b, Schedule::constant(std::sqrt(1.0 / n.qubit_t1)));
    const double qphi = pure_dephasing(n.qubit_t1, n.qubit_t2);
    if (qphi > 0.0) {
      sys.add_collapse(b.adjoint() * b, Schedule::constant(std::sqrt(2.0 * qphi)));
    }
    if (qubits_only) continue;
    const Matrix c = embed(spec, layout.resonator_index(k), annihilation(n.truncation));
    if (std::isfinite(n.resonator_t1)) {
      sys.add_collapse(c, Schedule::constant(std::sqrt(1.0 / n.resonator_t1)));
    }
    const double rphi = pure_dephasing(n.resonator_t1, n.resonator_t2);
    if (rphi > 0.0) {
      sys.add_collapse(c.adjoint() * c, Schedule::constant(std::sqrt(2.0 * rphi)));
    }
  }
}

// Closed system: exact propagator; otherwise the master equation.
Matrix propagate(const LindbladSystem& sys, const Matrix& rho, const SolverOptions& solver) {
  if (sys.collapse_channels().empty() && sys.is_time_independent()) {
    const Matrix u = expm(Complex(0.0, -(sys.t_end() - sys.t_start())) * sys.hamiltonian(sys.t_start()));
    return u * rho * u.adjoint();
  }
  SolverOptions opt = solver;
  opt.store_states = false;
  return evolve_final(sys, DensityMatrix(rho, DensityTolerance::relaxed()), opt).matrix();
}

std::size_t other_node(const NodeLayout& layout, const SequenceStep& s) {
  if (s.receiver >= 0) return static_cast<std::size_t>(s.receiver);
  if (layout.size() != 2) throw ParameterError("transfer: receiver must be given for this layout");
  return s.target == 0 ? 1 : 0;
}

Matrix apply_transfer(const NodeLayout& layout, const SequenceStep& s, const Matrix& rho,
                      const ExecutionOptions& options) {
  const std::size_t e = static_cast<std::size_t>(s.target);
  const std::size_t r = other_node(layout, s);
  if (r >= layout.size() || r == e) throw ParameterError("transfer: invalid receiver node");
  const TransferSettings& ts = options.transfer;
  const PulseShape release = ts.release();
  const PulseShape gamma_e = s.fraction < 1.0 ? truncate_at_fraction(release, s.fraction) : release;
  const PulseShape envelope = emitted_envelope(gamma_e.to_schedule(), release.grid);
  const PulseShape gamma_r = matched_capture_kappa(envelope, ts.kappa_max);

  const NodeDevice& de = layout.node(e);
  const NodeDevice& dr = layout.node(r);
  NodeParams em{de.truncation, gamma_e.to_schedule(), 0.0, de.resonator_t1, de.resonator_t2};
  NodeParams rc{dr.truncation, gamma_r.to_schedule(), 0.0, dr.resonator_t1, dr.resonator_t2};

  TransferOptions opt;
  opt.line_loss = ts.line_loss;
  opt.virtual_truncation = ts.virtual_truncation;
  opt.solver = ts.solver;
  opt.trajectory_points = 0;
  opt.line_phase = ts.phase_offset;
  if (ts.calibrate_phase) {
    NodeParams em1 = em, rc1 = rc;
    em1.truncation = 1;
    rc1.truncation = 1;
    TransferOptions o1 = opt;
    o1.virtual_truncation = 1;
    opt.line_phase += calibrate_line_phase(em1, rc1, envelope, o1);
  }
  DensityMatrix joint(rho, DensityTolerance::relaxed());
  Matrix out = transfer_modes(joint, layout.spec(), layout.resonator_index(e),
                              layout.resonator_index(r), em, rc, envelope, opt)
                   .matrix();

  // Qubits idle while the photon is in flight.
  LindbladSystem idle(layout.spec(), 0.0, release.grid.end() - release.grid.start);
  add_decoherence(idle, layout, true);
  if (!idle.collapse_channels().empty()) out = propagate(idle, out, options.solver);
  return out;
}

Matrix apply_step(const NodeLayout& layout, const SequenceStep& s, const Matrix& rho,
                  const ExecutionOptions& options) {
  const HilbertSpec& spec = layout.spec();
  if (s.kind != StepKind::kIdle && static_cast<std::size_t>(s.target) >= layout.size()) {
    throw ParameterError("sequence step targets a node outside the layout");
  }
  const std::size_t k = static_cast<std::size_t>(s.target);
  switch (s.kind) {
    case StepKind::kQubitDrive: {
      const NodeDevice& n = layout.node(k);
      const Matrix axis = embed(spec, layout.qubit_index(k), drive_axis(n.qubit_levels, s.transition, s.phase));
      if (options.drive_sigma <= 0.0) {
        const Matrix u = expm(Complex(0.0, -0.5 * s.angle) * axis);
        return u * rho * u.adjoint();
      }
      const double sigma = options.drive_sigma;
      const double norm = s.angle / (sigma * std::sqrt(2.0 * M_PI) * std::erf(std::sqrt(2.0)));
      LindbladSystem sys(spec, -2.0 * sigma, 2.0 * sigma);
      sys.add_hamiltonian(axis, Schedule::closed_form("gaussian_drive", {sigma, s.angle},
                                                      [sigma, norm](double t) {
                                                        return Complex(0.5 * norm *
                                                                       std::exp(-0.5 * t * t / (sigma * sigma)));
                                                      }));
      add_decoherence(sys, layout, false);
      SolverOptions opt = options.solver;
      opt.store_states = false;
      return evolve_final(sys, DensityMatrix(rho, DensityTolerance::relaxed()), opt).matrix();
    }
    case StepKind::kSwap: {
      if (s.duration == 0.0) return rho;
      const NodeDevice& n = layout.node(k);
      const Matrix sm = embed(spec, layout.qubit_index(k), transition_lowering(n, s.transition));
      const Matrix cd = embed(spec, layout.resonator_index(k), creation(n.truncation));
      LindbladSystem sys(spec, 0.0, s.duration);
      sys.add_hamiltonian(sm * cd, Schedule::constant(2.0 * n.g_qr));
      add_decoherence(sys, layout, false);
      return propagate(sys, rho, options.solver);
    }
    case StepKind::kIdle: {
      if (s.duration == 0.0) return rho;
      LindbladSystem sys(spec, 0.0, s.duration);
      add_decoherence(sys, layout, false);
      if (sys.collapse_channels().empty()) return rho;
      return propagate(sys, rho, options.solver);
    }
    case StepKind::kDisplace: {
      const Matrix d = embed(spec, layout.resonator_index(k),
                             displacement(s.alpha, layout.node(k).truncation));
      return d * rho * d.adjoint();
    }
    case StepKind::kTransfer:
      return apply_transfer(layout, s, rho, options);
  }
  return rho;
}

const char* kind_name(StepKind k) {
  switch (k) {
    case StepKind::kQubitDrive: return "qubit_drive";
    case StepKind::kSwap: return "swap";
    case StepKind::kTransfer: return "transfer";
    case StepKind::kIdle: return "idle";
    case StepKind::kDisplace: return "displace";
  }
  return "";
}

}  // namespace

double swap_time(int n, double g) {
  if (n < 1) throw ParameterError("swap_time: photon number must be >= 1");
  if (!(g > 0.0)) throw ParameterError("swap_time: coupling must be positive");
  return M_PI / (2.0 * g * std::sqrt(static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// Devices and layouts
// ---------------------------------------------------------------------------

void NodeDevice::validate() const {
  if (!(g_qr > 0.0)) throw ParameterError("node: g_qr must be positive");
  if (qubit_levels != 2 && qubit_levels != 3) throw InvalidDimension("node: qubit levels must be 2 or 3");
  if (truncation < 1) throw InvalidDimension("node: resonator truncation must be >= 1");
  if (!(ef_ratio > 0.0)) throw ParameterError("node: ef_ratio must be positive");
  check_coherence(qubit_t1, qubit_t2, "node qubit");
  check_coherence(resonator_t1, resonator_t2, "node resonator");
}

bool NodeDevice::lossless() const {
  return !std::isfinite(qubit_t1) && !std::isfinite(qubit_t2) && !std::isfinite(resonator_t1) &&
         !std::isfinite(resonator_t2);
}

NodeDevice measured_node(int index, int truncation) {
  NodeDevice n;
  n.truncation = truncation;
  if (index == 1) {
    n.g_qr = 2 * M_PI * 6.805e6;
    n.qubit_t1 = 20e-6;
    n.qubit_t2 = 2.62e-6;
    n.resonator_t1 = 4.57e-6;
    n.resonator_t2 = 0.95e-6;
  } else if (index == 2) {
    n.g_qr = 2 * M_PI * 6.830e6;
    n.qubit_t1 = 22e-6;
    n.qubit_t2 = 0.56e-6;
    n.resonator_t1 = 0.86e-6;
    n.resonator_t2 = 0.90e-6;
  } else {
    throw ParameterError("measured_node: index must be 1 or 2");
  }
  return n;
}

NodeLayout::NodeLayout(std::vector<NodeDevice> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw InvalidDimension("NodeLayout: at least one node");
  std::vector<Subsystem> subs;
  for (const auto& n : nodes_) {
    n.validate();
    subs.push_back(Subsystem::qubit(n.qubit_levels));
    subs.push_back(Subsystem::resonator(n.truncation));
  }
  spec_ = HilbertSpec(std::move(subs));
}

DensityMatrix NodeLayout::ground_state() const {
  return DensityMatrix::basis(spec_.total_dim(), 0);
}

DensityMatrix NodeState::qubit(std::size_t k) const {
  return partial_trace(rho, layout.spec(), {layout.qubit_index(k)});
}

DensityMatrix NodeState::resonator(std::size_t k) const {
  return partial_trace(rho, layout.spec(), {layout.resonator_index(k)});
}

DensityMatrix NodeState::resonators() const {
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < layout.size(); ++k) keep.push_back(layout.resonator_index(k));
  return partial_trace(rho, layout.spec(), std::span<const std::size_t>(keep));
}

// ---------------------------------------------------------------------------
// Steps
// ---------------------------------------------------------------------------

SequenceStep SequenceStep::drive(int target, Transition tr, double angle, double phase) {
  SequenceStep s;
  s.kind = StepKind::kQubitDrive;
  s.target = target;
  s.transition = tr;
  s.angle = angle;
  s.phase = phase;
  return s;
}

SequenceStep SequenceStep::swap(int target, double duration, Transition tr) {
  SequenceStep s;
  s.kind = StepKind::kSwap;
  s.target = target;
  s.duration = duration;
  s.transition = tr;
  return s;
}

SequenceStep SequenceStep::transfer(int emitter, double fraction, int receiver) {
  SequenceStep s;
  s.kind = StepKind::kTransfer;
  s.target = emitter;
  s.fraction = fraction;
  s.receiver = receiver;
  return s;
}

SequenceStep SequenceStep::idle(double duration) {
  SequenceStep s;
  s.kind = StepKind::kIdle;
  s.duration = duration;
  return s;
}

SequenceStep SequenceStep::displace(int target, Complex alpha) {
  SequenceStep s;
  s.kind = StepKind::kDisplace;
  s.target = target;
  s.alpha = alpha;
  return s;
}

void SequenceStep::validate() const {
  if (target < 0) throw ParameterError("sequence step: negative target");
  if (!(duration >= 0.0)) throw ParameterError("sequence step: negative duration");
  if (kind == StepKind::kTransfer && !(fraction > 0.0 && fraction <= 1.0)) {
    throw ParameterError("sequence step: transfer fraction must lie in (0, 1]");
  }
}

std::string sequence_to_json(const std::vector<SequenceStep>& steps) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& s : steps) {
    nlohmann::ordered_json j;
    j["kind"] = kind_name(s.kind);
    j["target"] = s.target;
    switch (s.kind) {
      case StepKind::kQubitDrive:
        j["transition"] = s.transition == Transition::kGE ? "ge" : "ef";
        j["angle"] = s.angle;
        j["phase"] = s.phase;
        break;
      case StepKind::kSwap:
        j["transition"] = s.transition == Transition::kGE ? "ge" : "ef";
        j["duration"] = s.duration;
        break;
      case StepKind::kTransfer:
        j["fraction"] = s.fraction;
        j["receiver"] = s.receiver;
        break;
      case StepKind::kIdle:
        j["duration"] = s.duration;
        break;
      case StepKind::kDisplace:
        j["alpha"] = {s.alpha.real(), s.alpha.imag()};
        break;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::vector<SequenceStep> sequence_from_json(const std::string& text) {
  nlohmann::json arr;
  try {
    arr = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("sequence JSON: ") + e.what());
  }
  if (!arr.is_array()) throw ParameterError("sequence JSON: expected a list of steps");
  std::vector<SequenceStep> out;
  try {
    for (const auto& j : arr) {
      const std::string kind = j.at("kind").get<std::string>();
      const int target = j.value("target", 0);
      auto tr = [&] {
        const std::string t = j.value("transition", std::string("ge"));
        if (t == "ge") return Transition::kGE;
        if (t == "ef") return Transition::kEF;
        throw ParameterError("sequence JSON: unknown transition '" + t + "'");
      };
      SequenceStep s;
      if (kind == "qubit_drive") {
        s = SequenceStep::drive(target, tr(), j.at("angle").get<double>(), j.value("phase", 0.0));
      } else if (kind == "swap") {
        s = SequenceStep::swap(target, j.at("duration").get<double>(), tr());
      } else if (kind == "transfer") {
        s = SequenceStep::transfer(target, j.value("fraction", 1.0), j.value("receiver", -1));
      } else if (kind == "idle") {
        s = SequenceStep::idle(j.at("duration").get<double>());
        s.target = target;
      } else if (kind == "displace") {
        const auto& a = j.at("alpha");
        s = SequenceStep::displace(target, Complex(a.at(0).get<double>(), a.at(1).get<double>()));
      } else {
        throw ParameterError("sequence JSON: unknown step kind '" + kind + "'");
      }
      s.validate();
      out.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("sequence JSON: ") + e.what());
  }
  return out;
}

PulseShape TransferSettings::release() const {
  if (release_gamma) return *release_gamma;
  if (!(window_before > 0.0) || !(window_after > 0.0) || !(step > 0.0)) {
    throw ParameterError("transfer settings: window and step must be positive");
  }
  const TimeGrid grid = TimeGrid::spanning(t0 - window_before, t0 + window_after, step);
  return optimal_release_kappa(kappa_c, kappa_m, t0, grid);
}

NodeState run_sequence(const NodeLayout& layout, const std::vector<SequenceStep>& steps,
                       const DensityMatrix& rho0, const ExecutionOptions& options) {
  if (rho0.dim() != layout.spec().total_dim()) {
    throw InvalidDimension("run_sequence: initial state does not match the layout");
  }
  Matrix rho = rho0.matrix();
  for (const auto& s : steps) {
    s.validate();
    rho = apply_step(layout, s, rho, options);
  }
  return NodeState{layout, DensityMatrix(project_to_density(rho), DensityTolerance::relaxed())};
}

NodeState run_sequence(const NodeLayout& layout, const std::vector<SequenceStep>& steps,
                       const ExecutionOptions& options) {
  return run_sequence(layout, steps, layout.ground_state(), options);
}

// ---------------------------------------------------------------------------
// Preparation
// ---------------------------------------------------------------------------

std::vector<SequenceStep> fock_sequence(int n, const NodeDevice& node, int target) {
  if (n < 0) throw ParameterError("fock_sequence: negative photon number");
  if (n > node.truncation - 1) {
    throw InvalidDimension("fock_sequence: photon number exceeds truncation - 1");
  }
  std::vector<SequenceStep> steps;
  for (int k = 1; k <= n; ++k) {
    steps.push_back(SequenceStep::drive(target, Transition::kGE, M_PI));
    steps.push_back(SequenceStep::swap(target, swap_time(k, node.g_qr)));
  }
  return steps;
}

NodeState prepare_fock(int n, const NodeDevice& node, const ExecutionOptions& options) {
  NodeLayout layout({node});
  return run_sequence(layout, fock_sequence(n, node), options);
}

std::vector<SequenceStep> superposition_sequence(int n, const NodeDevice& node, int target,
                                                 SuperpositionOrdering ordering) {
  const double tau0 = swap_time(1, node.g_qr);
  std::vector<SequenceStep> steps;
  if (n == 1) {
    // Phase pi on the pi/2 pulse cancels the two -i factors of drive and swap.
    steps.push_back(SequenceStep::drive(target, Transition::kGE, M_PI / 2, M_PI));
    steps.push_back(SequenceStep::swap(target, tau0));
  } else if (n == 2) {
    if (node.qubit_levels < 3) throw InvalidDimension("superposition n = 2 needs a three-level qubit");
    if (node.truncation < 2) throw InvalidDimension("superposition n = 2 needs truncation >= 2");
    steps.push_back(SequenceStep::drive(target, Transition::kGE, M_PI / 2));
    steps.push_back(SequenceStep::drive(target, Transition::kEF, M_PI));
    steps.push_back(SequenceStep::swap(target, tau0 / std::sqrt(2.0), Transition::kEF));
    const double second = ordering == SuperpositionOrdering::kDiagram ? tau0 / std::sqrt(2.0) : tau0;
    steps.push_back(SequenceStep::swap(target, second, Transition::kGE));
  } else {
    throw ParameterError("superposition: n must be 1 or 2");
  }
  return steps;
}

NodeState prepare_superposition(int n, const NodeDevice& node, const ExecutionOptions& options,
                                SuperpositionOrdering ordering) {
  NodeLayout layout({node});
  return run_sequence(layout, superposition_sequence(n, node, 0, ordering), options);
}

std::vector<SequenceStep> noon_sequence(int n, const NodeLayout& layout) {
  if (layout.size() != 2) throw InvalidDimension("noon: needs a two-node layout");
  if (n != 1 && n != 2) throw ParameterError("noon: n must be 1 or 2");
  for (const auto& d : layout.nodes()) {
    if (d.truncation < n) throw InvalidDimension("noon: resonator truncation below n");
  }
  std::vector<SequenceStep> steps;
  const NodeDevice& a = layout.node(0);
  const NodeDevice& b = layout.node(1);
  if (n == 1) {
    steps.push_back(SequenceStep::drive(0, Transition::kGE, M_PI));
    steps.push_back(SequenceStep::swap(0, swap_time(1, a.g_qr)));
    steps.push_back(SequenceStep::transfer(0, 0.5, 1));
    return steps;
  }
  if (a.qubit_levels < 3 || b.qubit_levels < 3) throw InvalidDimension("noon n = 2 needs three-level qubits");
  // Qubit Bell state (|eg> - |ge>)/sqrt(2) through R1 -> R2.
  steps.push_back(SequenceStep::drive(0, Transition::kGE, M_PI));
  steps.push_back(SequenceStep::swap(0, 0.5 * swap_time(1, a.g_qr)));
  steps.push_back(SequenceStep::transfer(0, 1.0, 1));
  steps.push_back(SequenceStep::swap(1, swap_time(1, b.g_qr)));
  for (int k = 0; k < 2; ++k) steps.push_back(SequenceStep::drive(k, Transition::kEF, M_PI));
  for (int k = 0; k < 2; ++k) {
    const double tau0 = swap_time(1, layout.node(k).g_qr);
    steps.push_back(SequenceStep::swap(k, tau0 / std::sqrt(2.0), Transition::kEF));
    steps.push_back(SequenceStep::swap(k, tau0 / std::sqrt(2.0), Transition::kGE));
  }
  return steps;
}

NodeState prepare_noon(int n, const NodeLayout& layout, const ExecutionOptions& options) {
  const auto steps = noon_sequence(n, layout);
  ExecutionOptions opt = options;
  if (n == 1 && opt.transfer.calibrate_phase) opt.transfer.phase_offset += M_PI;
  return run_sequence(layout, steps, opt);
}

DensityMatrix noon_target(int n, int truncation_1, int truncation_2) {
  if (n < 1 || n > truncation_1 || n > truncation_2) throw InvalidDimension("noon_target: n out of range");
  HilbertSpec spec{Subsystem::resonator(truncation_1), Subsystem::resonator(truncation_2)};
  Vector psi = (product_ket(spec, {n, 0}) - product_ket(spec, {0, n})) / std::sqrt(2.0);
  return DensityMatrix::pure(psi);
}

std::vector<double> rabi_trace(const std::vector<double>& fock_probs, double g,
                               const std::vector<double>& times) {
  if (!(g > 0.0)) throw ParameterError("rabi_trace: coupling must be positive");
  double total = 0.0;
  for (double p : fock_probs) {
    if (!(p >= 0.0)) throw ParameterError("rabi_trace: negative Fock probability");
    total += p;
  }
  if (total > 1.0 + 1e-6) throw ParameterError("rabi_trace: probabilities sum above 1");
  std::vector<double> out(times.size(), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    double pe = 0.0;
    for (std::size_t n = 1; n < fock_probs.size(); ++n) {
      const double s = std::sin(std::sqrt(static_cast<double>(n)) * g * times[i]);
      pe += fock_probs[n] * s * s;
    }
    out[i] = pe;
  }
  return out;
}

}  // namespace wavelink
