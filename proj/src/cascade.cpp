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

#include "wavelink/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "wavelink/errors.hpp"

namespace wavelink {

// ---------------------------------------------------------------------------
// NodeParams
// ---------------------------------------------------------------------------

void NodeParams::validate() const {
  if (truncation < 1) throw InvalidDimension("node truncation must be >= 1");
  if (!(t1 > 0.0) || !(t2 > 0.0)) throw ParameterError("node t1 and t2 must be positive");
  if (std::isfinite(t2) && t2 > 2.0 * t1 * (1.0 + 1e-12)) {
    throw ParameterError("node t2 exceeds 2 t1 (negative pure dephasing)");
  }
  if (gamma.kind() == Schedule::Kind::kConstant) {
    if (gamma(0.0).real() < 0.0) throw ParameterError("coupler rate gamma must be nonnegative");
  } else if (gamma.kind() == Schedule::Kind::kSampled) {
    for (const auto& g : gamma.samples()) {
      if (g.real() < 0.0) throw ParameterError("coupler rate gamma must be nonnegative");
    }
  }
}

double NodeParams::pure_dephasing_rate() const {
  const double rate = (std::isfinite(t2) ? 1.0 / t2 : 0.0) - (std::isfinite(t1) ? 0.5 / t1 : 0.0);
  return std::max(rate, 0.0);
}

// ---------------------------------------------------------------------------
// Envelope integrals on the linear interpolant
// ---------------------------------------------------------------------------

namespace {

// Linear interpolant of an envelope, rescaled to unit continuous norm, with
// exact running integrals of |u|^2.
class EnvelopeIntegral {
 public:
  explicit EnvelopeIntegral(const PulseShape& u) : grid_(u.grid), v_(u.values) {
    const std::size_t n = v_.size();
    cum_.assign(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) cum_[i] = cum_[i - 1] + segment(i - 1, 1.0);
    const double total = cum_.back();
    if (!(total > 0.0)) throw ParameterError("envelope has zero norm");
    const double scale = 1.0 / std::sqrt(total);
    for (auto& x : v_) x *= scale;
    for (auto& c : cum_) c /= total;
  }

  Complex value(double t) const {
    if (v_.size() == 1 || t <= grid_.start) return v_.front();
    const double x = (t - grid_.start) / grid_.step;
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= v_.size()) return v_.back();
    const double f = x - static_cast<double>(i);
    return v_[i] + f * (v_[i + 1] - v_[i]);
  }

  // int_{start}^{t} |u|^2, in [0, 1].
  double integral(double t) const {
    if (v_.size() == 1 || t <= grid_.start) return 0.0;
    const double x = (t - grid_.start) / grid_.step;
    const auto i = static_cast<std::size_t>(x);
    if (i + 1 >= v_.size()) return 1.0;
    return std::min(1.0, cum_[i] + segment(i, x - static_cast<double>(i)));
  }

 private:
  // int_0^f |a + (b - a) s|^2 ds * dt on segment i.
  double segment(std::size_t i, double f) const {
    const Complex a = v_[i];
    const Complex d = v_[i + 1] - v_[i];
    return grid_.step *
           (std::norm(a) * f + std::real(std::conj(a) * d) * f * f + std::norm(d) * f * f * f / 3.0);
  }

  TimeGrid grid_;
  std::vector<Complex> v_;
  std::vector<double> cum_;
};

void check_envelope_norm(const PulseShape& u, const char* who) {
  const double n = u.norm();
  if (std::abs(n - 1.0) > 1e-4) {
    std::ostringstream msg;
    msg << who << ": envelope norm " << n << " differs from 1 by more than 1e-4";
    throw ParameterError(msg.str());
  }
}

Schedule sqrt_schedule(const Schedule& gamma) {
  if (gamma.is_constant()) return Schedule::constant(std::sqrt(std::max(gamma(0.0).real(), 0.0)));
  return Schedule::closed_form(
      "sqrt_gamma", {}, [gamma](double t) { return Complex(std::sqrt(std::max(gamma(t).real(), 0.0))); },
      gamma.sample_step());
}

}  // namespace

Schedule emission_coupling(const PulseShape& u) {
  check_envelope_norm(u, "emission_coupling");
  auto env = std::make_shared<const EnvelopeIntegral>(u);
  // The virtual cavity absorbs u, so the weight is the norm already emitted.
  return Schedule::closed_form(
      "emission_coupling", {},
      [env](double t) -> Complex {
        const double accumulated = env->integral(t);
        if (accumulated < kNormEpsilon) return 0.0;
        return std::conj(env->value(t)) / std::sqrt(accumulated);
      },
      u.grid.step);
}

Schedule capture_coupling(const PulseShape& v) {
  check_envelope_norm(v, "capture_coupling");
  auto env = std::make_shared<const EnvelopeIntegral>(v);
  // The virtual cavity releases v, so the weight is the norm still inside it.
  return Schedule::closed_form(
      "capture_coupling", {},
      [env](double t) -> Complex {
        const double remaining = 1.0 - env->integral(t);
        if (remaining < kNormEpsilon) return 0.0;
        return -std::conj(env->value(t)) / std::sqrt(remaining);
      },
      v.grid.step);
}

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

LindbladSystem build_stage_on(const HilbertSpec& spec, std::size_t node_index,
                              std::size_t virtual_index, const NodeParams& node,
                              const PulseShape& envelope, Stage stage) {
  node.validate();
  if (node_index >= spec.size() || virtual_index >= spec.size() || node_index == virtual_index) {
    throw InvalidDimension("build_stage: invalid subsystem indices");
  }
  if (!spec[node_index].is_bosonic() || !spec[virtual_index].is_bosonic()) {
    throw InvalidDimension("build_stage: node and virtual subsystems must be bosonic");
  }
  const Matrix c = embed(spec, node_index, annihilation(spec[node_index].n_max()));
  const Matrix a = embed(spec, virtual_index, annihilation(spec[virtual_index].n_max()));

  LindbladSystem sys(spec, envelope.grid.start, envelope.grid.end());
  const Schedule sqrt_gamma = sqrt_schedule(node.gamma);

  CollapseChannel l0;
  l0.label = stage == Stage::kEmission ? "L0_emission" : "L0_capture";
  l0.parts.push_back({c, sqrt_gamma});
  // Cascaded-systems form H = (1/2i)(L_out^dag L_in - h.c.), i.e.
  // H = -(i/2)(sqrt(gamma) g_u* a_u^dag c + sqrt(gamma) g_v c^dag a_v - h.c.).
  if (stage == Stage::kEmission) {
    const Schedule g_u = emission_coupling(envelope);
    sys.add_hamiltonian(a.adjoint() * c, sqrt_gamma * g_u.conjugated().scaled(-kI));
    l0.parts.push_back({a, g_u});
  } else {
    const Schedule g_v = capture_coupling(envelope);
    sys.add_hamiltonian(c.adjoint() * a, sqrt_gamma * g_v.scaled(-kI));
    l0.parts.push_back({a, g_v});
  }
  sys.add_collapse(std::move(l0));

  if (node.detuning != 0.0) {
    sys.add_hamiltonian(c.adjoint() * c, Schedule::constant(node.detuning));
  }
  if (std::isfinite(node.t1)) {
    sys.add_collapse(c, Schedule::constant(std::sqrt(1.0 / node.t1)), "loss");
  }
  const double gphi = node.pure_dephasing_rate();
  if (gphi > 0.0) {
    sys.add_collapse(c.adjoint() * c, Schedule::constant(std::sqrt(2.0 * gphi)), "dephasing");
  }
  return sys;
}

TransferSystem build_stage(const NodeParams& node, const PulseShape& envelope, Stage stage,
                           int virtual_truncation) {
  const int nv = virtual_truncation < 0 ? node.truncation : virtual_truncation;
  HilbertSpec spec{Subsystem::resonator(node.truncation), Subsystem::virtual_cavity(nv)};
  LindbladSystem sys = build_stage_on(spec, 0, 1, node, envelope, stage);
  return TransferSystem{spec, std::move(sys), stage, 0, 1};
}

// ---------------------------------------------------------------------------
// Line and efficiency
// ---------------------------------------------------------------------------

namespace {

double binomial(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

Matrix line_superoperator(int dim, double line_phase, double line_loss) {
  if (!(line_loss >= 0.0 && line_loss <= 1.0)) {
    throw ParameterError("line_loss must lie in [0, 1]");
  }
  const double eta = 1.0 - line_loss;
  Matrix phase = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) phase(n, n) = std::exp(Complex(0.0, -line_phase * n));
  Matrix s = Matrix::Zero(dim * dim, dim * dim);
  for (int k = 0; k < dim; ++k) {
    Matrix kraus = Matrix::Zero(dim, dim);
    for (int n = k; n < dim; ++n) {
      const double amp = std::sqrt(binomial(n, k) * std::pow(eta, n - k) * std::pow(1.0 - eta, k));
      kraus(n - k, n) = amp;
    }
    const Matrix op = phase * kraus;
    s += tensor({op.conjugate().eval(), op});
  }
  return s;
}

std::vector<double> trajectory_times(const TimeGrid& grid, int points) {
  if (points < 2) return {grid.end()};
  std::vector<double> t(points);
  for (int i = 0; i < points; ++i) {
    t[i] = grid.start + (grid.end() - grid.start) * i / (points - 1);
  }
  t.back() = grid.end();
  return t;
}

}  // namespace

DensityMatrix apply_line(const DensityMatrix& rho, double line_phase, double line_loss) {
  const Matrix s = line_superoperator(rho.dim(), line_phase, line_loss);
  return DensityMatrix(apply_superoperator(s, rho.matrix()), DensityTolerance::relaxed());
}

double transfer_efficiency(double p_release, double p_capture) {
  if (!(p_release > 0.0)) throw ParameterError("transfer_efficiency: p_release must be positive");
  const double e = p_capture / p_release;
  if (e > 1.05) {
    std::ostringstream msg;
    msg << "transfer efficiency " << e << " exceeds 1.05; inputs are likely noisy";
    warn(msg.str());
  }
  return e;
}

// ---------------------------------------------------------------------------
// Transfers
// ---------------------------------------------------------------------------

TransferResult run_transfer(const NodeParams& emitter, const NodeParams& receiver,
                            const PulseShape& envelope, const DensityMatrix& rho0_emitter,
                            const TransferOptions& options) {
  if (rho0_emitter.dim() != emitter.truncation + 1) {
    throw InvalidDimension("run_transfer: initial state does not match the emitter truncation");
  }
  if (!(options.line_loss >= 0.0 && options.line_loss <= 1.0)) {
    throw ParameterError("run_transfer: line_loss must lie in [0, 1]");
  }
  const int nv = options.virtual_truncation < 0 ? emitter.truncation : options.virtual_truncation;
  const auto times = trajectory_times(envelope.grid, options.trajectory_points);
  SolverOptions solver = options.solver;
  solver.store_states = false;

  // Stage 1: emission into the virtual mode u.
  TransferSystem emit = build_stage(emitter, envelope, Stage::kEmission, nv);
  const Matrix n_c1 = embed(emit.spec, 0, number_operator(emitter.truncation));
  const Matrix n_u = embed(emit.spec, 1, number_operator(nv));
  DensityMatrix joint1 = product_state({rho0_emitter, DensityMatrix::basis(nv + 1, 0)});
  Trajectory t1 = evolve(emit.sys, joint1, times, solver, {{"n_node", n_c1}, {"n_virtual", n_u}});
  DensityMatrix emitted = partial_trace(t1.final_state(), emit.spec, {1});

  // Line hand-off: u becomes the incoming mode v.
  DensityMatrix incoming = apply_line(emitted, options.line_phase, options.line_loss);

  // Stage 2: capture of v.
  TransferSystem cap = build_stage(receiver, envelope, Stage::kCapture, nv);
  const Matrix n_c2 = embed(cap.spec, 0, number_operator(receiver.truncation));
  const Matrix n_v = embed(cap.spec, 1, number_operator(nv));
  DensityMatrix joint2 = product_state({DensityMatrix::basis(receiver.truncation + 1, 0), incoming});
  Trajectory t2 = evolve(cap.sys, joint2, times, solver, {{"n_node", n_c2}, {"n_virtual", n_v}});
  DensityMatrix received = partial_trace(t2.final_state(), cap.spec, {0});

  const double n_in = rho0_emitter.expectation(number_operator(emitter.truncation));
  const double n_out = received.expectation(number_operator(receiver.truncation));
  const double eff =
      n_in > 1e-12 ? transfer_efficiency(n_in, n_out) : std::numeric_limits<double>::quiet_NaN();
  return TransferResult{received, emitted, eff, std::move(t1), std::move(t2)};
}

Matrix apply_local_superoperator(const Matrix& rho, const HilbertSpec& spec,
                                 const std::vector<std::size_t>& targets, const Matrix& superop) {
  const int total = spec.total_dim();
  if (rho.rows() != total || rho.cols() != total) {
    throw InvalidDimension("apply_local_superoperator: state does not match the layout");
  }
  std::vector<bool> is_target(spec.size(), false);
  int dt = 1;
  for (std::size_t k : targets) {
    if (k >= spec.size() || is_target[k]) {
      throw InvalidDimension("apply_local_superoperator: invalid target list");
    }
    is_target[k] = true;
    dt *= spec.dim(k);
  }
  if (superop.rows() != dt * dt || superop.cols() != dt * dt) {
    throw InvalidDimension("apply_local_superoperator: superoperator dimension mismatch");
  }
  // Reorder so that target levels are the fastest-running index.
  std::vector<int> pos(total);
  for (int f = 0; f < total; ++f) {
    const auto levels = spec.levels_of(f);
    int t = 0, r = 0;
    for (std::size_t k : targets) t = t * spec.dim(k) + levels[k];
    for (std::size_t k = 0; k < spec.size(); ++k) {
      if (!is_target[k]) r = r * spec.dim(k) + levels[k];
    }
    pos[f] = r * dt + t;
  }
  Matrix permuted(total, total);
  for (int j = 0; j < total; ++j)
    for (int i = 0; i < total; ++i) permuted(pos[i], pos[j]) = rho(i, j);

  const int blocks = total / dt;
  Matrix block(dt, dt);
  for (int b = 0; b < blocks; ++b) {
    for (int a = 0; a < blocks; ++a) {
      block = permuted.block(a * dt, b * dt, dt, dt);
      if (block.cwiseAbs().maxCoeff() == 0.0) continue;
      permuted.block(a * dt, b * dt, dt, dt) = apply_superoperator(superop, block);
    }
  }
  Matrix out(total, total);
  for (int j = 0; j < total; ++j)
    for (int i = 0; i < total; ++i) out(i, j) = permuted(pos[i], pos[j]);
  return out;
}

namespace {

// Process map of `sys` with only the columns for inputs |i><j|, i, j in
// `support`, computed; other columns are zero.
Matrix restricted_process_map(const LindbladSystem& sys, const std::vector<int>& support,
                              const SolverOptions& options) {
  const int d = sys.dim();
  std::vector<Matrix> inputs;
  std::vector<int> columns;
  for (int j : support)
    for (int i : support) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      inputs.push_back(std::move(e));
      columns.push_back(i + j * d);
    }
  const auto out = evolve_matrices(sys, inputs, sys.t_start(), sys.t_end(), options);
  Matrix s = Matrix::Zero(d * d, d * d);
  for (std::size_t k = 0; k < out.size(); ++k) {
    s.col(columns[k]) = Eigen::Map<const Vector>(out[k].data(), d * d);
  }
  return s;
}

// Product-basis indices of the target subsystems with nonzero population.
std::vector<int> occupied_levels(const DensityMatrix& rho, const HilbertSpec& spec,
                                 const std::vector<std::size_t>& targets) {
  DensityMatrix reduced = partial_trace(rho, spec, std::span<const std::size_t>(targets));
  std::vector<int> support;
  for (int k = 0; k < reduced.dim(); ++k) {
    if (reduced(k, k).real() > 1e-14) support.push_back(k);
  }
  return support;
}

}  // namespace

DensityMatrix transfer_modes(const DensityMatrix& joint, const HilbertSpec& spec,
                             std::size_t emitter_index, std::size_t receiver_index,
                             const NodeParams& emitter, const NodeParams& receiver,
                             const PulseShape& envelope, const TransferOptions& options) {
  if (joint.dim() != spec.total_dim()) {
    throw InvalidDimension("transfer_modes: state does not match the layout");
  }
  if (emitter_index >= spec.size() || receiver_index >= spec.size() ||
      emitter_index == receiver_index || !spec[emitter_index].is_bosonic() ||
      !spec[receiver_index].is_bosonic()) {
    throw InvalidDimension("transfer_modes: emitter and receiver must be distinct bosonic modes");
  }
  // Truncations come from the layout.
  NodeParams em = emitter, rc = receiver;
  em.truncation = spec[emitter_index].n_max();
  rc.truncation = spec[receiver_index].n_max();
  const int nv = options.virtual_truncation < 0 ? em.truncation : options.virtual_truncation;

  const HilbertSpec ext = spec.appended(Subsystem::virtual_cavity(nv));
  const std::size_t u = spec.size();
  Matrix rho = tensor({joint.matrix(), DensityMatrix::basis(nv + 1, 0).matrix()});
  const Matrix line = line_superoperator(nv + 1, options.line_phase, options.line_loss);
  SolverOptions solver = options.solver;
  solver.store_states = false;

  std::vector<std::size_t> keep(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) keep[k] = k;

  if (options.route == TransferRoute::kDirect) {
    LindbladSystem emit = build_stage_on(ext, emitter_index, u, em, envelope, Stage::kEmission);
    DensityMatrix after1 = evolve_final(emit, DensityMatrix(rho, DensityTolerance::relaxed()), solver);
    rho = apply_local_superoperator(after1.matrix(), ext, {u}, line);
    LindbladSystem cap = build_stage_on(ext, receiver_index, u, rc, envelope, Stage::kCapture);
    DensityMatrix after2 = evolve_final(cap, DensityMatrix(rho, DensityTolerance::relaxed()), solver);
    return partial_trace(after2, ext, std::span<const std::size_t>(keep));
  }

  // Channel route: each stage only touches (node, virtual mode).
  const HilbertSpec emit_spec{Subsystem::resonator(em.truncation), Subsystem::virtual_cavity(nv)};
  LindbladSystem emit = build_stage_on(emit_spec, 0, 1, em, envelope, Stage::kEmission);
  DensityMatrix state(rho, DensityTolerance::relaxed());
  Matrix s1 = restricted_process_map(emit, occupied_levels(state, ext, {emitter_index, u}), solver);
  rho = apply_local_superoperator(rho, ext, {emitter_index, u}, s1);
  rho = apply_local_superoperator(rho, ext, {u}, line);

  const HilbertSpec cap_spec{Subsystem::resonator(rc.truncation), Subsystem::virtual_cavity(nv)};
  LindbladSystem cap = build_stage_on(cap_spec, 0, 1, rc, envelope, Stage::kCapture);
  state = DensityMatrix(0.5 * (rho + rho.adjoint()), DensityTolerance::relaxed());
  Matrix s2 = restricted_process_map(cap, occupied_levels(state, ext, {receiver_index, u}), solver);
  rho = apply_local_superoperator(rho, ext, {receiver_index, u}, s2);
  state = DensityMatrix(0.5 * (rho + rho.adjoint()), DensityTolerance::relaxed());
  return partial_trace(state, ext, std::span<const std::size_t>(keep));
}

// ---------------------------------------------------------------------------
// Pulse design helpers
// ---------------------------------------------------------------------------

namespace {

// Trapezoid running integral of gamma on the grid.
std::vector<double> running_integral(const Schedule& gamma, const TimeGrid& grid,
                                     std::vector<double>* samples = nullptr) {
  std::vector<double> g(grid.count), cum(grid.count, 0.0);
  for (int i = 0; i < grid.count; ++i) g[i] = std::max(gamma(grid.time(i)).real(), 0.0);
  for (int i = 1; i < grid.count; ++i) cum[i] = cum[i - 1] + 0.5 * grid.step * (g[i - 1] + g[i]);
  if (samples) *samples = std::move(g);
  return cum;
}

}  // namespace

PulseShape emitted_envelope(const Schedule& gamma, const TimeGrid& grid, double detuning) {
  std::vector<double> g;
  const auto cum = running_integral(gamma, grid, &g);
  std::vector<Complex> f(grid.count);
  for (int i = 0; i < grid.count; ++i) {
    f[i] = std::sqrt(g[i]) * std::exp(Complex(-0.5 * cum[i], -detuning * (grid.time(i) - grid.start)));
  }
  PulseShape p(grid, std::move(f));
  if (!(p.norm() > 0.0)) throw ParameterError("emitted_envelope: coupler never opens");
  return p.normalized();
}

double emitted_fraction(const Schedule& gamma, const TimeGrid& grid) {
  return 1.0 - std::exp(-running_integral(gamma, grid).back());
}

PulseShape matched_capture_kappa(const PulseShape& v, double kappa_max) {
  if (!(kappa_max > 0.0)) throw ParameterError("matched_capture_kappa: kappa_max must be positive");
  check_envelope_norm(v, "matched_capture_kappa");
  const EnvelopeIntegral env(v);
  std::vector<double> g(v.size());
  for (int i = 0; i < v.size(); ++i) {
    const double t = v.time(i);
    const double p = std::norm(env.value(t));
    const double acc = env.integral(t);
    g[i] = p == 0.0 ? 0.0 : (acc <= p / kappa_max ? kappa_max : std::min(kappa_max, p / acc));
  }
  return PulseShape(v.grid, g);
}

PulseShape truncate_at_fraction(const PulseShape& gamma, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ParameterError("truncate_at_fraction: fraction must lie in (0, 1]");
  }
  const auto g0 = gamma.real();
  for (double x : g0) {
    if (x < 0.0) throw ParameterError("truncate_at_fraction: negative rate");
  }
  const double dt = gamma.grid.step;
  const int n = gamma.size();
  std::vector<double> cum(n, 0.0);
  for (int i = 1; i < n; ++i) cum[i] = cum[i - 1] + 0.5 * dt * (g0[i - 1] + g0[i]);
  if (fraction >= 1.0) return PulseShape(gamma.grid, g0);
  const double target = -std::log1p(-fraction);
  if (target >= cum.back()) {
    warn("truncate_at_fraction: requested fraction exceeds what the pulse releases");
    return PulseShape(gamma.grid, g0);
  }
  // Sample j carries the tail: with g[j + 1..] = 0 the integral under the
  // linear interpolant is cum[j - 1] + g[j - 1] dt / 2 + g[j] dt.
  int k = 1;
  while (cum[k] < target) ++k;
  std::vector<double> g = g0;
  int j = k;
  double x = 0.0;
  for (; j >= 1; --j) {
    x = (target - cum[j - 1] - 0.5 * dt * g[j - 1]) / dt;
    if (x >= 0.0) break;
  }
  if (j == 0) {
    j = 0;
    x = 2.0 * target / dt;
  }
  g[j] = x;
  for (int i = j + 1; i < n; ++i) g[i] = 0.0;
  return PulseShape(gamma.grid, g);
}

double calibrate_line_phase(const NodeParams& emitter, const NodeParams& receiver,
                            const PulseShape& envelope, const TransferOptions& options) {
  TransferOptions opt = options;
  opt.line_phase = 0.0;
  opt.trajectory_points = 0;
  const int d = emitter.truncation + 1;
  Vector plus = (basis_ket(d, 0) + basis_ket(d, 1)) / std::sqrt(2.0);
  const auto result = run_transfer(emitter, receiver, envelope, DensityMatrix::pure(plus), opt);
  const Complex coherence = result.receiver_state(0, 1);
  if (std::abs(coherence) < 1e-9) {
    throw ParameterError("calibrate_line_phase: no coherence survives the transfer");
  }
  return -std::arg(coherence);
}

// ---------------------------------------------------------------------------
// Waveguide scenarios
// ---------------------------------------------------------------------------

void write_sweep_csv(std::ostream& out, const SweepMap& map) {
  out << std::setprecision(12);
  out << '"' << map.row_label << '\\' << map.col_label << '"';
  for (double c : map.cols) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < map.rows.size(); ++i) {
    out << map.rows[i];
    for (std::size_t j = 0; j < map.cols.size(); ++j) out << ',' << map.values(i, j);
    out << '\n';
  }
}

SweepMap simulate_standing_modes(const NodeParams& node, const WaveguideModel& wg,
                                 const std::vector<double>& resonator_detunings,
                                 const std::vector<double>& hold_times, const DensityMatrix& rho0,
                                 const SolverOptions& solver) {
  node.validate();
  if (wg.n_modes < 1 || !(wg.fsr > 0.0) || !(wg.g_rw >= 0.0)) {
    throw ParameterError("simulate_standing_modes: need n_modes >= 1, fsr > 0, g_rw >= 0");
  }
  if (wg.g_rw > 0.1 * wg.fsr) {
    warn("simulate_standing_modes: g_rw is not small compared with the free spectral range");
  }
  if (hold_times.empty() || !std::is_sorted(hold_times.begin(), hold_times.end()) ||
      hold_times.front() < 0.0) {
    throw ParameterError("simulate_standing_modes: hold times must be nonnegative and sorted");
  }
  for (int n = 2; n < rho0.dim(); ++n) {
    if (rho0(n, n).real() > 1e-12) {
      throw ParameterError(
          "simulate_standing_modes: truncation overflow, the mode manifold holds one excitation");
    }
  }

  // Manifold basis: 0 vacuum, 1 resonator photon, 2 + k photon in mode k.
  const int dim = wg.n_modes + 2;
  const HilbertSpec spec{Subsystem::manifold(dim)};
  auto ket_bra = [dim](int i, int j) {
    Matrix m = Matrix::Zero(dim, dim);
    m(i, j) = 1.0;
    return m;
  };
  Matrix rho_m = Matrix::Zero(dim, dim);
  rho_m.topLeftCorner(2, 2) = rho0.matrix().topLeftCorner(2, 2);

  SweepMap map{"detuning_rad_s", "hold_time_s", resonator_detunings, hold_times,
               Eigen::MatrixXd::Zero(resonator_detunings.size(), hold_times.size())};
  const int center = (wg.n_modes - 1) / 2;
  for (std::size_t r = 0; r < resonator_detunings.size(); ++r) {
    const double delta = resonator_detunings[r];
    LindbladSystem sys(spec, 0.0, hold_times.back());
    Matrix h = Matrix::Zero(dim, dim);
    for (int k = 0; k < wg.n_modes; ++k) {
      const double mode = wg.mode_center + (k - center) * wg.fsr;
      h(2 + k, 2 + k) = mode - delta;
      h(1, 2 + k) = wg.g_rw;
      h(2 + k, 1) = wg.g_rw;
    }
    sys.add_hamiltonian(h);
    const Matrix c = ket_bra(0, 1);
    if (std::isfinite(node.t1)) sys.add_collapse(c, Schedule::constant(std::sqrt(1.0 / node.t1)));
    const double gphi = node.pure_dephasing_rate();
    if (gphi > 0.0) sys.add_collapse(ket_bra(1, 1), Schedule::constant(std::sqrt(2.0 * gphi)));
    if (std::isfinite(wg.mode_t1)) {
      for (int k = 0; k < wg.n_modes; ++k) {
        sys.add_collapse(ket_bra(0, 2 + k), Schedule::constant(std::sqrt(1.0 / wg.mode_t1)));
      }
    }
    SolverOptions opt = solver;
    opt.store_states = false;
    const auto traj = evolve(sys, DensityMatrix(rho_m, DensityTolerance::relaxed()), hold_times, opt,
                             {{"n_resonator", ket_bra(1, 1)}});
    const auto& pop = traj.observables.at("n_resonator");
    for (std::size_t j = 0; j < hold_times.size(); ++j) map.values(r, j) = pop[j];
  }
  return map;
}

SweepMap simulate_emit_recapture(const NodeParams& node, const std::vector<double>& delays,
                                 const std::vector<double>& detunings,
                                 const EmitRecaptureSettings& settings) {
  for (double d : delays) {
    if (!(d >= 0.0)) throw ParameterError("simulate_emit_recapture: delays must be nonnegative");
  }
  const PulseShape envelope =
      settings.envelope ? *settings.envelope
                        : emitted_envelope(settings.release_gamma.to_schedule(),
                                           settings.release_gamma.grid, node.detuning);
  NodeParams release = node, capture = node;
  release.gamma = settings.release_gamma.to_schedule();
  capture.gamma = settings.capture_gamma.to_schedule();

  TransferOptions opt;
  opt.solver = settings.solver;
  opt.trajectory_points = 0;
  const int d = node.truncation + 1;
  const Vector plus = (basis_ket(d, 0) + basis_ket(d, 1)) / std::sqrt(2.0);
  // Stages are independent of the sweep: the detuning only enters as the
  // phase of the flying photon, which commutes with the (U(1)-covariant)
  // capture map.
  const auto result = run_transfer(release, capture, envelope, DensityMatrix::pure(plus), opt);
  const Matrix& rho = result.receiver_state.matrix();
  const double base = 0.5 * (rho(0, 0).real() + rho(1, 1).real());
  const double coherence = std::abs(rho(0, 1));

  SweepMap map{"delay_s", "detuning_rad_s", delays, detunings,
               Eigen::MatrixXd::Zero(delays.size(), detunings.size())};
  for (std::size_t i = 0; i < delays.size(); ++i)
    for (std::size_t j = 0; j < detunings.size(); ++j)
      map.values(i, j) = base + coherence * std::cos(detunings[j] * delays[i]);
  return map;
}

}  // namespace wavelink
