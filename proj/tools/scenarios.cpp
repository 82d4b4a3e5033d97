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

#include "scenarios.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iomanip>
#include <random>
#include <sstream>

#include "wavelink/cascade.hpp"
#include "wavelink/circuitmodel.hpp"
#include "wavelink/errors.hpp"
#include "wavelink/jc.hpp"
#include "wavelink/optimize.hpp"
#include "wavelink/pulses.hpp"
#include "wavelink/tomography.hpp"

namespace wavelink::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kTwoPi = 2 * M_PI;

class Output {
 public:
  explicit Output(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path p = dir_ / name;
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << std::setprecision(12);
    body(out);
    out.close();
    if (!out) throw std::runtime_error("write failed: " + p.string());
    files_.push_back({name, fs::file_size(p)});
  }

  const std::vector<Artifact>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<Artifact> files_;
};

void write_density_rows(std::ostream& out, const std::string& label, const DensityMatrix& rho) {
  const Matrix& m = rho.matrix();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j)
      out << label << ',' << i << ',' << j << ',' << m(i, j).real() << ',' << m(i, j).imag() << '\n';
}

NodeParams node_params(const NodeDevice& d, int truncation, const PulseShape& gamma) {
  NodeParams p;
  p.truncation = truncation;
  p.gamma = gamma.to_schedule();
  p.t1 = d.resonator_t1;
  p.t2 = d.resonator_t2;
  return p;
}

TransferSettings transfer_settings(const PulseConfig& p) {
  TransferSettings t;
  t.kappa_c = p.kappa_c;
  t.kappa_m = p.kappa_m;
  t.kappa_max = p.kappa_max;
  t.t0 = p.t0;
  t.window_before = p.window_before;
  t.window_after = p.window_after;
  t.step = p.step;
  t.line_loss = p.line_loss;
  t.phase_offset = p.phase_offset;
  if (p.filter_sigma > 0.0) {
    t.release_gamma = gaussian_filter(t.release(), p.filter_sigma);
  }
  return t;
}

Json pulses_json(const PulseConfig& p) {
  return Json{{"kappa_c_per_s", p.kappa_c},     {"kappa_m_per_s", p.kappa_m},
              {"kappa_max_per_s", p.kappa_max}, {"t0_s", p.t0},
              {"window_before_s", p.window_before}, {"window_after_s", p.window_after},
              {"step_s", p.step},               {"filter_sigma_s", p.filter_sigma},
              {"line_loss", p.line_loss},       {"phase_offset_rad", p.phase_offset}};
}

Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json node_json(const NodeDevice& d) {
  return Json{{"g_qr_hz", d.g_qr / kTwoPi},
              {"qubit_levels", d.qubit_levels},
              {"qubit_t1_s", finite_or_null(d.qubit_t1)},
              {"qubit_t2_s", finite_or_null(d.qubit_t2)},
              {"resonator_t1_s", finite_or_null(d.resonator_t1)},
              {"resonator_t2_s", finite_or_null(d.resonator_t2)}};
}

// ---------------------------------------------------------------------------

DensityMatrix input_state(const std::string& spec, int truncation) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const int n = std::stoi(spec.substr(colon + 1));
  if (n > truncation) {
    throw ConfigError("transfer.inputs: '" + spec + "' needs transfer.truncation >= " + std::to_string(n));
  }
  const int d = truncation + 1;
  if (kind == "fock") return DensityMatrix::basis(d, n);
  return DensityMatrix::pure((basis_ket(d, 0) + basis_ket(d, n)) / std::sqrt(2.0));
}

Json run_transfer_scenario(const ScenarioConfig& cfg, Output& out) {
  const TransferConfig& c = cfg.transfer;
  // Inputs are checked before any simulation.
  for (const auto& in : c.inputs) input_state(in, c.truncation);
  const TransferSettings ts = transfer_settings(cfg.pulses);
  const PulseShape release = ts.release();
  const PulseShape envelope = emitted_envelope(release.to_schedule(), release.grid);
  const PulseShape capture = matched_capture_kappa(envelope, ts.kappa_max);
  const NodeParams em = node_params(cfg.device.node1, c.truncation, release);
  const NodeParams rc = node_params(cfg.device.node2, c.truncation, capture);

  TransferOptions opt;
  opt.line_loss = ts.line_loss;
  opt.trajectory_points = 201;
  double phase = ts.phase_offset;
  if (c.calibrate_phase) phase += calibrate_line_phase(em, rc, envelope, opt);
  opt.line_phase = phase;

  out.write("pulses.csv", [&](std::ostream& o) {
    o << "time_s,release_kappa_per_s,capture_kappa_per_s,envelope_re,envelope_im\n";
    for (int i = 0; i < release.size(); ++i) {
      o << release.time(i) << ',' << release.values[i].real() << ',' << capture.values[i].real() << ','
        << envelope.values[i].real() << ',' << envelope.values[i].imag() << '\n';
    }
  });

  Json results = Json::object();
  std::ostringstream pops, traj;
  pops << std::setprecision(12) << "input,n,p_sent,p_received\n";
  traj << std::setprecision(12) << "input,stage,time_s,n_node,n_virtual\n";
  double drift = 0.0;
  for (const auto& in : c.inputs) {
    const DensityMatrix rho0 = input_state(in, c.truncation);
    const TransferResult r = run_transfer(em, rc, envelope, rho0, opt);
    const auto p_in = rho0.populations();
    const auto p_out = r.receiver_state.populations();
    for (std::size_t n = 0; n < p_in.size(); ++n) pops << in << ',' << n << ',' << p_in[n] << ',' << p_out[n] << '\n';
    for (const auto* t : {&r.emission, &r.capture}) {
      const char* stage = t == &r.emission ? "emission" : "capture";
      for (std::size_t k = 0; k < t->times.size(); ++k) {
        traj << in << ',' << stage << ',' << t->times[k] << ',' << t->observables.at("n_node")[k] << ','
             << t->observables.at("n_virtual")[k] << '\n';
      }
      drift = std::max(drift, t->max_trace_drift);
    }
    results[in] = Json{{"efficiency", r.efficiency}, {"fidelity", fidelity(r.receiver_state, rho0)}};
  }
  out.write("populations.csv", [&](std::ostream& o) { o << pops.str(); });
  out.write("trajectories.csv", [&](std::ostream& o) { o << traj.str(); });
  return Json{{"inputs", results},
              {"line_phase_rad", phase},
              {"emitted_fraction", emitted_fraction(release.to_schedule(), release.grid)},
              {"max_trace_drift", drift}};
}

// ---------------------------------------------------------------------------

Json run_modes_scenario(const ScenarioConfig& cfg, Output& out, int workers) {
  const ModesConfig& c = cfg.modes;
  WaveguideModel wg;
  wg.n_modes = c.n_modes;
  wg.fsr = c.fsr;
  wg.g_rw = c.g_rw;
  if (c.mode_t1 > 0.0) wg.mode_t1 = c.mode_t1;
  NodeParams node;
  node.truncation = 1;
  node.t1 = cfg.device.node1.resonator_t1;
  node.t2 = cfg.device.node1.resonator_t2;
  const auto det = c.detuning.values();
  const auto hold = c.hold.values();
  const DensityMatrix rho0 = DensityMatrix::basis(2, 1);

  // Detuning rows are independent; split them across workers.
  const int chunks = std::clamp(workers, 1, static_cast<int>(det.size()));
  std::vector<std::future<SweepMap>> parts;
  for (int w = 0; w < chunks; ++w) {
    const std::size_t lo = det.size() * w / chunks, hi = det.size() * (w + 1) / chunks;
    std::vector<double> slice(det.begin() + lo, det.begin() + hi);
    parts.push_back(std::async(chunks > 1 ? std::launch::async : std::launch::deferred,
                               [&, slice] { return simulate_standing_modes(node, wg, slice, hold, rho0); }));
  }
  SweepMap map;
  map.values.resize(det.size(), hold.size());
  int row = 0;
  for (auto& f : parts) {
    SweepMap m = f.get();
    map.row_label = m.row_label;
    map.col_label = m.col_label;
    map.values.middleRows(row, m.values.rows()) = m.values;
    row += static_cast<int>(m.values.rows());
  }
  map.rows = det;
  map.cols = hold;
  out.write("standing_modes.csv", [&](std::ostream& o) { write_sweep_csv(o, map); });
  return Json{{"detuning_points", det.size()},
              {"hold_points", hold.size()},
              {"min_population", map.values.minCoeff()},
              {"max_population", map.values.maxCoeff()},
              {"fsr_hz", c.fsr / kTwoPi}};
}

Json run_emit_recapture_scenario(const ScenarioConfig& cfg, Output& out) {
  const EmitRecaptureConfig& c = cfg.emit_recapture;
  const TimeGrid grid = TimeGrid::spanning(0.0, c.pulse_width + 10e-9, c.step);
  EmitRecaptureSettings s;
  s.release_gamma = flattop(c.pulse_width, 0.0, c.kappa, grid, 0.0);
  s.capture_gamma = matched_capture_kappa(emitted_envelope(s.release_gamma.to_schedule(), grid), c.kappa);
  NodeParams node;
  node.truncation = 1;
  node.t1 = cfg.device.node2.resonator_t1;
  node.t2 = cfg.device.node2.resonator_t2;
  const auto map = simulate_emit_recapture(node, c.delay.values(), c.detuning.values(), s);
  out.write("emit_recapture.csv", [&](std::ostream& o) { write_sweep_csv(o, map); });
  const Eigen::VectorXd last = map.values.row(map.values.rows() - 1);
  return Json{{"emitted_fraction", emitted_fraction(s.release_gamma.to_schedule(), grid)},
              {"fringe_contrast", last.maxCoeff() - last.minCoeff()},
              {"max_overlap", map.values.maxCoeff()}};
}

// ---------------------------------------------------------------------------

Json run_noon_scenario(const ScenarioConfig& cfg, Output& out) {
  const NoonConfig& c = cfg.noon;
  NodeDevice d1 = cfg.device.node1, d2 = cfg.device.node2;
  d1.truncation = d2.truncation = c.truncation;
  NodeLayout layout({d1, d2});
  ExecutionOptions opts;
  opts.transfer = transfer_settings(cfg.pulses);
  const NodeState state = prepare_noon(c.n, layout, opts);
  const DensityMatrix rho = state.resonators();
  const DensityMatrix target = noon_target(c.n, c.truncation, c.truncation);

  const HilbertSpec spec{Subsystem::resonator(c.truncation), Subsystem::resonator(c.truncation)};
  TomographyDataset ds = synthesize_joint_dataset(rho, spec, joint_grid(c.grid, c.extent), c.truncation);
  if (c.noise > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    ds = add_gaussian_noise(ds, c.noise, rng);
  }
  ReconstructionReport report;
  const DensityMatrix rec = reconstruct_joint(ds, c.n, {}, &report);

  out.write("density_matrices.csv", [&](std::ostream& o) {
    o << "kind,row,col,re,im\n";
    write_density_rows(o, "ideal", target);
    write_density_rows(o, "simulated", rho);
    write_density_rows(o, "reconstructed", rec);
  });
  out.write("tomography_dataset.json", [&](std::ostream& o) { o << dataset_to_json(ds) << '\n'; });
  return Json{{"n", c.n},
              {"fidelity_simulated", fidelity(rho, target)},
              {"fidelity_reconstructed", fidelity(rec, target)},
              {"fidelity_reconstructed_vs_simulated", fidelity(rec, rho)},
              {"purity_reconstructed", rec.purity()},
              {"reconstruction_iterations", report.iterations},
              {"reconstruction_converged", report.converged}};
}

Json reconstruct_file(const TomographyConfig& c, Output& out) {
  std::ifstream in(c.dataset_file);
  if (!in) throw ConfigError("tomography.dataset_file: cannot read " + c.dataset_file);
  std::stringstream buf;
  buf << in.rdbuf();
  TomographyDataset ds;
  try {
    ds = dataset_from_json(buf.str());
    ds.validate();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("tomography.dataset_file: " + std::string(e.what()));
  } catch (const Error& e) {
    throw ReconstructionError("tomography.dataset_file: " + std::string(e.what()));
  }
  ReconstructionReport report;
  const DensityMatrix rec = ds.is_joint() ? reconstruct_joint(ds, std::nullopt, {}, &report)
                                          : reconstruct_density_matrix(ds, {}, &report);
  if (!ds.is_joint()) {
    const auto wgrid = square_grid(c.wigner_points, c.wigner_extent);
    out.write("wigner_reconstructed.csv", [&](std::ostream& o) { write_wigner_csv(o, rec, wgrid); });
  }
  out.write("density_matrices.csv", [&](std::ostream& o) {
    o << "kind,row,col,re,im\n";
    write_density_rows(o, "reconstructed", rec);
  });
  return Json{{"dataset", c.dataset_file},
              {"joint", ds.is_joint()},
              {"purity_reconstructed", rec.purity()},
              {"reconstruction_iterations", report.iterations},
              {"reconstruction_converged", report.converged}};
}

Json run_tomography_scenario(const ScenarioConfig& cfg, Output& out) {
  const TomographyConfig& c = cfg.tomography;
  if (!c.dataset_file.empty()) return reconstruct_file(c, out);
  NodeDevice d1 = cfg.device.node1, d2 = cfg.device.node2;
  d1.truncation = d2.truncation = c.truncation;
  NodeLayout layout({d1, d2});
  ExecutionOptions opts;
  opts.transfer = transfer_settings(cfg.pulses);
  auto steps = superposition_sequence(c.n, d1, 0);
  steps.push_back(SequenceStep::transfer(0, 1.0, 1));
  const NodeState state = run_sequence(layout, steps, opts);
  const DensityMatrix sent = prepare_superposition(c.n, d1, opts).resonator(0);
  const DensityMatrix rho = state.resonator(1);
  const int dim = c.truncation + 1;
  const DensityMatrix target = DensityMatrix::pure((basis_ket(dim, 0) + basis_ket(dim, c.n)) / std::sqrt(2.0));

  TomographyDataset ds = synthesize_dataset(rho, square_grid(c.grid, c.extent), c.truncation);
  if (c.noise > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    ds = add_gaussian_noise(ds, c.noise, rng);
  }
  ReconstructionReport report;
  const DensityMatrix rec = reconstruct_density_matrix(ds, {}, &report);

  const auto wgrid = square_grid(c.wigner_points, c.wigner_extent);
  out.write("wigner_sent.csv", [&](std::ostream& o) { write_wigner_csv(o, sent, wgrid); });
  out.write("wigner_reconstructed.csv", [&](std::ostream& o) { write_wigner_csv(o, rec, wgrid); });
  out.write("density_matrices.csv", [&](std::ostream& o) {
    o << "kind,row,col,re,im\n";
    write_density_rows(o, "ideal", target);
    write_density_rows(o, "sent", sent);
    write_density_rows(o, "received", rho);
    write_density_rows(o, "reconstructed", rec);
  });
  out.write("tomography_dataset.json", [&](std::ostream& o) { o << dataset_to_json(ds) << '\n'; });
  return Json{{"n", c.n},
              {"fidelity_sent", fidelity(sent, target)},
              {"fidelity_received", fidelity(rho, target)},
              {"fidelity_reconstructed_vs_received", fidelity(rec, rho)},
              {"reconstruction_iterations", report.iterations},
              {"reconstruction_converged", report.converged}};
}

// ---------------------------------------------------------------------------

Json run_circuit_scenario(const ScenarioConfig& cfg, Output& out, int workers) {
  using namespace circuit;
  const CircuitConfig& c = cfg.circuit;
  if (c.kind == "boxmodes") {
    const auto modes = box_modes(c.box_geometry, c.max_index);
    out.write("box_modes.csv", [&](std::ostream& o) { write_box_modes_csv(o, modes); });
    const BoxMode& m = modes.front();
    return Json{{"box", c.box},
                {"lowest_mode", Json{{"n", m.n}, {"m", m.m}, {"l", m.l}, {"f_hz", m.frequency}}},
                {"mode_count", modes.size()}};
  }
  if (c.kind == "anharmonicity") {
    const auto sweep = anharmonicity_sweep(c.resonator, c.points);
    out.write("anharmonicity.csv", [&](std::ostream& o) { write_anharmonicity_csv(o, sweep); });
    double worst = 0.0, f_lo = INFINITY, f_hi = 0.0;
    for (const auto& p : sweep) {
      worst = std::max(worst, std::abs(p.alpha) / kTwoPi);
      f_lo = std::min(f_lo, p.omega_r / kTwoPi);
      f_hi = std::max(f_hi, p.omega_r / kTwoPi);
    }
    return Json{{"mode_index", c.resonator.mode_index},
                {"band_hz", Json::array({f_lo, f_hi})},
                {"max_abs_alpha_hz", worst},
                {"below_20khz", worst < 20e3}};
  }
  if (c.kind == "coupler") {
    const auto sweep = flux_sweep(c.flux.values(), c.resonator, c.coupler, {}, workers);
    out.write("coupler_lifetime.csv", [&](std::ostream& o) { write_flux_sweep_csv(o, sweep); });
    auto [lo, hi] = std::minmax_element(sweep.begin(), sweep.end(),
                                        [](const Resonance& a, const Resonance& b) { return a.t1 < b.t1; });
    return Json{{"min_t1_s", lo->t1}, {"min_t1_flux_phi0", lo->phi_ext},
                {"max_t1_s", hi->t1}, {"max_t1_flux_phi0", hi->phi_ext}};
  }
  const double v = cpw_phase_velocity(c.epsilon_r);
  const double fsr = free_spectral_range(c.line_length, v);
  out.write("fsr.csv", [&](std::ostream& o) {
    o << "epsilon_r,length_m,velocity_m_per_s,fsr_hz\n" << c.epsilon_r << ',' << c.line_length << ',' << v << ','
      << fsr << '\n';
  });
  return Json{{"velocity_m_per_s", v}, {"fsr_hz", fsr}};
}

// ---------------------------------------------------------------------------

Json run_optimize_scenario(const ScenarioConfig& cfg, Output& out, int workers) {
  const OptimizeConfig& c = cfg.optimize;
  TransferScenario sc;
  sc.kappa_c = cfg.pulses.kappa_c;
  sc.t0 = cfg.pulses.t0;
  sc.window_before = cfg.pulses.window_before;
  sc.window_after = cfg.pulses.window_after;
  sc.step = cfg.pulses.step;

  PulseParameterization p;
  p.kappa_max = cfg.pulses.kappa_max;
  p.filter_sigma = c.filter_sigma;
  p.knot_times = default_knot_times(c.knots, sc.t0);
  if (c.stage == "capture") {
    // Capture rates mirror release rates about t0.
    std::vector<double> mirrored;
    for (auto it = p.knot_times.rbegin(); it != p.knot_times.rend(); ++it) mirrored.push_back(2 * sc.t0 - *it);
    p.knot_times = mirrored;
    p.stage = OptimizationStage::kCapture;
  } else if (c.stage == "joint") {
    p.stage = OptimizationStage::kJoint;
  }

  OptimizerSettings s;
  s.budget = c.budget;
  s.seed = cfg.seed;
  s.workers = workers;
  const auto report = optimize_pulse([&](const std::vector<double>& v) { return objective_transfer(v, p, sc); },
                                     Bounds::uniform(p.dimension(), 0.0, p.kappa_max), s);

  PulseParameterization sharp = p;
  sharp.filter_sigma = 0.0;
  const TimeGrid grid = sc.grid();
  const std::size_t k = p.knot_times.size();
  const std::vector<double> first(report.best_params.begin(), report.best_params.begin() + k);
  const PulseShape kappa = p.kappa(first, grid);
  out.write("optimized_kappa.csv", [&](std::ostream& o) { write_pulse_csv(o, kappa); });
  out.write("optimizer_log.csv", [&](std::ostream& o) { report.write_log_csv(o); });
  out.write("optimizer_report.json", [&](std::ostream& o) { o << report.to_json() << '\n'; });

  Json knots = Json::array();
  for (double t : p.knot_times) knots.push_back(t);
  return Json{{"stage", c.stage},
              {"knot_times_s", knots},
              {"best_efficiency", report.best_value},
              {"best_efficiency_unfiltered_pulse", objective_transfer(report.best_params, sharp, sc)},
              {"best_params_per_s", report.best_params},
              {"method", report.method},
              {"evaluations", report.log.size()},
              {"cache_hits", report.cache_hits}};
}

Json config_json(const ScenarioConfig& cfg) {
  Json j{{"scenario", scenario_name(cfg.scenario)},
         {"seed", cfg.seed},
         {"device", Json{{"preset", cfg.device.preset},
                         {"node1", node_json(cfg.device.node1)},
                         {"node2", node_json(cfg.device.node2)}}},
         {"pulses", pulses_json(cfg.pulses)}};
  switch (cfg.scenario) {
    case ScenarioKind::kTransfer:
      j["transfer"] = Json{{"inputs", cfg.transfer.inputs},
                           {"truncation", cfg.transfer.truncation},
                           {"calibrate_phase", cfg.transfer.calibrate_phase}};
      break;
    case ScenarioKind::kModes:
      j["modes"] = Json{{"n_modes", cfg.modes.n_modes},
                        {"fsr_hz", cfg.modes.fsr / kTwoPi},
                        {"g_rw_hz", cfg.modes.g_rw / kTwoPi}};
      break;
    case ScenarioKind::kEmitRecapture:
      j["emit_recapture"] = Json{{"pulse_width_s", cfg.emit_recapture.pulse_width},
                                 {"kappa_per_s", cfg.emit_recapture.kappa}};
      break;
    case ScenarioKind::kNoon:
      j["noon"] = Json{{"n", cfg.noon.n}, {"truncation", cfg.noon.truncation}, {"grid", cfg.noon.grid},
                       {"extent", cfg.noon.extent}, {"noise", cfg.noon.noise}};
      break;
    case ScenarioKind::kTomography:
      j["tomography"] = Json{{"n", cfg.tomography.n}, {"truncation", cfg.tomography.truncation},
                             {"grid", cfg.tomography.grid}, {"extent", cfg.tomography.extent},
                             {"noise", cfg.tomography.noise}};
      break;
    case ScenarioKind::kCircuit:
      j["circuit"] = Json{{"kind", cfg.circuit.kind}, {"box", cfg.circuit.box}};
      break;
    case ScenarioKind::kOptimize:
      j["optimize"] = Json{{"stage", cfg.optimize.stage}, {"knots", cfg.optimize.knots},
                           {"budget", cfg.optimize.budget}, {"filter_sigma_s", cfg.optimize.filter_sigma}};
      break;
  }
  return j;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

RunOutcome run_scenario(const ScenarioConfig& cfg, int workers) {
  workers = std::max(1, workers);
  Output out(cfg.output_dir);
  Json results;
  switch (cfg.scenario) {
    case ScenarioKind::kTransfer: results = run_transfer_scenario(cfg, out); break;
    case ScenarioKind::kModes: results = run_modes_scenario(cfg, out, workers); break;
    case ScenarioKind::kEmitRecapture: results = run_emit_recapture_scenario(cfg, out); break;
    case ScenarioKind::kNoon: results = run_noon_scenario(cfg, out); break;
    case ScenarioKind::kTomography: results = run_tomography_scenario(cfg, out); break;
    case ScenarioKind::kCircuit: results = run_circuit_scenario(cfg, out, workers); break;
    case ScenarioKind::kOptimize: results = run_optimize_scenario(cfg, out, workers); break;
  }

  RunOutcome outcome;
  Json files = Json::array();
  for (const auto& f : out.files()) files.push_back(f.path);
  outcome.summary = Json{{"tool", "wavelink"},
                         {"versions", Json{{"wavelink", kVersion},
                                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                                                         std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                                         std::to_string(EIGEN_MINOR_VERSION)},
                                           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
                         {"parameters", config_json(cfg)},
                         {"results", results},
                         {"files", files}};
  out.write("summary.json", [&](std::ostream& o) { o << outcome.summary.dump(2) << '\n'; });

  Json manifest_files = Json::array();
  for (const auto& f : out.files()) manifest_files.push_back(Json{{"path", f.path}, {"bytes", f.bytes}});
  const Json manifest{{"created_utc", utc_timestamp()}, {"files", manifest_files}};
  out.write("manifest.json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
  outcome.files = out.files();
  return outcome;
}

}  // namespace wavelink::cli
