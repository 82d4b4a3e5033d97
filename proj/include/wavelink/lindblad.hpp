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

#ifndef WAVELINK_LINDBLAD_HPP_
#define WAVELINK_LINDBLAD_HPP_

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "wavelink/hilbert.hpp"
#include "wavelink/timegrid.hpp"

namespace wavelink {

using SparseMatrix = Eigen::SparseMatrix<Complex>;

// ---------------------------------------------------------------------------
// Schedules
// ---------------------------------------------------------------------------

/// Complex-valued function of time used as a Hamiltonian or collapse
/// prefactor. Sampled schedules interpolate linearly and clamp to their
/// endpoint values outside the grid.
class Schedule {
 public:
  enum class Kind { kConstant, kSampled, kClosedForm };

  Schedule() = default;

  static Schedule constant(Complex value);
  static Schedule sampled(const TimeGrid& grid, std::vector<Complex> values);
  static Schedule sampled(const TimeGrid& grid, const std::vector<double>& values);
  /// Named analytic family; the parameters are kept for reporting only.
  /// `resolution` is the time scale on which fn varies when it is built from
  /// samples (it caps the integrator step like a sampled schedule).
  static Schedule closed_form(std::string name, std::vector<double> params,
                              std::function<Complex(double)> fn, double resolution = 0.0);

  Complex operator()(double t) const;

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::kConstant; }
  const std::string& name() const { return name_; }
  const std::vector<double>& params() const { return params_; }
  /// Sample spacing for sampled schedules (and products built from them),
  /// zero otherwise.
  double sample_step() const { return resolution_; }
  const TimeGrid& grid() const { return grid_; }
  const std::vector<Complex>& samples() const { return *samples_; }

  /// Pointwise product with another schedule.
  Schedule operator*(const Schedule& other) const;
  Schedule scaled(Complex factor) const;
  Schedule conjugated() const;

 private:
  Kind kind_ = Kind::kConstant;
  Complex value_{};
  TimeGrid grid_{};
  std::shared_ptr<const std::vector<Complex>> samples_;
  std::function<Complex(double)> fn_;
  std::string name_;
  std::vector<double> params_;
  double resolution_ = 0.0;
};

// ---------------------------------------------------------------------------
// System
// ---------------------------------------------------------------------------

/// Hamiltonian term. Contributes the Hermitian part (c O + (c O)^dag) / 2,
/// so a Hermitian operator with a real coefficient enters unchanged and a
/// pair "c O + h.c." is written as a single term with coefficient 2c.
struct HamiltonianTerm {
  Matrix op;
  Schedule coeff;
};

/// Collapse operator L(t) = sum_i coeff_i(t) op_i.
struct CollapseChannel {
  struct Part {
    Matrix op;
    Schedule coeff;
  };
  std::vector<Part> parts;
  std::string label;

  static CollapseChannel single(Matrix op, Schedule coeff, std::string label = {});
};

class LindbladSystem {
 public:
  LindbladSystem(HilbertSpec spec, double t_start, double t_end);

  void add_hamiltonian(Matrix op, Schedule coeff = Schedule::constant(1.0));
  void add_collapse(Matrix op, Schedule coeff = Schedule::constant(1.0), std::string label = {});
  void add_collapse(CollapseChannel channel);

  const HilbertSpec& spec() const { return spec_; }
  int dim() const { return spec_.total_dim(); }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }
  void set_t_span(double t_start, double t_end);

  const std::vector<HamiltonianTerm>& hamiltonian_terms() const { return h_terms_; }
  const std::vector<CollapseChannel>& collapse_channels() const { return channels_; }

  Matrix hamiltonian(double t) const;
  Matrix collapse_operator(std::size_t channel, double t) const;
  bool is_time_independent() const;
  /// Smallest sample spacing over all sampled schedules (0 if none).
  double finest_sample_step() const;

 private:
  void check_operator(const Matrix& op) const;

  HilbertSpec spec_;
  double t_start_;
  double t_end_;
  std::vector<HamiltonianTerm> h_terms_;
  std::vector<CollapseChannel> channels_;
};

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

struct SolverOptions {
  double rel_tol = 1e-8;
  double abs_tol = 1e-10;
  /// Largest allowed step; 0 selects it automatically (span / 20, and at
  /// most four samples of the finest sampled schedule).
  double max_step = 0.0;
  long max_steps = 20'000'000;
  /// When false only the final state is kept in Trajectory::states.
  bool store_states = true;
};

struct Observable {
  std::string name;
  Matrix op;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::map<std::string, std::vector<double>> observables;
  /// Largest |tr rho - 1| seen at the output times.
  double max_trace_drift = 0.0;
  long steps_accepted = 0;
  long steps_rejected = 0;

  const DensityMatrix& final_state() const { return states.back(); }
};

/// Integrates the master equation from sys.t_start() through the output times.
Trajectory evolve(const LindbladSystem& sys, const DensityMatrix& rho0,
                  const std::vector<double>& output_times, const SolverOptions& options = {},
                  const std::vector<Observable>& observables = {});

/// Final state at sys.t_end().
DensityMatrix evolve_final(const LindbladSystem& sys, const DensityMatrix& rho0,
                           const SolverOptions& options = {});

/// Applies the (linear) propagator from t0 to t1 to arbitrary matrices
/// X_k, which need not be Hermitian or unit trace.
std::vector<Matrix> evolve_matrices(const LindbladSystem& sys, const std::vector<Matrix>& inputs,
                                    double t0, double t1, const SolverOptions& options = {});

/// Column-stacking process superoperator S with vec(rho(t1)) = S vec(rho(t0)).
Matrix process_superoperator(const LindbladSystem& sys, double t0, double t1,
                             const SolverOptions& options = {});

/// Applies a column-stacking superoperator to a matrix.
Matrix apply_superoperator(const Matrix& superop, const Matrix& rho);

/// Dense Liouvillian at time t (column stacking):
/// vec(A rho B) = (B^T kron A) vec(rho).
Matrix liouvillian(const LindbladSystem& sys, double t);

/// exp(L t) vec(rho0) for systems whose schedules are all constant.
DensityMatrix evolve_superoperator_reference(const LindbladSystem& sys, const DensityMatrix& rho0,
                                             double t);

}  // namespace wavelink

#endif  // WAVELINK_LINDBLAD_HPP_
