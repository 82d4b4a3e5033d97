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

#include "wavelink/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wavelink/errors.hpp"

namespace wavelink {

// ---------------------------------------------------------------------------
// Schedule
// ---------------------------------------------------------------------------

Schedule Schedule::constant(Complex value) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
    throw ParameterError("Schedule: non-finite constant");
  }
  Schedule s;
  s.kind_ = Kind::kConstant;
  s.value_ = value;
  s.name_ = "constant";
  return s;
}

Schedule Schedule::sampled(const TimeGrid& grid, std::vector<Complex> values) {
  if (grid.count < 1 || static_cast<int>(values.size()) != grid.count) {
    throw InvalidDimension("Schedule: sample count does not match the grid");
  }
  if (grid.count > 1 && !(grid.step > 0.0)) {
    throw ParameterError("Schedule: sample grid must be strictly increasing");
  }
  for (const auto& v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ParameterError("Schedule: non-finite sample");
    }
  }
  Schedule s;
  s.kind_ = Kind::kSampled;
  s.grid_ = grid;
  s.samples_ = std::make_shared<const std::vector<Complex>>(std::move(values));
  s.resolution_ = grid.count > 1 ? grid.step : 0.0;
  s.name_ = "sampled";
  return s;
}

Schedule Schedule::sampled(const TimeGrid& grid, const std::vector<double>& values) {
  return sampled(grid, std::vector<Complex>(values.begin(), values.end()));
}

Schedule Schedule::closed_form(std::string name, std::vector<double> params,
                               std::function<Complex(double)> fn, double resolution) {
  if (!fn) throw ParameterError("Schedule: empty function");
  if (!(resolution >= 0.0)) throw ParameterError("Schedule: negative resolution");
  Schedule s;
  s.kind_ = Kind::kClosedForm;
  s.fn_ = std::move(fn);
  s.name_ = std::move(name);
  s.params_ = std::move(params);
  s.resolution_ = resolution;
  return s;
}

Complex Schedule::operator()(double t) const {
  switch (kind_) {
    case Kind::kConstant:
      return value_;
    case Kind::kSampled: {
      const auto& v = *samples_;
      if (grid_.count == 1 || t <= grid_.start) return v.front();
      const double x = (t - grid_.start) / grid_.step;
      const auto i = static_cast<std::size_t>(x);
      if (i + 1 >= v.size()) return v.back();
      const double f = x - static_cast<double>(i);
      return v[i] + f * (v[i + 1] - v[i]);
    }
    case Kind::kClosedForm:
      return fn_(t);
  }
  return {};
}

Schedule Schedule::scaled(Complex factor) const {
  switch (kind_) {
    case Kind::kConstant:
      return constant(value_ * factor);
    case Kind::kSampled: {
      std::vector<Complex> v(*samples_);
      for (auto& x : v) x *= factor;
      return sampled(grid_, std::move(v));
    }
    case Kind::kClosedForm: {
      auto fn = fn_;
      Schedule s = closed_form(name_, params_, [fn, factor](double t) { return factor * fn(t); });
      s.resolution_ = resolution_;
      return s;
    }
  }
  return *this;
}

Schedule Schedule::conjugated() const {
  switch (kind_) {
    case Kind::kConstant:
      return constant(std::conj(value_));
    case Kind::kSampled: {
      std::vector<Complex> v(*samples_);
      for (auto& x : v) x = std::conj(x);
      return sampled(grid_, std::move(v));
    }
    case Kind::kClosedForm: {
      auto fn = fn_;
      Schedule s = closed_form(name_, params_, [fn](double t) { return std::conj(fn(t)); });
      s.resolution_ = resolution_;
      return s;
    }
  }
  return *this;
}

Schedule Schedule::operator*(const Schedule& other) const {
  if (kind_ == Kind::kConstant) return other.scaled(value_);
  if (other.kind_ == Kind::kConstant) return scaled(other.value_);
  if (kind_ == Kind::kSampled && other.kind_ == Kind::kSampled && grid_ == other.grid_) {
    std::vector<Complex> v(*samples_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= (*other.samples_)[i];
    return sampled(grid_, std::move(v));
  }
  Schedule a = *this;
  Schedule b = other;
  Schedule s = closed_form("product", {}, [a, b](double t) { return a(t) * b(t); });
  const double ra = resolution_, rb = other.resolution_;
  s.resolution_ = (ra > 0 && rb > 0) ? std::min(ra, rb) : std::max(ra, rb);
  return s;
}

// ---------------------------------------------------------------------------
// LindbladSystem
// ---------------------------------------------------------------------------

CollapseChannel CollapseChannel::single(Matrix op, Schedule coeff, std::string label) {
  CollapseChannel c;
  c.parts.push_back({std::move(op), std::move(coeff)});
  c.label = std::move(label);
  return c;
}

LindbladSystem::LindbladSystem(HilbertSpec spec, double t_start, double t_end)
    : spec_(std::move(spec)), t_start_(t_start), t_end_(t_end) {
  set_t_span(t_start, t_end);
}

void LindbladSystem::set_t_span(double t_start, double t_end) {
  if (!(t_end >= t_start)) throw ParameterError("LindbladSystem: t_end must not precede t_start");
  t_start_ = t_start;
  t_end_ = t_end;
}

void LindbladSystem::check_operator(const Matrix& op) const {
  if (op.rows() != dim() || op.cols() != dim()) {
    throw InvalidDimension("LindbladSystem: operator dimension " + std::to_string(op.rows()) +
                           " does not match the system dimension " + std::to_string(dim()));
  }
  if (!op.allFinite()) throw ParameterError("LindbladSystem: operator has non-finite entries");
}

void LindbladSystem::add_hamiltonian(Matrix op, Schedule coeff) {
  check_operator(op);
  h_terms_.push_back({std::move(op), std::move(coeff)});
}

void LindbladSystem::add_collapse(Matrix op, Schedule coeff, std::string label) {
  add_collapse(CollapseChannel::single(std::move(op), std::move(coeff), std::move(label)));
}

void LindbladSystem::add_collapse(CollapseChannel channel) {
  if (channel.parts.empty()) throw ParameterError("LindbladSystem: empty collapse channel");
  for (const auto& p : channel.parts) check_operator(p.op);
  channels_.push_back(std::move(channel));
}

Matrix LindbladSystem::hamiltonian(double t) const {
  Matrix h = Matrix::Zero(dim(), dim());
  for (const auto& term : h_terms_) h += term.coeff(t) * term.op;
  return 0.5 * (h + h.adjoint());
}

Matrix LindbladSystem::collapse_operator(std::size_t channel, double t) const {
  Matrix l = Matrix::Zero(dim(), dim());
  for (const auto& p : channels_.at(channel).parts) l += p.coeff(t) * p.op;
  return l;
}

bool LindbladSystem::is_time_independent() const {
  for (const auto& t : h_terms_)
    if (!t.coeff.is_constant()) return false;
  for (const auto& c : channels_)
    for (const auto& p : c.parts)
      if (!p.coeff.is_constant()) return false;
  return true;
}

double LindbladSystem::finest_sample_step() const {
  double finest = 0.0;
  auto visit = [&finest](const Schedule& s) {
    const double h = s.sample_step();
    if (h > 0.0 && (finest == 0.0 || h < finest)) finest = h;
  };
  for (const auto& t : h_terms_) visit(t.coeff);
  for (const auto& c : channels_)
    for (const auto& p : c.parts) visit(p.coeff);
  return finest;
}

// ---------------------------------------------------------------------------
// Generator: sparse assembly of H_eff(t) and L_k(t)
// ---------------------------------------------------------------------------

namespace {

SparseMatrix to_sparse(const Matrix& m) { return m.sparseView(Complex(0.0), 1e-300); }

// dX/dt = -i H_eff X + i X H_eff^dag + sum_k L_k X L_k^dag,
// H_eff = H - (i/2) sum_k L_k^dag L_k.
class Generator {
 public:
  explicit Generator(const LindbladSystem& sys) : sys_(sys) {
    for (const auto& term : sys.hamiltonian_terms()) {
      h_ops_.push_back(to_sparse(term.op));
      h_ops_adj_.push_back(to_sparse(term.op.adjoint()));
    }
    for (const auto& channel : sys.collapse_channels()) {
      Channel c;
      for (const auto& p : channel.parts) c.ops.push_back(to_sparse(p.op));
      const std::size_t n = channel.parts.size();
      c.gram.resize(n * n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          c.gram[i * n + j] = to_sparse(channel.parts[i].op.adjoint() * channel.parts[j].op);
      channels_.push_back(std::move(c));
    }
    constant_ = sys.is_time_independent();
    if (constant_) assemble(sys.t_start());
  }

  // Writes the generator applied to each d x d block of X into out.
  void apply(double t, const Matrix& x, Matrix& out, bool hermitian_blocks) {
    if (!constant_) assemble(t);
    const Eigen::Index d = sys_.dim();
    const Eigen::Index blocks = x.cols() / d;
    Matrix a = h_eff_ * x;
    out.resize(x.rows(), x.cols());
    if (hermitian_blocks) {
      for (Eigen::Index b = 0; b < blocks; ++b) {
        auto ab = a.middleCols(b * d, d);
        out.middleCols(b * d, d) = Complex(0, -1) * ab + Complex(0, 1) * ab.adjoint();
      }
    } else {
      for (Eigen::Index b = 0; b < blocks; ++b) {
        Matrix xb_adj = x.middleCols(b * d, d).adjoint();
        Matrix bb = h_eff_ * xb_adj;
        out.middleCols(b * d, d) =
            Complex(0, -1) * a.middleCols(b * d, d) + Complex(0, 1) * bb.adjoint();
      }
    }
    for (const auto& l : l_now_) {
      for (Eigen::Index b = 0; b < blocks; ++b) {
        Matrix w = l * x.middleCols(b * d, d).adjoint();
        Matrix w_adj = w.adjoint();
        out.middleCols(b * d, d).noalias() += l * w_adj;
      }
    }
  }

 private:
  struct Channel {
    std::vector<SparseMatrix> ops;
    std::vector<SparseMatrix> gram;
  };

  void assemble(double t) {
    const auto& terms = sys_.hamiltonian_terms();
    const int d = sys_.dim();
    SparseMatrix h(d, d);
    for (std::size_t k = 0; k < terms.size(); ++k) {
      const Complex c = terms[k].coeff(t);
      if (c == Complex(0.0)) continue;
      h += (0.5 * c) * h_ops_[k] + (0.5 * std::conj(c)) * h_ops_adj_[k];
    }
    l_now_.clear();
    const auto& chans = sys_.collapse_channels();
    for (std::size_t k = 0; k < chans.size(); ++k) {
      const auto& parts = chans[k].parts;
      const std::size_t n = parts.size();
      std::vector<Complex> c(n);
      bool any = false;
      for (std::size_t i = 0; i < n; ++i) {
        c[i] = parts[i].coeff(t);
        any = any || c[i] != Complex(0.0);
      }
      if (!any) continue;
      SparseMatrix l(d, d);
      for (std::size_t i = 0; i < n; ++i)
        if (c[i] != Complex(0.0)) l += c[i] * channels_[k].ops[i];
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          const Complex w = std::conj(c[i]) * c[j];
          if (w != Complex(0.0)) h += Complex(0.0, -0.5) * w * channels_[k].gram[i * n + j];
        }
      l_now_.push_back(std::move(l));
    }
    h_eff_ = std::move(h);
  }

  const LindbladSystem& sys_;
  std::vector<SparseMatrix> h_ops_, h_ops_adj_;
  std::vector<Channel> channels_;
  bool constant_ = false;
  SparseMatrix h_eff_;
  std::vector<SparseMatrix> l_now_;
};

// Dormand-Prince 5(4) tableau.
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192, kB5 = -2187.0 / 6784,
                 kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

class Integrator {
 public:
  Integrator(const LindbladSystem& sys, const SolverOptions& opt, bool hermitian)
      : gen_(sys), opt_(opt), hermitian_(hermitian) {
    if (!(opt.rel_tol > 0.0) || !(opt.abs_tol > 0.0)) {
      throw ParameterError("SolverOptions: tolerances must be positive");
    }
    const double span = sys.t_end() - sys.t_start();
    h_max_ = opt.max_step;
    if (h_max_ <= 0.0) {
      h_max_ = span > 0.0 ? span / 20.0 : std::numeric_limits<double>::infinity();
      const double fine = sys.finest_sample_step();
      if (fine > 0.0) h_max_ = std::min(h_max_, 4.0 * fine);
    }
    scale_ = std::max(std::abs(sys.t_start()), std::abs(sys.t_end()));
    scale_ = std::max(scale_, span);
  }

  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

  // Advances (t, y) to t_target.
  void advance(double& t, Matrix& y, double t_target) {
    if (t_target <= t) return;
    if (!have_k1_ || k1_time_ != t) {
      gen_.apply(t, y, k1_, hermitian_);
      have_k1_ = true;
      k1_time_ = t;
    }
    if (h_ <= 0.0) h_ = initial_step(t, y, t_target);
    const double h_floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(scale_, 1e-300);

    while (t < t_target) {
      double h = std::min({h_, h_max_, t_target - t});
      const bool clipped = h < h_;
      if (h < h_floor && t_target - t > h_floor) {
        std::ostringstream msg;
        msg << "step size underflow at t = " << t << " s (h = " << h << " s)";
        throw IntegrationFailure(msg.str(), t);
      }
      if (accepted_ + rejected_ >= opt_.max_steps) {
        throw IntegrationFailure("maximum number of integration steps exceeded", t);
      }
      const double err = try_step(t, y, h);
      if (err <= 1.0) {
        ++accepted_;
        t = (h == t_target - t) ? t_target : t + h;
        y.swap(y_new_);
        k1_.swap(k7_);
        k1_time_ = t;
        const double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (!clipped) h_ = h * fac;
        else h_ = std::max(h_, h * fac);
      } else {
        ++rejected_;
        h_ = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        if (h_ < h_floor) {
          std::ostringstream msg;
          msg << "step size underflow at t = " << t << " s";
          throw IntegrationFailure(msg.str(), t);
        }
      }
    }
  }

 private:
  double initial_step(double t, const Matrix& y, double t_target) {
    const double d0 = weighted_norm(y, y);
    const double d1 = weighted_norm(k1_, y);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * (t_target - t) : 0.01 * d0 / d1;
    h = std::min({h, h_max_, t_target - t});
    (void)t;
    return h;
  }

  double weighted_norm(const Matrix& v, const Matrix& ref) const {
    double sum = 0.0;
    const Eigen::Index n = v.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opt_.abs_tol + opt_.rel_tol * std::abs(ref.data()[i]);
      const double r = std::abs(v.data()[i]) / sc;
      sum += r * r;
    }
    return std::sqrt(sum / static_cast<double>(n));
  }

  double try_step(double t, const Matrix& y, double h) {
    tmp_ = y + h * kA21 * k1_;
    gen_.apply(t + kC2 * h, tmp_, k2_, hermitian_);
    tmp_ = y + h * (kA31 * k1_ + kA32 * k2_);
    gen_.apply(t + kC3 * h, tmp_, k3_, hermitian_);
    tmp_ = y + h * (kA41 * k1_ + kA42 * k2_ + kA43 * k3_);
    gen_.apply(t + kC4 * h, tmp_, k4_, hermitian_);
    tmp_ = y + h * (kA51 * k1_ + kA52 * k2_ + kA53 * k3_ + kA54 * k4_);
    gen_.apply(t + kC5 * h, tmp_, k5_, hermitian_);
    tmp_ = y + h * (kA61 * k1_ + kA62 * k2_ + kA63 * k3_ + kA64 * k4_ + kA65 * k5_);
    gen_.apply(t + h, tmp_, k6_, hermitian_);
    y_new_ = y + h * (kB1 * k1_ + kB3 * k3_ + kB4 * k4_ + kB5 * k5_ + kB6 * k6_);
    gen_.apply(t + h, y_new_, k7_, hermitian_);
    err_ = h * (kE1 * k1_ + kE3 * k3_ + kE4 * k4_ + kE5 * k5_ + kE6 * k6_ + kE7 * k7_);

    double sum = 0.0;
    const Eigen::Index n = y.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sc = opt_.abs_tol +
                        opt_.rel_tol * std::max(std::abs(y.data()[i]), std::abs(y_new_.data()[i]));
      const double r = std::abs(err_.data()[i]) / sc;
      sum += r * r;
    }
    const double err = std::sqrt(sum / static_cast<double>(n));
    return std::isfinite(err) ? err : 1e10;
  }

  Generator gen_;
  SolverOptions opt_;
  bool hermitian_;
  double h_max_ = 0.0;
  double h_ = 0.0;
  double scale_ = 1.0;
  long accepted_ = 0;
  long rejected_ = 0;
  bool have_k1_ = false;
  double k1_time_ = 0.0;
  Matrix k1_, k2_, k3_, k4_, k5_, k6_, k7_, tmp_, y_new_, err_;
};

void check_times(const LindbladSystem& sys, const std::vector<double>& times) {
  const double slack = 1e-12 * std::max(1.0, sys.t_end() - sys.t_start()) +
                       4 * std::numeric_limits<double>::epsilon() *
                           std::max(std::abs(sys.t_start()), std::abs(sys.t_end()));
  double prev = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (!std::isfinite(t)) throw ParameterError("evolve: non-finite output time");
    if (t < sys.t_start() - slack || t > sys.t_end() + slack) {
      std::ostringstream msg;
      msg << "evolve: output time " << t << " s outside [" << sys.t_start() << ", " << sys.t_end()
          << "]";
      throw ParameterError(msg.str());
    }
    if (t < prev) throw ParameterError("evolve: output times must be nondecreasing");
    prev = t;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Public integration entry points
// ---------------------------------------------------------------------------

Trajectory evolve(const LindbladSystem& sys, const DensityMatrix& rho0,
                  const std::vector<double>& output_times, const SolverOptions& options,
                  const std::vector<Observable>& observables) {
  if (rho0.dim() != sys.dim()) {
    throw InvalidDimension("evolve: initial state dimension " + std::to_string(rho0.dim()) +
                           " does not match the system dimension " + std::to_string(sys.dim()));
  }
  for (const auto& o : observables) {
    if (o.op.rows() != sys.dim() || o.op.cols() != sys.dim()) {
      throw InvalidDimension("evolve: observable '" + o.name + "' has the wrong dimension");
    }
  }
  if (output_times.empty()) throw ParameterError("evolve: no output times");
  check_times(sys, output_times);

  Trajectory traj;
  traj.times = output_times;
  for (const auto& o : observables) traj.observables[o.name].reserve(output_times.size());

  Integrator integ(sys, options, /*hermitian=*/true);
  double t = sys.t_start();
  Matrix y = rho0.matrix();
  for (std::size_t k = 0; k < output_times.size(); ++k) {
    const double target = std::clamp(output_times[k], sys.t_start(), sys.t_end());
    integ.advance(t, y, target);
    const double drift = std::abs(y.trace() - 1.0);
    traj.max_trace_drift = std::max(traj.max_trace_drift, drift);
    for (const auto& o : observables) {
      traj.observables[o.name].push_back((y * o.op).trace().real());
    }
    if (options.store_states || k + 1 == output_times.size()) {
      traj.states.emplace_back(y, DensityTolerance::relaxed());
    }
  }
  traj.steps_accepted = integ.accepted();
  traj.steps_rejected = integ.rejected();
  return traj;
}

DensityMatrix evolve_final(const LindbladSystem& sys, const DensityMatrix& rho0,
                           const SolverOptions& options) {
  SolverOptions opt = options;
  opt.store_states = false;
  return evolve(sys, rho0, {sys.t_end()}, opt).final_state();
}

std::vector<Matrix> evolve_matrices(const LindbladSystem& sys, const std::vector<Matrix>& inputs,
                                    double t0, double t1, const SolverOptions& options) {
  const int d = sys.dim();
  if (inputs.empty()) return {};
  for (const auto& m : inputs) {
    if (m.rows() != d || m.cols() != d) throw InvalidDimension("evolve_matrices: dimension mismatch");
  }
  if (t0 < sys.t_start() || t1 > sys.t_end() || t1 < t0) {
    throw ParameterError("evolve_matrices: interval outside the system time span");
  }
  Matrix y(d, d * static_cast<Eigen::Index>(inputs.size()));
  for (std::size_t k = 0; k < inputs.size(); ++k) y.middleCols(k * d, d) = inputs[k];

  Integrator integ(sys, options, /*hermitian=*/false);
  double t = t0;
  integ.advance(t, y, t1);

  std::vector<Matrix> out(inputs.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) out[k] = y.middleCols(k * d, d);
  return out;
}

Matrix process_superoperator(const LindbladSystem& sys, double t0, double t1,
                             const SolverOptions& options) {
  const int d = sys.dim();
  std::vector<Matrix> basis;
  basis.reserve(static_cast<std::size_t>(d) * d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) {
      Matrix e = Matrix::Zero(d, d);
      e(i, j) = 1.0;
      basis.push_back(std::move(e));
    }
  const auto evolved = evolve_matrices(sys, basis, t0, t1, options);
  Matrix s(d * d, d * d);
  for (std::size_t k = 0; k < evolved.size(); ++k) {
    s.col(static_cast<Eigen::Index>(k)) = Eigen::Map<const Vector>(evolved[k].data(), d * d);
  }
  return s;
}

Matrix apply_superoperator(const Matrix& superop, const Matrix& rho) {
  const Eigen::Index d = rho.rows();
  if (superop.rows() != d * d || superop.cols() != d * d) {
    throw InvalidDimension("apply_superoperator: dimension mismatch");
  }
  const Vector v = superop * Eigen::Map<const Vector>(rho.data(), d * d);
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

Matrix liouvillian(const LindbladSystem& sys, double t) {
  const int d = sys.dim();
  const Matrix id = identity(d);
  Matrix h_eff = sys.hamiltonian(t);
  std::vector<Matrix> ls;
  for (std::size_t k = 0; k < sys.collapse_channels().size(); ++k) {
    ls.push_back(sys.collapse_operator(k, t));
    h_eff -= Complex(0.0, 0.5) * (ls.back().adjoint() * ls.back());
  }
  Matrix l = Complex(0.0, -1.0) * tensor({id, h_eff}) + Complex(0.0, 1.0) * tensor({h_eff.conjugate().eval(), id});
  for (const auto& c : ls) l += tensor({c.conjugate().eval(), c});
  return l;
}

DensityMatrix evolve_superoperator_reference(const LindbladSystem& sys, const DensityMatrix& rho0,
                                             double t) {
  if (!sys.is_time_independent()) {
    throw ParameterError("evolve_superoperator_reference: all schedules must be constant");
  }
  const int d = sys.dim();
  if (d * d > 4096) throw InvalidDimension("evolve_superoperator_reference: dim^2 exceeds 4096");
  if (rho0.dim() != d) throw InvalidDimension("evolve_superoperator_reference: dimension mismatch");
  const Matrix prop = expm(liouvillian(sys, sys.t_start()) * t);
  Matrix out = apply_superoperator(prop, rho0.matrix());
  return DensityMatrix(0.5 * (out + out.adjoint()), DensityTolerance::relaxed());
}

}  // namespace wavelink
