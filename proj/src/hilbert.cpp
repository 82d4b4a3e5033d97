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

#include "wavelink/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "wavelink/errors.hpp"

namespace wavelink {

namespace {

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw InvalidDimension(std::string(what) + ": operator is not square");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// HilbertSpec
// ---------------------------------------------------------------------------

Subsystem Subsystem::qubit(int levels) { return {SubsystemKind::kQubit, levels}; }
Subsystem Subsystem::resonator(int n_max) { return {SubsystemKind::kResonator, n_max + 1}; }
Subsystem Subsystem::virtual_cavity(int n_max) {
  return {SubsystemKind::kVirtualCavity, n_max + 1};
}
Subsystem Subsystem::manifold(int dim) { return {SubsystemKind::kManifold, dim}; }

HilbertSpec::HilbertSpec(std::vector<Subsystem> subsystems) : subsystems_(std::move(subsystems)) {
  total_dim_ = 1;
  for (const auto& s : subsystems_) {
    switch (s.kind) {
      case SubsystemKind::kQubit:
        if (s.dim != 2 && s.dim != 3) {
          throw InvalidDimension("qubit levels must be 2 or 3, got " + std::to_string(s.dim));
        }
        break;
      case SubsystemKind::kResonator:
      case SubsystemKind::kVirtualCavity:
        if (s.dim < 2) {
          throw InvalidDimension("bosonic truncation N_max must be >= 1");
        }
        break;
      case SubsystemKind::kManifold:
        if (s.dim < 1) throw InvalidDimension("manifold dimension must be >= 1");
        break;
    }
    total_dim_ *= s.dim;
  }
}

std::vector<int> HilbertSpec::dims() const {
  std::vector<int> out;
  out.reserve(subsystems_.size());
  for (const auto& s : subsystems_) out.push_back(s.dim);
  return out;
}

HilbertSpec HilbertSpec::appended(Subsystem extra) const {
  auto subs = subsystems_;
  subs.push_back(extra);
  return HilbertSpec(std::move(subs));
}

HilbertSpec HilbertSpec::with_dim(std::size_t index, int dim) const {
  auto subs = subsystems_;
  subs.at(index).dim = dim;
  return HilbertSpec(std::move(subs));
}

int HilbertSpec::flat_index(std::span<const int> levels) const {
  if (levels.size() != subsystems_.size()) {
    throw InvalidDimension("level list does not match the number of subsystems");
  }
  int index = 0;
  for (std::size_t k = 0; k < subsystems_.size(); ++k) {
    if (levels[k] < 0 || levels[k] >= subsystems_[k].dim) {
      throw InvalidDimension("level " + std::to_string(levels[k]) + " out of range for subsystem " +
                             std::to_string(k));
    }
    index = index * subsystems_[k].dim + levels[k];
  }
  return index;
}

std::vector<int> HilbertSpec::levels_of(int flat_index) const {
  std::vector<int> levels(subsystems_.size());
  for (std::size_t k = subsystems_.size(); k-- > 0;) {
    levels[k] = flat_index % subsystems_[k].dim;
    flat_index /= subsystems_[k].dim;
  }
  return levels;
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

Matrix annihilation(int n_max) {
  if (n_max < 1) throw InvalidDimension("annihilation: n_max must be >= 1");
  Matrix a = Matrix::Zero(n_max + 1, n_max + 1);
  for (int n = 1; n <= n_max; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Matrix creation(int n_max) { return annihilation(n_max).adjoint(); }

Matrix number_operator(int n_max) {
  if (n_max < 1) throw InvalidDimension("number_operator: n_max must be >= 1");
  Matrix n = Matrix::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k <= n_max; ++k) n(k, k) = k;
  return n;
}

Matrix identity(int dim) {
  if (dim < 1) throw InvalidDimension("identity: dimension must be >= 1");
  return Matrix::Identity(dim, dim);
}

Matrix parity(int n_max) {
  Matrix p = Matrix::Zero(n_max + 1, n_max + 1);
  for (int k = 0; k <= n_max; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return p;
}

Matrix qubit_lowering(int levels, double ef_ratio) {
  if (levels != 2 && levels != 3) throw InvalidDimension("qubit levels must be 2 or 3");
  Matrix b = Matrix::Zero(levels, levels);
  b(0, 1) = 1.0;
  if (levels == 3) b(1, 2) = std::sqrt(2.0) * ef_ratio;
  return b;
}

Matrix transition(int levels, int lower, int upper) {
  if (lower < 0 || upper >= levels || lower >= upper) {
    throw InvalidDimension("transition: invalid level pair");
  }
  Matrix t = Matrix::Zero(levels, levels);
  t(lower, upper) = 1.0;
  return t;
}

Matrix sigma_x(int levels) {
  Matrix s = Matrix::Zero(levels, levels);
  s(0, 1) = s(1, 0) = 1.0;
  return s;
}

Matrix sigma_y(int levels) {
  Matrix s = Matrix::Zero(levels, levels);
  s(0, 1) = -kI;
  s(1, 0) = kI;
  return s;
}

Matrix sigma_z(int levels) {
  Matrix s = Matrix::Zero(levels, levels);
  s(0, 0) = 1.0;
  s(1, 1) = -1.0;
  return s;
}

Matrix expm(const Matrix& generator) {
  require_square(generator, "expm");
  return generator.exp();
}

Matrix displacement(Complex alpha, int n_max) {
  if (n_max < 1) throw InvalidDimension("displacement: n_max must be >= 1");
  if (std::norm(alpha) > n_max / 4.0) {
    std::ostringstream msg;
    msg << "displacement: |alpha|^2 = " << std::norm(alpha) << " exceeds n_max/4 = " << n_max / 4.0
        << "; truncation error may be significant";
    warn(msg.str());
  }
  if (alpha == Complex{0.0, 0.0}) return identity(n_max + 1);
  const Matrix a = annihilation(n_max);
  Matrix generator = alpha * a.adjoint() - std::conj(alpha) * a;
  return expm(generator);
}

Matrix displacement_cropped(Complex alpha, int n_max, int padding) {
  if (n_max < 1) throw InvalidDimension("displacement: n_max must be >= 1");
  if (padding < 0) throw InvalidDimension("displacement: padding must be >= 0");
  const int big = n_max + padding;
  if (alpha == Complex{0.0, 0.0}) return identity(n_max + 1);
  const Matrix a = annihilation(big);
  Matrix generator = alpha * a.adjoint() - std::conj(alpha) * a;
  return expm(generator).topLeftCorner(n_max + 1, n_max + 1);
}

Matrix tensor(std::span<const Matrix> ops) {
  if (ops.empty()) throw InvalidDimension("tensor: empty operator list");
  Matrix out = ops[0];
  require_square(out, "tensor");
  for (std::size_t k = 1; k < ops.size(); ++k) {
    const Matrix& b = ops[k];
    require_square(b, "tensor");
    Matrix next(out.rows() * b.rows(), out.cols() * b.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = out(i, j) * b;
      }
    }
    out = std::move(next);
  }
  return out;
}

Matrix tensor(std::initializer_list<Matrix> ops) {
  return tensor(std::span<const Matrix>(ops.begin(), ops.size()));
}

Matrix tensor(const HilbertSpec& spec, std::span<const Matrix> ops) {
  if (ops.size() != spec.size()) {
    throw InvalidDimension("tensor: operator count does not match the Hilbert space layout");
  }
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if (ops[k].rows() != spec.dim(k)) {
      throw InvalidDimension("tensor: operator " + std::to_string(k) + " has dimension " +
                             std::to_string(ops[k].rows()) + ", layout expects " +
                             std::to_string(spec.dim(k)));
    }
  }
  return tensor(ops);
}

Matrix embed(const HilbertSpec& spec, std::size_t index, const Matrix& local) {
  return embed(spec, {{index, local}});
}

Matrix embed(const HilbertSpec& spec,
             std::initializer_list<std::pair<std::size_t, Matrix>> locals) {
  std::vector<Matrix> ops;
  ops.reserve(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) ops.push_back(identity(spec.dim(k)));
  for (const auto& [index, op] : locals) {
    if (index >= spec.size()) throw InvalidDimension("embed: subsystem index out of range");
    if (op.rows() != spec.dim(index) || op.cols() != spec.dim(index)) {
      throw InvalidDimension("embed: local operator dimension mismatch on subsystem " +
                             std::to_string(index));
    }
    ops[index] = ops[index] * op;
  }
  return tensor(ops);
}

Vector basis_ket(int dim, int level) {
  if (level < 0 || level >= dim) throw InvalidDimension("basis_ket: level out of range");
  Vector v = Vector::Zero(dim);
  v(level) = 1.0;
  return v;
}

Vector product_ket(const HilbertSpec& spec, std::span<const int> levels) {
  return basis_ket(spec.total_dim(), spec.flat_index(levels));
}

Vector product_ket(const HilbertSpec& spec, std::initializer_list<int> levels) {
  return product_ket(spec, std::span<const int>(levels.begin(), levels.size()));
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(Matrix rho, DensityTolerance tol) : rho_(std::move(rho)) {
  require_square(rho_, "DensityMatrix");
  if (rho_.rows() == 0) throw InvalidDimension("DensityMatrix: empty matrix");
  if (!rho_.allFinite()) throw InvalidState("DensityMatrix: non-finite entries");
  const double herm = max_abs(rho_ - rho_.adjoint());
  if (herm > tol.hermiticity) {
    throw InvalidState("DensityMatrix: not Hermitian (max |rho - rho^dag| = " +
                       std::to_string(herm) + ")");
  }
  rho_ = 0.5 * (rho_ + rho_.adjoint()).eval();
  const double trace = rho_.trace().real();
  if (std::abs(trace - 1.0) > tol.trace) {
    throw InvalidState("DensityMatrix: trace " + std::to_string(trace) + " differs from 1");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(rho_, Eigen::EigenvaluesOnly);
  const double lowest = eig.eigenvalues().minCoeff();
  if (lowest < tol.eigenvalue_floor) {
    throw InvalidState("DensityMatrix: negative eigenvalue " + std::to_string(lowest));
  }
}

DensityMatrix DensityMatrix::pure(const Vector& ket) {
  const double norm = ket.norm();
  if (norm == 0.0) throw InvalidState("DensityMatrix::pure: zero vector");
  const Vector psi = ket / norm;
  return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix DensityMatrix::basis(int dim, int level) { return pure(basis_ket(dim, level)); }

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

double DensityMatrix::expectation(const Matrix& op) const {
  if (op.rows() != rho_.rows()) throw InvalidDimension("expectation: dimension mismatch");
  return (rho_ * op).trace().real();
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

std::vector<double> DensityMatrix::populations() const {
  std::vector<double> p(rho_.rows());
  for (Eigen::Index k = 0; k < rho_.rows(); ++k) p[k] = rho_(k, k).real();
  return p;
}

DensityMatrix product_state(std::span<const DensityMatrix> factors) {
  std::vector<Matrix> ms;
  ms.reserve(factors.size());
  for (const auto& f : factors) ms.push_back(f.matrix());
  return DensityMatrix(tensor(ms));
}

DensityMatrix product_state(std::initializer_list<DensityMatrix> factors) {
  return product_state(std::span<const DensityMatrix>(factors.begin(), factors.size()));
}

DensityMatrix partial_trace(const DensityMatrix& rho, const HilbertSpec& spec,
                            std::span<const std::size_t> keep) {
  if (rho.dim() != spec.total_dim()) {
    throw InvalidDimension("partial_trace: state dimension does not match the layout");
  }
  std::vector<bool> kept(spec.size(), false);
  for (std::size_t k : keep) {
    if (k >= spec.size()) throw InvalidDimension("partial_trace: subsystem index out of range");
    if (kept[k]) throw InvalidDimension("partial_trace: duplicate subsystem index");
    kept[k] = true;
  }
  if (keep.empty()) throw InvalidDimension("partial_trace: nothing to keep");

  // Kept subsystems are returned in the order requested.
  int kept_dim = 1;
  for (std::size_t k : keep) kept_dim *= spec.dim(k);

  const int total = spec.total_dim();
  std::vector<int> kept_index(total), traced_index(total);
  for (int flat = 0; flat < total; ++flat) {
    const auto levels = spec.levels_of(flat);
    int ki = 0;
    for (std::size_t k : keep) ki = ki * spec.dim(k) + levels[k];
    int ti = 0;
    for (std::size_t k = 0; k < spec.size(); ++k) {
      if (!kept[k]) ti = ti * spec.dim(k) + levels[k];
    }
    kept_index[flat] = ki;
    traced_index[flat] = ti;
  }

  Matrix reduced = Matrix::Zero(kept_dim, kept_dim);
  const Matrix& m = rho.matrix();
  for (int i = 0; i < total; ++i) {
    for (int j = 0; j < total; ++j) {
      if (traced_index[i] == traced_index[j]) reduced(kept_index[i], kept_index[j]) += m(i, j);
    }
  }
  return DensityMatrix(std::move(reduced), DensityTolerance::relaxed());
}

DensityMatrix partial_trace(const DensityMatrix& rho, const HilbertSpec& spec,
                            std::initializer_list<std::size_t> keep) {
  return partial_trace(rho, spec, std::span<const std::size_t>(keep.begin(), keep.size()));
}

namespace {

Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
  const Eigen::VectorXd roots = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * roots.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw InvalidDimension("fidelity: dimension mismatch");
  const Matrix root = psd_sqrt(rho.matrix());
  Matrix inner = root * sigma.matrix() * root;
  inner = 0.5 * (inner + inner.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(inner, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
}

DensityMatrix conjugate(const DensityMatrix& rho, const Matrix& unitary) {
  if (unitary.rows() != rho.dim()) throw InvalidDimension("conjugate: dimension mismatch");
  return DensityMatrix(unitary * rho.matrix() * unitary.adjoint(), DensityTolerance::relaxed());
}

Matrix project_to_density(const Matrix& hermitian) {
  require_square(hermitian, "project_to_density");
  const Matrix h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const Eigen::Index n = lam.size();

  // Euclidean projection of the spectrum onto the probability simplex.
  std::vector<double> sorted(lam.data(), lam.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double shift = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) shift = candidate;
  }
  const Eigen::VectorXd projected = (lam.array() - shift).cwiseMax(0.0).matrix();
  return eig.eigenvectors() * projected.asDiagonal() * eig.eigenvectors().adjoint();
}

}  // namespace wavelink
