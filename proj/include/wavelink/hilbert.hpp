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

#ifndef WAVELINK_HILBERT_HPP_
#define WAVELINK_HILBERT_HPP_

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace wavelink {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// ---------------------------------------------------------------------------
// Hilbert-space layout
// ---------------------------------------------------------------------------

enum class SubsystemKind {
  kQubit,
  kResonator,
  kVirtualCavity,
  // Number-restricted multimode manifold (not a tensor factor of its modes);
  // used where the full product space would be needlessly large.
  kManifold,
};

/// One tensor factor. `dim` is the number of levels kept: qubit levels (2 or
/// 3), or N_max + 1 for bosonic modes.
struct Subsystem {
  SubsystemKind kind;
  int dim;

  static Subsystem qubit(int levels = 2);
  static Subsystem resonator(int n_max);
  static Subsystem virtual_cavity(int n_max);
  static Subsystem manifold(int dim);

  int n_max() const { return dim - 1; }
  bool is_bosonic() const {
    return kind == SubsystemKind::kResonator || kind == SubsystemKind::kVirtualCavity;
  }
  bool operator==(const Subsystem&) const = default;
};

/// Ordered list of subsystems; index 0 is the most significant factor of the
/// Kronecker product.
class HilbertSpec {
 public:
  HilbertSpec() = default;
  explicit HilbertSpec(std::vector<Subsystem> subsystems);
  HilbertSpec(std::initializer_list<Subsystem> subsystems)
      : HilbertSpec(std::vector<Subsystem>(subsystems)) {}

  std::size_t size() const { return subsystems_.size(); }
  int total_dim() const { return total_dim_; }
  int dim(std::size_t index) const { return subsystems_.at(index).dim; }
  const Subsystem& operator[](std::size_t index) const { return subsystems_.at(index); }
  const std::vector<Subsystem>& subsystems() const { return subsystems_; }
  std::vector<int> dims() const;

  HilbertSpec appended(Subsystem extra) const;
  HilbertSpec with_dim(std::size_t index, int dim) const;

  /// Flat index of a product basis state |l_0, l_1, ...>.
  int flat_index(std::span<const int> levels) const;
  std::vector<int> levels_of(int flat_index) const;

  bool operator==(const HilbertSpec& other) const { return subsystems_ == other.subsystems_; }

 private:
  std::vector<Subsystem> subsystems_;
  int total_dim_ = 1;
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Bosonic lowering operator on {|0>, ..., |n_max>}.
Matrix annihilation(int n_max);
Matrix creation(int n_max);
Matrix number_operator(int n_max);
Matrix identity(int dim);
Matrix parity(int n_max);

/// Transmon-style ladder lowering operator: <l-1|b|l> = sqrt(l), with the
/// e-f matrix element scaled by `ef_ratio` relative to that ladder value.
Matrix qubit_lowering(int levels, double ef_ratio = 1.0);

/// |lower><upper| on a `levels`-dimensional qubit.
Matrix transition(int levels, int lower, int upper);

/// Pauli operators on the g-e pair (embedded in `levels` levels).
/// Convention: sigma_z|g> = +|g>, sigma_z|e> = -|e>.
Matrix sigma_x(int levels = 2);
Matrix sigma_y(int levels = 2);
Matrix sigma_z(int levels = 2);

/// D(alpha) = exp(alpha a^dag - conj(alpha) a) in the truncated space.
/// Warns when |alpha|^2 > n_max / 4.
Matrix displacement(Complex alpha, int n_max);

/// D(alpha) computed in a larger space and cropped to n_max; accurate matrix
/// elements for levels <= n_max at the cost of exact unitarity.
Matrix displacement_cropped(Complex alpha, int n_max, int padding);

/// Matrix exponential (Pade approximant with scaling and squaring).
Matrix expm(const Matrix& generator);

/// Kronecker product in the given order.
Matrix tensor(std::span<const Matrix> ops);
Matrix tensor(std::initializer_list<Matrix> ops);
/// Kronecker product checked against a layout.
Matrix tensor(const HilbertSpec& spec, std::span<const Matrix> ops);

/// Places local operators on their subsystems, identity elsewhere.
Matrix embed(const HilbertSpec& spec, std::size_t index, const Matrix& local);
Matrix embed(const HilbertSpec& spec,
             std::initializer_list<std::pair<std::size_t, Matrix>> locals);

Vector basis_ket(int dim, int level);
Vector product_ket(const HilbertSpec& spec, std::span<const int> levels);
Vector product_ket(const HilbertSpec& spec, std::initializer_list<int> levels);

double max_abs(const Matrix& m);

// ---------------------------------------------------------------------------
// Density matrices
// ---------------------------------------------------------------------------

struct DensityTolerance {
  double hermiticity = 1e-10;
  double trace = 1e-9;
  double eigenvalue_floor = -1e-8;

  /// Floor used for integrator output.
  static DensityTolerance relaxed() { return {1e-8, 1e-8, -1e-6}; }
};

/// Hermitian, positive semidefinite, unit-trace matrix. Validated on
/// construction; immutable afterwards.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix rho, DensityTolerance tol = {});

  static DensityMatrix pure(const Vector& ket);
  static DensityMatrix basis(int dim, int level);
  static DensityMatrix maximally_mixed(int dim);

  const Matrix& matrix() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }
  Complex operator()(int row, int col) const { return rho_(row, col); }

  double expectation(const Matrix& op) const;
  double purity() const;
  /// Diagonal in the computational basis.
  std::vector<double> populations() const;

 private:
  Matrix rho_;
};

/// Product state in subsystem order.
DensityMatrix product_state(std::span<const DensityMatrix> factors);
DensityMatrix product_state(std::initializer_list<DensityMatrix> factors);

DensityMatrix partial_trace(const DensityMatrix& rho, const HilbertSpec& spec,
                            std::span<const std::size_t> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, const HilbertSpec& spec,
                            std::initializer_list<std::size_t> keep);

/// Uhlmann fidelity tr sqrt(sqrt(rho) sigma sqrt(rho)) (not squared).
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

/// Applies U rho U^dag.
DensityMatrix conjugate(const DensityMatrix& rho, const Matrix& unitary);

/// Projects a Hermitian matrix onto the unit-trace PSD set (Frobenius-closest
/// point: eigenvalues projected onto the probability simplex).
Matrix project_to_density(const Matrix& hermitian);

}  // namespace wavelink

#endif  // WAVELINK_HILBERT_HPP_
