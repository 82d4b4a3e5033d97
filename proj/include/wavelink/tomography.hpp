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

#ifndef WAVELINK_TOMOGRAPHY_HPP_
#define WAVELINK_TOMOGRAPHY_HPP_

#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "wavelink/hilbert.hpp"

namespace wavelink {

// ---------------------------------------------------------------------------
// Wigner function
// ---------------------------------------------------------------------------

/// W(alpha) = (2/pi) Tr[D(-alpha) rho D(alpha) P], with closed-form
/// displacement matrix elements so truncation does not distort it. Warns
/// when |alpha|^2 exceeds n_max.
double wigner(const DensityMatrix& rho, Complex alpha);

/// Same value from a measured Fock distribution of the displaced state:
/// (2/pi) sum_n (-1)^n P_n.
double wigner_from_distribution(const std::vector<double>& probs);

/// Square grid of n x n points covering [-extent, extent]^2.
std::vector<Complex> square_grid(int n, double extent);

/// CSV rows re_alpha, im_alpha, W. Points beyond the truncation produce a
/// single aggregated warning.
void write_wigner_csv(std::ostream& out, const DensityMatrix& rho, const std::vector<Complex>& alphas);

// ---------------------------------------------------------------------------
// Fock distributions from qubit Rabi traces
// ---------------------------------------------------------------------------

struct FockFitOptions {
  /// Fit a multiplicative exp(-t / T) envelope jointly with the weights.
  bool fit_decay = false;
  /// Largest accepted condition number of the sin^2 basis.
  double max_condition = 1e8;
};

struct FockFit {
  std::vector<double> probs;
  /// Fitted envelope time; infinity when the envelope is off.
  double decay_time = 0.0;
  double residual = 0.0;
};

/// Nonnegative least squares fit of P_e(t) = sum_n P_n sin^2(sqrt(n) g t),
/// n = 1..n_max; P_0 takes the remainder. The result sums to at most 1.
/// Throws ConditioningError when the times span less than 2 tau_0 or the
/// basis is ill conditioned.
FockFit fit_fock_distribution(const std::vector<double>& trace, const std::vector<double>& times,
                              double g, int n_max, const FockFitOptions& options = {});
std::vector<double> extract_fock_distribution(const std::vector<double>& trace,
                                              const std::vector<double>& times, double g, int n_max,
                                              const FockFitOptions& options = {});

/// Joint qubit outcomes after both qubits interact with their resonators:
/// series {P_gg, P_ge, P_eg, P_ee}. Returns P_{n1 n2} flattened with n2
/// fastest.
std::vector<double> extract_joint_distribution(const std::vector<std::vector<double>>& outcomes,
                                               const std::vector<double>& times, double g1, double g2,
                                               int n_max);

/// Forward model of extract_joint_distribution.
std::vector<std::vector<double>> joint_rabi_outcomes(const std::vector<double>& joint_probs, int n_max,
                                                     double g1, double g2,
                                                     const std::vector<double>& times);

/// Lawson-Hanson nonnegative least squares: argmin ||A x - b|| with x >= 0.
Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations = 0);

// ---------------------------------------------------------------------------
// Density-matrix reconstruction
// ---------------------------------------------------------------------------

/// Displacement tomography data. Each point carries one displacement
/// (single mode) or two (joint), and either a Fock distribution (flattened,
/// second mode fastest for joint data) or raw qubit traces on `times`.
struct TomographyDataset {
  std::vector<std::vector<Complex>> displacements;
  std::vector<std::vector<double>> distributions;
  /// Per point: one P_e series (single) or four joint outcome series.
  std::vector<std::vector<std::vector<double>>> traces;
  std::vector<double> times;
  double g = 0.0;
  /// Second-qubit coupling for joint traces; 0 means equal to g.
  double g2 = 0.0;
  int n_max = 4;

  bool is_joint() const;
  std::size_t size() const { return displacements.size(); }
  void validate() const;
  /// Distributions, extracted from traces where needed. The extraction
  /// cutoff is n_max + 4 (single) or n_max + 2 (joint) so the displaced tail
  /// is not folded into the low levels.
  std::vector<std::vector<double>> resolved_distributions() const;
};

std::string dataset_to_json(const TomographyDataset& ds);
TomographyDataset dataset_from_json(const std::string& text);

/// Noiseless Fock distributions <n| D(-alpha) rho D(alpha) |n>, n = 0..n_meas.
TomographyDataset synthesize_dataset(const DensityMatrix& rho, const std::vector<Complex>& alphas,
                                     int n_meas);
/// Joint version for a two-mode state of layout {resonator(n_a),
/// resonator(n_b)}; pairs are (alpha_1, alpha_2).
TomographyDataset synthesize_joint_dataset(const DensityMatrix& rho, const HilbertSpec& spec,
                                           const std::vector<std::pair<Complex, Complex>>& alphas,
                                           int n_meas);

/// Adds independent Gaussian noise of the given standard deviation to every
/// distribution entry.
TomographyDataset add_gaussian_noise(const TomographyDataset& ds, double sigma, std::mt19937_64& rng);

/// All pairs of a per-mode square grid.
std::vector<std::pair<Complex, Complex>> joint_grid(int n, double extent);

struct ReconstructionOptions {
  /// Reconstruction cutoff per mode; < 0 uses the dataset n_max.
  int n_max = -1;
  int max_iterations = 5000;
  double tolerance = 1e-9;
};

struct ReconstructionReport {
  int iterations = 0;
  double objective = 0.0;
  bool converged = false;
};

/// Least-squares state over {Hermitian, PSD, unit trace} by accelerated
/// projected gradient with the exact Frobenius projection.
DensityMatrix reconstruct_density_matrix(const TomographyDataset& ds,
                                         const ReconstructionOptions& options = {},
                                         ReconstructionReport* report = nullptr);

/// Joint two-mode reconstruction. With noon_n set, every element involving
/// a basis state of total photon number above noon_n is held at zero.
DensityMatrix reconstruct_joint(const TomographyDataset& ds, std::optional<int> noon_n = std::nullopt,
                                const ReconstructionOptions& options = {},
                                ReconstructionReport* report = nullptr);

// ---------------------------------------------------------------------------
// Displacement calibration and crosstalk
// ---------------------------------------------------------------------------

struct DisplacementCalibration {
  /// <n> per squared drive amplitude; |alpha| = sqrt(slope) A.
  double slope = 0.0;
  double intercept = 0.0;
  /// Largest amplitude inside the linear region.
  double valid_range = 0.0;
  int points_used = 0;
};

/// Linear fit of <n> against A^2 over the largest low-amplitude prefix whose
/// RMS residual stays within `residual_threshold` of the prefix's largest
/// <n>. Needs at least four points.
DisplacementCalibration calibrate_displacement(const std::vector<double>& amplitudes,
                                               const std::vector<double>& mean_photons,
                                               double residual_threshold = 0.02);

/// Commanded drive amplitudes to effective displacements.
struct CrosstalkMatrix {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Identity();
  void validate() const;
};

/// Off-diagonal magnitude |M_12 / M_22| that leaks `leaked` photons into
/// resonator 1 while resonator 2 is driven to `driven` photons.
double crosstalk_ratio(double leaked, double driven);

/// Drive amplitudes M^-1 d that produce the desired displacements d.
/// Throws SingularMatrix when cond(M) >= 1e6.
Eigen::Vector2cd correct_crosstalk(const Eigen::Vector2cd& desired, const CrosstalkMatrix& m);

}  // namespace wavelink

#endif  // WAVELINK_TOMOGRAPHY_HPP_
