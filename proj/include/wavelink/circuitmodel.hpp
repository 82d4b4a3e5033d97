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

#ifndef WAVELINK_CIRCUITMODEL_HPP_
#define WAVELINK_CIRCUITMODEL_HPP_

#include <complex>
#include <iosfwd>
#include <utility>
#include <vector>

namespace wavelink::circuit {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kElementaryCharge = 1.602176634e-19;
inline constexpr double kHbar = 1.054571817e-34;

// ---------------------------------------------------------------------------
// Flux-tunable transmission-line resonator
// ---------------------------------------------------------------------------

/// Line section of length `length` grounded through a small capacitance at
/// one end and a SQUID at the other.
struct ResonatorGeometry {
  double length = 20.5e-3;
  double capacitance_per_length = 173e-12;
  double inductance_per_length = 402e-9;
  double end_capacitance = 1e-14;
  double squid_inductance = 0.3e-9;
  /// Tuning band x = k l in [n pi, (n + 1/2) pi].
  int mode_index = 1;

  void validate() const;
  double c_cav() const { return capacitance_per_length * length; }
  double l_cav() const { return inductance_per_length * length; }
};

struct ResonatorParams {
  double c_r = 0.0;
  double l_r = 0.0;
  double omega_r = 0.0;
};

/// Effective lumped C_r, L_r and frequency at x = k_n l.
ResonatorParams resonator_effective_params(double x, const ResonatorGeometry& geo);

/// Kerr anharmonicity in rad/s from the first-order level shifts
/// dE_n = -(6 n^2 + 6 n + 3)/4 B_k E_C, i.e. alpha = -3 B_k E_C / hbar.
double anharmonicity(double x, const ResonatorGeometry& geo);

/// [n pi, (n + 1/2) pi]: lambda/2 to lambda/4 end points of band n.
std::pair<double, double> mode_band(int mode_index);

struct AnharmonicityPoint {
  double x = 0.0;
  double omega_r = 0.0;
  double alpha = 0.0;
};

/// Evenly spaced sweep over the band of geo.mode_index, end points included.
std::vector<AnharmonicityPoint> anharmonicity_sweep(const ResonatorGeometry& geo, int points);

/// CSV rows x, omega_r_Hz, alpha_r_Hz (cyclic units).
void write_anharmonicity_csv(std::ostream& out, const std::vector<AnharmonicityPoint>& sweep);

// ---------------------------------------------------------------------------
// RF-SQUID coupler
// ---------------------------------------------------------------------------

/// Placement of the stray inductance in the coupler network. Both variants
/// share: line end -> L_S -> node A; A -> L_g -> ground; A -> L_j(flux) -> B.
/// kGroundStray: stray in series with L_g, B -> Z0 -> ground.
/// kSeriesStray: B -> stray -> Z0 -> ground.
enum class CouplerTopology { kGroundStray, kSeriesStray };

struct CouplerParams {
  double junction_inductance = 0.6e-9;
  double ground_inductance = 0.2e-9;
  double stray_inductance = 0.1e-9;
  /// Loop screening parameter in delta + beta sin(delta) = 2 pi flux.
  double beta = 0.33;
  double load = 50.0;
  CouplerTopology topology = CouplerTopology::kGroundStray;

  void validate() const;
};

/// Junction phase for external flux `phi_ext` in units of the flux quantum.
/// Warns when beta >= 1 (multivalued branch).
double coupler_phase(double phi_ext, const CouplerParams& params);

/// L_j0 / cos(delta); negative past pi/2. Throws ParameterError when
/// |cos delta| < 1e-9.
double junction_inductance(double delta, double l_j0);

/// Admittance seen at the grounded-capacitor end of the resonator.
std::complex<double> circuit_admittance(double omega, double phi_ext, const ResonatorGeometry& geo,
                                        const CouplerParams& params);

struct SearchWindow {
  double f_min = 3.5e9;
  double f_max = 4.5e9;
  int grid = 2001;
  double derivative_step = 1e-6;
};

struct Resonance {
  double phi_ext = 0.0;
  double omega_p = 0.0;
  double c_p = 0.0;
  double q0 = 0.0;
  double t1 = 0.0;
  double im_y = 0.0;
};

/// Root of Im Y with positive slope inside the window, C_p = Im Y'(w_p) / 2,
/// Q0 = w_p C_p / Re Y(w_p), T1 = Q0 / w_p. Throws ConvergenceError when the
/// window holds no root and ConditioningError when the slope is not
/// positive and finite.
Resonance resonance_and_lifetime(double phi_ext, const ResonatorGeometry& geo, const CouplerParams& params,
                                 const SearchWindow& window = {});

/// Resonances at each flux value, split across `workers` threads.
std::vector<Resonance> flux_sweep(const std::vector<double>& phis, const ResonatorGeometry& geo,
                                  const CouplerParams& params, const SearchWindow& window = {},
                                  int workers = 1);

/// CSV rows phi_ext, omega_p_Hz, Q0, T1_s.
void write_flux_sweep_csv(std::ostream& out, const std::vector<Resonance>& sweep);

// ---------------------------------------------------------------------------
// Enclosure modes and line velocity
// ---------------------------------------------------------------------------

struct BoxGeometry {
  double a = 20e-3;
  double b = 20e-3;
  double d = 0.5e-3;
  double epsilon_r = 11.4;
  double mu_r = 1.0;

  void validate() const;
  static BoxGeometry die();
  static BoxGeometry package();
};

struct BoxMode {
  int n = 0;
  int m = 0;
  int l = 0;
  double frequency = 0.0;  // Hz
};

/// All index triples in [0, max_index]^3 with at least two nonzero entries,
/// ascending in frequency (ties broken by indices).
std::vector<BoxMode> box_modes(const BoxGeometry& geo, int max_index);

void write_box_modes_csv(std::ostream& out, const std::vector<BoxMode>& modes);

/// c / sqrt((1 + epsilon_r) / 2) for a coplanar line on a substrate.
double cpw_phase_velocity(double epsilon_r);

/// v / (2 l), Hz.
double free_spectral_range(double length, double velocity);

}  // namespace wavelink::circuit

#endif  // WAVELINK_CIRCUITMODEL_HPP_
