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

#ifndef WAVELINK_PULSES_HPP_
#define WAVELINK_PULSES_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "wavelink/hilbert.hpp"
#include "wavelink/lindblad.hpp"
#include "wavelink/timegrid.hpp"

namespace wavelink {

/// Default sampling for envelopes: 0.1 ns spacing over a 200 ns window.
inline constexpr double kDefaultPulseStep = 0.1e-9;
inline constexpr double kDefaultPulseSpan = 200e-9;

/// Complex envelope on a uniform grid. Wavepacket envelopes are in 1/sqrt(s)
/// with unit discrete norm; coupler rates are real, in rad/s.
struct PulseShape {
  TimeGrid grid;
  std::vector<Complex> values;

  PulseShape() = default;
  PulseShape(TimeGrid g, std::vector<Complex> v);
  PulseShape(TimeGrid g, const std::vector<double>& v);

  int size() const { return grid.count; }
  double time(int i) const { return grid.time(i); }

  /// Sum |u_i|^2 dt.
  double norm() const;
  /// Sum u_i dt.
  Complex area() const;
  std::vector<double> real() const;
  std::vector<double> abs2() const;
  /// Linear interpolation, clamped at the ends.
  Complex operator()(double t) const;

  PulseShape normalized() const;
  PulseShape conjugated() const;
  PulseShape scaled(Complex factor) const;
  /// Running integral I_i = sum_{k<i} |u_k|^2 dt + |u_i|^2 dt / 2 (trapezoid).
  std::vector<double> cumulative_norm() const;

  Schedule to_schedule() const;
};

/// Grid centred on t0 with the default span and spacing.
TimeGrid default_grid(double t0);

/// u(t) = sqrt(kappa_c / 4) sech(kappa_c (t - t0) / 2), renormalized on the
/// grid. Warns when the grid does not cover 10 / kappa_c on both sides.
PulseShape sech_wavepacket(double kappa_c, double t0, const TimeGrid& grid);

/// kappa(t) = kappa_m e^{x} / (1 + e^{x}), x = kappa_c (t - t0).
PulseShape optimal_release_kappa(double kappa_c, double kappa_m, double t0, const TimeGrid& grid);

/// Time mirror of optimal_release_kappa about t0; absorbs a sech packet.
PulseShape optimal_capture_kappa(double kappa_c, double kappa_m, double t0, const TimeGrid& grid);

/// f(t) = cos(theta) e^{theta (t - t0) / w} / (2 cosh(pi (t - t0) / (2 w))).
/// Positive theta gives the heavier tail at late times. The raw integral
/// at theta = 0 is w; `normalize` rescales so that sum f dt = 1.
PulseShape skewed_sech(double theta, double w, double t0, const TimeGrid& grid,
                       bool normalize = false);

/// Rectangle [t_on, t_on + width) of the given amplitude convolved with a
/// Gaussian of standard deviation rise_w. rise_w = 0 gives the exact
/// rectangle.
PulseShape flattop(double width, double rise_w, double amplitude, const TimeGrid& grid,
                   double t_on = 0.0);

/// Discrete Gaussian convolution, kernel truncated at 5 sigma and normalized
/// to unit sum; samples beyond the ends repeat the endpoint values.
PulseShape gaussian_filter(const PulseShape& p, double sigma);

/// 10%-90% rise time of the leading edge of a real, nonnegative pulse,
/// measured against its maximum (linear interpolation between samples).
double rise_time_10_90(const PulseShape& p);

struct SkewedSechFit {
  double theta = 0.0;
  double w = 0.0;
  double t0 = 0.0;
  double amplitude = 0.0;
  /// RMS misfit.
  double residual = 0.0;
};

struct FitOptions {
  int max_function_evaluations = 4000;
};

/// Least-squares fit of amplitude * f(t; theta, w, t0) (raw formula).
/// Throws FitFailure carrying {theta, w, t0, amplitude} if no start point
/// converges.
SkewedSechFit fit_skewed_sech(const std::vector<double>& times, const std::vector<double>& values,
                              const FitOptions& options = {});

/// Three-column CSV: time_s, re, im.
void write_pulse_csv(std::ostream& out, const PulseShape& p);

}  // namespace wavelink

#endif  // WAVELINK_PULSES_HPP_
