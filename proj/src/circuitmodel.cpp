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

#include "wavelink/circuitmodel.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <tuple>

#include "wavelink/errors.hpp"

namespace wavelink::circuit {

namespace {

using Cplx = std::complex<double>;
constexpr Cplx kI(0.0, 1.0);

bool positive(double v) { return v > 0.0 && std::isfinite(v); }

}  // namespace

void ResonatorGeometry::validate() const {
  if (!positive(length) || !positive(capacitance_per_length) || !positive(inductance_per_length) ||
      !positive(end_capacitance) || !positive(squid_inductance)) {
    throw ParameterError("resonator geometry: all lengths, capacitances and inductances must be positive");
  }
  if (mode_index < 1) throw ParameterError("resonator geometry: mode_index must be >= 1");
}

ResonatorParams resonator_effective_params(double x, const ResonatorGeometry& geo) {
  geo.validate();
  if (!(x > 0.0)) throw ParameterError("resonator: x = k l must be positive");
  const double c_cav = geo.c_cav(), l_cav = geo.l_cav();
  ResonatorParams p;
  p.c_r = 0.5 * c_cav * (1.0 + std::sin(2.0 * x) / (2.0 * x));
  p.l_r = l_cav * c_cav / (x * x * p.c_r);
  p.omega_r = x / std::sqrt(c_cav * l_cav);
  return p;
}

double anharmonicity(double x, const ResonatorGeometry& geo) {
  const ResonatorParams p = resonator_effective_params(x, geo);
  // B_k = (1/4) cos^2 x / (1 + 2x / sin 2x), written without the 1/sin pole.
  const double s = std::sin(2.0 * x);
  const double c = std::cos(x);
  const double b_k = 0.25 * c * c * s / (s + 2.0 * x);
  const double e_c = kElementaryCharge * kElementaryCharge / (2.0 * p.c_r);
  auto shift = [&](int n) { return -(6.0 * n * n + 6.0 * n + 3.0) / 4.0 * b_k * e_c; };
  return ((shift(2) - shift(1)) - (shift(1) - shift(0))) / kHbar;
}

std::pair<double, double> mode_band(int mode_index) {
  if (mode_index < 0) throw ParameterError("mode_band: mode index must be nonnegative");
  return {mode_index * M_PI, (mode_index + 0.5) * M_PI};
}

std::vector<AnharmonicityPoint> anharmonicity_sweep(const ResonatorGeometry& geo, int points) {
  geo.validate();
  if (points < 2) throw ParameterError("anharmonicity_sweep: need at least 2 points");
  auto [lo, hi] = mode_band(geo.mode_index);
  std::vector<AnharmonicityPoint> out;
  out.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double x = lo + (hi - lo) * i / (points - 1);
    out.push_back({x, resonator_effective_params(x, geo).omega_r, anharmonicity(x, geo)});
  }
  return out;
}

void write_anharmonicity_csv(std::ostream& out, const std::vector<AnharmonicityPoint>& sweep) {
  out << "x,omega_r_Hz,alpha_r_Hz\n" << std::setprecision(12);
  for (const auto& p : sweep) {
    out << p.x << ',' << p.omega_r / (2 * M_PI) << ',' << p.alpha / (2 * M_PI) << '\n';
  }
}

// ---------------------------------------------------------------------------

void CouplerParams::validate() const {
  if (!positive(junction_inductance) || !positive(ground_inductance) || !positive(load)) {
    throw ParameterError("coupler: junction inductance, ground inductance and load must be positive");
  }
  if (!(stray_inductance >= 0.0)) throw ParameterError("coupler: stray inductance must be nonnegative");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ParameterError("coupler: beta must be nonnegative");
}

double coupler_phase(double phi_ext, const CouplerParams& params) {
  params.validate();
  if (!std::isfinite(phi_ext)) throw ParameterError("coupler_phase: flux must be finite");
  if (params.beta >= 1.0) warn("coupler_phase: beta >= 1, flux-phase relation is multivalued");
  const double beta = params.beta;
  const double target = 2.0 * M_PI * phi_ext;
  auto f = [&](double d) { return d + beta * std::sin(d) - target; };
  // f(target - beta) <= 0 <= f(target + beta).
  double lo = target - beta, hi = target + beta;
  double d = target;
  for (int it = 0; it < 200; ++it) {
    const double fd = f(d);
    if (std::abs(fd) <= 1e-14 * std::max(1.0, std::abs(target))) return d;
    if (fd < 0.0) lo = d; else hi = d;
    const double df = 1.0 + beta * std::cos(d);
    double next = df != 0.0 ? d - fd / df : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(target))) return next;
    d = next;
  }
  if (std::abs(f(d)) <= 1e-12) return d;
  throw ConvergenceError("coupler_phase: root finder did not converge");
}

double junction_inductance(double delta, double l_j0) {
  if (!positive(l_j0)) throw ParameterError("junction_inductance: L_j0 must be positive");
  const double c = std::cos(delta);
  if (std::abs(c) < 1e-9) throw ParameterError("junction_inductance: divergent inductance at cos(delta) = 0");
  return l_j0 / c;
}

std::complex<double> circuit_admittance(double omega, double phi_ext, const ResonatorGeometry& geo,
                                        const CouplerParams& params) {
  geo.validate();
  if (!positive(omega)) throw ParameterError("circuit_admittance: omega must be positive");
  const double cos_d = std::cos(coupler_phase(phi_ext, params));
  // Junction admittance cos(delta) / (i w L_j0) stays finite at cos = 0.
  const Cplx y_j = cos_d / (kI * omega * params.junction_inductance);
  const Cplx z_load = params.load;
  Cplx z_a;
  if (params.topology == CouplerTopology::kGroundStray) {
    const Cplx y_branch = y_j / (1.0 + y_j * z_load);
    z_a = 1.0 / (1.0 / (kI * omega * (params.ground_inductance + params.stray_inductance)) + y_branch);
  } else {
    const Cplx y_branch = y_j / (1.0 + y_j * (kI * omega * params.stray_inductance + z_load));
    z_a = 1.0 / (1.0 / (kI * omega * params.ground_inductance) + y_branch);
  }
  const Cplx z_end = kI * omega * geo.squid_inductance + z_a;
  // Lossless line of impedance Zc transforming z_end to the capacitor end.
  const double zc = std::sqrt(geo.inductance_per_length / geo.capacitance_per_length);
  const double t = std::tan(omega * std::sqrt(geo.inductance_per_length * geo.capacitance_per_length) * geo.length);
  const Cplx z_in = zc * (z_end + kI * zc * t) / (zc + kI * z_end * t);
  return kI * omega * geo.end_capacitance + 1.0 / z_in;
}

Resonance resonance_and_lifetime(double phi_ext, const ResonatorGeometry& geo, const CouplerParams& params,
                                 const SearchWindow& window) {
  if (!positive(window.f_min) || !(window.f_max > window.f_min) || window.grid < 2 ||
      !positive(window.derivative_step)) {
    throw ParameterError("resonance search: invalid window");
  }
  auto im_y = [&](double w) { return circuit_admittance(w, phi_ext, geo, params).imag(); };
  const double w0 = 2 * M_PI * window.f_min, w1 = 2 * M_PI * window.f_max;
  double prev_w = w0, prev = im_y(w0);
  for (int i = 1; i < window.grid; ++i) {
    const double w = w0 + (w1 - w0) * i / (window.grid - 1);
    const double v = im_y(w);
    // Zero crossing from below; crossings through poles go from + to -.
    if (prev < 0.0 && v >= 0.0) {
      double lo = prev_w, hi = w;
      for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (im_y(mid) < 0.0) lo = mid; else hi = mid;
      }
      Resonance r;
      r.phi_ext = phi_ext;
      r.omega_p = 0.5 * (lo + hi);
      const Cplx y = circuit_admittance(r.omega_p, phi_ext, geo, params);
      r.im_y = y.imag();
      const double h = window.derivative_step * r.omega_p;
      r.c_p = 0.5 * (im_y(r.omega_p + h) - im_y(r.omega_p - h)) / (2.0 * h);
      if (!positive(r.c_p)) {
        throw ConditioningError("resonance search: admittance slope at the root is not positive");
      }
      if (!(y.real() > 0.0)) throw ConditioningError("resonance search: no dissipation at the root");
      r.q0 = r.omega_p * r.c_p / y.real();
      r.t1 = r.q0 / r.omega_p;
      return r;
    }
    prev_w = w;
    prev = v;
  }
  std::ostringstream msg;
  msg << "resonance search: no root of Im Y in [" << window.f_min << ", " << window.f_max << "] Hz";
  throw ConvergenceError(msg.str());
}

std::vector<Resonance> flux_sweep(const std::vector<double>& phis, const ResonatorGeometry& geo,
                                  const CouplerParams& params, const SearchWindow& window, int workers) {
  std::vector<Resonance> out(phis.size());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(phis.size())));
  auto run = [&](std::size_t begin) {
    for (std::size_t i = begin; i < phis.size(); i += workers) {
      out[i] = resonance_and_lifetime(phis[i], geo, params, window);
    }
  };
  std::vector<std::future<void>> jobs;
  for (int w = 1; w < workers; ++w) jobs.push_back(std::async(std::launch::async, run, w));
  run(0);
  for (auto& j : jobs) j.get();
  return out;
}

void write_flux_sweep_csv(std::ostream& out, const std::vector<Resonance>& sweep) {
  out << "phi_ext,omega_p_Hz,Q0,T1_s\n" << std::setprecision(12);
  for (const auto& r : sweep) {
    out << r.phi_ext << ',' << r.omega_p / (2 * M_PI) << ',' << r.q0 << ',' << r.t1 << '\n';
  }
}

// ---------------------------------------------------------------------------

void BoxGeometry::validate() const {
  if (!positive(a) || !positive(b) || !positive(d) || !positive(epsilon_r) || !positive(mu_r)) {
    throw ParameterError("box geometry: dimensions and material constants must be positive");
  }
}

BoxGeometry BoxGeometry::die() { return BoxGeometry{}; }

BoxGeometry BoxGeometry::package() {
  BoxGeometry g;
  g.a = 27e-3;
  g.b = 27e-3;
  g.d = 5e-3;
  g.epsilon_r = 1.0;
  return g;
}

std::vector<BoxMode> box_modes(const BoxGeometry& geo, int max_index) {
  geo.validate();
  if (max_index < 1) throw ParameterError("box_modes: max_index must be >= 1");
  const double pre = kSpeedOfLight / (2 * M_PI * std::sqrt(geo.mu_r * geo.epsilon_r));
  std::vector<BoxMode> out;
  for (int n = 0; n <= max_index; ++n) {
    for (int m = 0; m <= max_index; ++m) {
      for (int l = 0; l <= max_index; ++l) {
        if ((n > 0) + (m > 0) + (l > 0) < 2) continue;
        const double kx = n * M_PI / geo.a, ky = m * M_PI / geo.b, kz = l * M_PI / geo.d;
        out.push_back({n, m, l, pre * std::sqrt(kx * kx + ky * ky + kz * kz)});
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const BoxMode& p, const BoxMode& q) {
    return std::tie(p.frequency, p.n, p.m, p.l) < std::tie(q.frequency, q.n, q.m, q.l);
  });
  return out;
}

void write_box_modes_csv(std::ostream& out, const std::vector<BoxMode>& modes) {
  out << "n,m,l,f_Hz\n" << std::setprecision(12);
  for (const auto& m : modes) out << m.n << ',' << m.m << ',' << m.l << ',' << m.frequency << '\n';
}

double cpw_phase_velocity(double epsilon_r) {
  if (!(epsilon_r >= 1.0)) throw ParameterError("cpw_phase_velocity: epsilon_r must be >= 1");
  return kSpeedOfLight / std::sqrt(0.5 * (1.0 + epsilon_r));
}

double free_spectral_range(double length, double velocity) {
  if (!positive(length) || !positive(velocity)) {
    throw ParameterError("free_spectral_range: length and velocity must be positive");
  }
  return velocity / (2.0 * length);
}

}  // namespace wavelink::circuit
