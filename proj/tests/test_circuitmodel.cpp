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

#include <cmath>
#include <set>
#include <sstream>
#include <tuple>

#include "doctest.h"
#include "generators.hpp"
#include "wavelink/circuitmodel.hpp"
#include "wavelink/errors.hpp"

using namespace wavelink;
using namespace wavelink::circuit;

namespace {

std::vector<double> flux_grid(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

}  // namespace

TEST_CASE("effective resonator parameters") {
  const ResonatorGeometry geo;
  const auto half = resonator_effective_params(M_PI, geo);
  CHECK(half.c_r == doctest::Approx(geo.c_cav() / 2).epsilon(1e-12));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const double x = testing::uniform(rng, 0.1, 10.0);
    const auto p = resonator_effective_params(x, geo);
    CHECK(p.omega_r * std::sqrt(geo.c_cav() * geo.l_cav()) / x == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(1.0 / std::sqrt(p.l_r * p.c_r) == doctest::Approx(p.omega_r).epsilon(1e-12));
  }
  CHECK_THROWS_AS(resonator_effective_params(0.0, geo), ParameterError);
  ResonatorGeometry bad = geo;
  bad.length = -1.0;
  CHECK_THROWS_AS(resonator_effective_params(1.0, bad), ParameterError);
}

TEST_CASE("second eigenmode band covers the operating frequency") {
  const ResonatorGeometry geo;
  const auto [lo, hi] = mode_band(geo.mode_index);
  const double f_lo = resonator_effective_params(lo, geo).omega_r / (2 * M_PI);
  const double f_hi = resonator_effective_params(hi, geo).omega_r / (2 * M_PI);
  CHECK(f_lo < 4.058e9);
  CHECK(f_hi > 4.269e9);
  // lambda/4 end is 1.5x the lambda/2 end.
  CHECK(f_hi / f_lo == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("anharmonicity closed form and limits") {
  const ResonatorGeometry geo;
  for (int n = 1; n <= 3; ++n) CHECK(std::abs(anharmonicity(n * M_PI, geo)) < 1e-6);
  // Oracle: -3 B_k E_C / hbar with B_k from the 1/sin form away from its pole.
  std::mt19937_64 rng(4);
  for (int i = 0; i < 40; ++i) {
    const double x = testing::uniform(rng, 3.2, 4.6);
    const double c_r = 0.5 * geo.c_cav() * (1 + std::sin(2 * x) / (2 * x));
    const double b_k = 0.25 * std::pow(std::cos(x), 2) / (1 + 2 * x / std::sin(2 * x));
    const double oracle = -3 * b_k * kElementaryCharge * kElementaryCharge / (2 * c_r) / kHbar;
    CHECK(anharmonicity(x, geo) == doctest::Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("property: anharmonicity is continuous across the band") {
  ResonatorGeometry geo;
  for (int n = 1; n <= 3; ++n) {
    geo.mode_index = n;
    const auto sweep = anharmonicity_sweep(geo, 2001);
    double max_abs = 0.0;
    for (const auto& p : sweep) max_abs = std::max(max_abs, std::abs(p.alpha));
    for (std::size_t i = 1; i < sweep.size(); ++i) {
      CHECK(std::abs(sweep[i].alpha - sweep[i - 1].alpha) < 0.02 * max_abs);
    }
    CHECK(std::abs(sweep.front().alpha) < 1e-9 * max_abs);
  }
}

TEST_CASE("anharmonicity CSV") {
  std::ostringstream out;
  write_anharmonicity_csv(out, anharmonicity_sweep(ResonatorGeometry{}, 5));
  CHECK(out.str().rfind("x,omega_r_Hz,alpha_r_Hz\n", 0) == 0);
  CHECK_THROWS_AS(anharmonicity_sweep(ResonatorGeometry{}, 1), ParameterError);
}

// ---------------------------------------------------------------------------

TEST_CASE("coupler phase root") {
  CouplerParams p;
  CHECK(coupler_phase(0.0, p) == 0.0);
  for (double beta : {0.1, 0.3, 0.5}) {
    p.beta = beta;
    for (double phi : flux_grid(-1.0, 1.0, 401)) {
      const double d = coupler_phase(phi, p);
      CHECK(std::abs(d + beta * std::sin(d) - 2 * M_PI * phi) <= 1e-12);
      CHECK(coupler_phase(-phi, p) == doctest::Approx(-d).epsilon(1e-13));
    }
  }
  // Half flux quantum is a fixed point for any beta.
  CHECK(coupler_phase(0.5, p) == doctest::Approx(M_PI).epsilon(1e-14));
  p.beta = 1.5;
  std::vector<std::string> msgs;
  set_warning_handler([&](const std::string& m) { msgs.push_back(m); });
  const double d = coupler_phase(0.3, p);
  set_warning_handler(nullptr);
  CHECK(!msgs.empty());
  CHECK(std::abs(d + 1.5 * std::sin(d) - 2 * M_PI * 0.3) <= 1e-12);
}

TEST_CASE("junction inductance") {
  CHECK(junction_inductance(0.0, 0.6e-9) == doctest::Approx(0.6e-9));
  CHECK(junction_inductance(M_PI / 3, 0.6e-9) == doctest::Approx(1.2e-9));
  CHECK(junction_inductance(2.0, 0.6e-9) < 0.0);
  CHECK_THROWS_AS(junction_inductance(M_PI / 2, 0.6e-9), ParameterError);
}

TEST_CASE("admittance of a bare line reduces to the stub formula") {
  // Tiny SQUID and ground inductances short the far end, so
  // Y -> i w C_g - i cot(beta l) / Zc.
  ResonatorGeometry geo;
  geo.squid_inductance = 1e-18;
  CouplerParams p;
  p.ground_inductance = 1e-18;
  p.stray_inductance = 0.0;
  const double w = 2 * M_PI * 3.0e9;
  const double zc = std::sqrt(geo.inductance_per_length / geo.capacitance_per_length);
  const double bl = w * std::sqrt(geo.inductance_per_length * geo.capacitance_per_length) * geo.length;
  const auto y = circuit_admittance(w, 0.1, geo, p);
  CHECK(y.imag() == doctest::Approx(w * geo.end_capacitance - 1.0 / (zc * std::tan(bl))).epsilon(1e-6));
}

TEST_CASE("resonance root, slope and lifetime") {
  const ResonatorGeometry geo;
  const CouplerParams p;
  const auto r = resonance_and_lifetime(0.1, geo, p);
  CHECK(std::abs(r.im_y) <= 1e-9);
  CHECK(r.t1 > 0.0);
  CHECK(r.omega_p / (2 * M_PI) > 3.5e9);
  CHECK(r.omega_p / (2 * M_PI) < 4.5e9);
  CHECK(r.q0 == doctest::Approx(r.omega_p * r.t1));
  // Independent slope estimate.
  const double h = 1e3;
  const double slope = (circuit_admittance(r.omega_p + h, 0.1, geo, p).imag() -
                        circuit_admittance(r.omega_p - h, 0.1, geo, p).imag()) / (2 * h);
  CHECK(r.c_p == doctest::Approx(slope / 2).epsilon(1e-4));

  SearchWindow narrow;
  narrow.f_min = 1.0e9;
  narrow.f_max = 1.1e9;
  CHECK_THROWS_AS(resonance_and_lifetime(0.1, geo, p, narrow), ConvergenceError);
}

TEST_CASE("flux sweep is periodic and brackets the lifetime range") {
  const ResonatorGeometry geo;
  const CouplerParams p;
  const auto phis = flux_grid(0.0, 0.5, 51);
  const auto sweep = flux_sweep(phis, geo, p, {}, 2);
  double t_min = INFINITY, t_max = 0.0;
  for (const auto& r : sweep) {
    CHECK(std::abs(r.im_y) <= 1e-9);
    t_min = std::min(t_min, r.t1);
    t_max = std::max(t_max, r.t1);
  }
  CHECK(t_min >= 1.5e-9);
  CHECK(t_min <= 6e-9);
  // Coupling-off point: the load decouples.
  CHECK(t_max > 1e-6);

  for (double phi : {0.13, 0.37}) {
    const auto a = resonance_and_lifetime(phi, geo, p);
    const auto b = resonance_and_lifetime(phi + 1.0, geo, p);
    const auto c = resonance_and_lifetime(-phi, geo, p);
    CHECK(b.omega_p == doctest::Approx(a.omega_p).epsilon(1e-9));
    CHECK(b.t1 == doctest::Approx(a.t1).epsilon(1e-6));
    CHECK(c.omega_p == doctest::Approx(a.omega_p).epsilon(1e-9));
  }

  const auto serial = flux_sweep(phis, geo, p, {}, 1);
  for (std::size_t i = 0; i < phis.size(); ++i) CHECK(serial[i].t1 == sweep[i].t1);

  std::ostringstream out;
  write_flux_sweep_csv(out, sweep);
  CHECK(out.str().rfind("phi_ext,omega_p_Hz,Q0,T1_s\n", 0) == 0);
}

TEST_CASE("series-stray topology stays selectable") {
  CouplerParams p;
  p.topology = CouplerTopology::kSeriesStray;
  const auto sweep = flux_sweep(flux_grid(0.0, 0.5, 26), ResonatorGeometry{}, p);
  double t_min = INFINITY;
  for (const auto& r : sweep) t_min = std::min(t_min, r.t1);
  CHECK(t_min > 0.0);
  CHECK(resonance_and_lifetime(0.2, ResonatorGeometry{}, p).omega_p !=
        resonance_and_lifetime(0.2, ResonatorGeometry{}, CouplerParams{}).omega_p);
}

// ---------------------------------------------------------------------------

TEST_CASE("box modes of die and package") {
  const auto die = box_modes(BoxGeometry::die(), 3);
  REQUIRE(!die.empty());
  CHECK(std::tie(die[0].n, die[0].m, die[0].l) == std::make_tuple(1, 1, 0));
  CHECK(std::abs(die[0].frequency - 3.14e9) <= 0.01e9);
  const auto pkg = box_modes(BoxGeometry::package(), 3);
  const auto it = std::find_if(pkg.begin(), pkg.end(), [](const BoxMode& m) {
    return m.n == 1 && m.m == 1 && m.l == 0;
  });
  REQUIRE(it != pkg.end());
  CHECK(std::abs(it->frequency - 7.85e9) <= 0.01e9);
  // Oracle: c sqrt(2) / (2 a sqrt(eps)).
  CHECK(die[0].frequency == doctest::Approx(kSpeedOfLight * std::sqrt(2.0) / (2 * 20e-3 * std::sqrt(11.4))));
}

TEST_CASE("property: box modes are ordered, symmetric and scale inversely") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    BoxGeometry g;
    g.a = g.b = testing::uniform(rng, 5e-3, 50e-3);
    g.d = testing::uniform(rng, 0.2e-3, 20e-3);
    g.epsilon_r = testing::uniform(rng, 1.0, 12.0);
    const auto modes = box_modes(g, 3);
    std::set<std::tuple<int, int, int>> seen;
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const auto& m = modes[i];
      CHECK((m.n > 0) + (m.m > 0) + (m.l > 0) >= 2);
      if (i > 0) CHECK(modes[i - 1].frequency <= m.frequency);
      seen.insert({m.n, m.m, m.l});
    }
    for (const auto& m : modes) CHECK(seen.count({m.m, m.n, m.l}) == 1);
    BoxGeometry big = g;
    big.a *= 2;
    big.b *= 2;
    big.d *= 2;
    const auto scaled = box_modes(big, 3);
    REQUIRE(scaled.size() == modes.size());
    for (std::size_t i = 0; i < modes.size(); ++i) {
      CHECK(scaled[i].frequency == doctest::Approx(modes[i].frequency / 2).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(box_modes(BoxGeometry{}, 0), ParameterError);
}

TEST_CASE("free spectral range of the 2 m line") {
  const double v = cpw_phase_velocity(11.4);
  CHECK(v == doctest::Approx(kSpeedOfLight / std::sqrt(6.2)));
  const double fsr = free_spectral_range(2.0, v);
  CHECK(std::abs(fsr - 30.1e6) < 0.05e6);
  CHECK(std::abs(fsr - 31e6) / 31e6 < 0.05);
  CHECK_THROWS_AS(free_spectral_range(0.0, v), ParameterError);
  CHECK_THROWS_AS(cpw_phase_velocity(0.5), ParameterError);
}
