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

#include "doctest.h"
#include "generators.hpp"
#include "wavelink/errors.hpp"
#include "wavelink/jc.hpp"

using namespace wavelink;

namespace {

constexpr double kG = 2 * M_PI * 6.8e6;

NodeDevice ideal_node(int truncation = 3, int levels = 3) {
  NodeDevice n;
  n.g_qr = kG;
  n.truncation = truncation;
  n.qubit_levels = levels;
  return n;
}

double fock_population(const DensityMatrix& r, int n) { return r(n, n).real(); }

// Rotation on a two-level block from the axis-angle formula.
Matrix rodrigues(int levels, int lo, double angle, double phase) {
  Matrix r = Matrix::Identity(levels, levels);
  const double c = std::cos(angle / 2), s = std::sin(angle / 2);
  r(lo, lo) = c;
  r(lo + 1, lo + 1) = c;
  r(lo, lo + 1) = -Complex(0, 1) * s * std::exp(Complex(0, -phase));
  r(lo + 1, lo) = -Complex(0, 1) * s * std::exp(Complex(0, phase));
  return r;
}

}  // namespace

TEST_CASE("swap time") {
  CHECK(std::abs(swap_time(1, kG) - 36.76e-9) < 0.1e-9);
  CHECK(swap_time(4, kG) == doctest::Approx(swap_time(1, kG) / 2));
  for (int n = 1; n <= 9; ++n) {
    CHECK(swap_time(n, kG) * std::sqrt(n) == doctest::Approx(swap_time(1, kG)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(swap_time(0, kG), ParameterError);
  CHECK_THROWS_AS(swap_time(1, 0.0), ParameterError);
}

TEST_CASE("resonant swap moves the excitation") {
  NodeLayout layout({ideal_node(2, 2)});
  DensityMatrix rho0 = DensityMatrix::pure(product_ket(layout.spec(), {1, 0}));
  auto out = run_sequence(layout, {SequenceStep::swap(0, swap_time(1, kG))}, rho0);
  CHECK(fock_population(out.resonator(0), 1) >= 0.9999);

  // Same through the master-equation path (finite but huge coherence times).
  NodeDevice slow = ideal_node(2, 2);
  slow.qubit_t1 = slow.resonator_t1 = 1e3;
  slow.qubit_t2 = slow.resonator_t2 = 2e3;
  NodeLayout l2({slow});
  auto out2 = run_sequence(l2, {SequenceStep::swap(0, swap_time(1, kG))}, rho0);
  CHECK(max_abs(out2.rho.matrix() - out.rho.matrix()) < 1e-7);
}

TEST_CASE("instantaneous drives match the axis-angle formula") {
  std::mt19937_64 rng(3);
  NodeLayout layout({ideal_node(1, 3)});
  for (int trial = 0; trial < 25; ++trial) {
    const double angle = testing::uniform(rng, -2 * M_PI, 2 * M_PI);
    const double phase = testing::uniform(rng, -M_PI, M_PI);
    const Transition tr = trial % 2 ? Transition::kEF : Transition::kGE;
    Matrix rho = testing::random_density(rng, layout.spec().total_dim());
    auto out = run_sequence(layout, {SequenceStep::drive(0, tr, angle, phase)}, DensityMatrix(rho));
    Matrix r = embed(layout.spec(), 0, rodrigues(3, tr == Transition::kGE ? 0 : 1, angle, phase));
    CHECK(max_abs(out.rho.matrix() - r * rho * r.adjoint()) < 1e-10);
  }
}

TEST_CASE("finite gaussian drive agrees with the instantaneous rotation") {
  NodeLayout layout({ideal_node(1, 3)});
  std::vector<SequenceStep> steps{SequenceStep::drive(0, Transition::kGE, M_PI / 2, 0.3)};
  ExecutionOptions opt;
  auto a = run_sequence(layout, steps, opt);
  opt.drive_sigma = 5e-9;
  auto b = run_sequence(layout, steps, opt);
  CHECK(max_abs(a.rho.matrix() - b.rho.matrix()) < 1e-6);
}

TEST_CASE("fock state preparation") {
  for (int n = 0; n <= 3; ++n) {
    auto s = prepare_fock(n, ideal_node(4));
    CHECK(fock_population(s.resonator(0), n) >= 0.999);
    CHECK(s.qubit(0)(0, 0).real() >= 0.999);
  }
  CHECK(fock_sequence(0, ideal_node()).empty());
  CHECK(fock_sequence(3, ideal_node(4)).size() == 6);
  CHECK_THROWS_AS(fock_sequence(3, ideal_node(3)), InvalidDimension);

  // Measured coherence of node 1.
  auto lossy = prepare_fock(2, measured_node(1, 3));
  CHECK(fock_population(lossy.resonator(0), 2) >= 0.95);
  CHECK(fock_population(lossy.resonator(0), 2) < 0.999);
}

TEST_CASE("fock preparation is reversible") {
  for (int n = 1; n <= 3; ++n) {
    NodeDevice d = ideal_node(4);
    NodeLayout layout({d});
    auto steps = fock_sequence(n, d);
    for (int k = n; k >= 1; --k) {
      steps.push_back(SequenceStep::swap(0, swap_time(k, d.g_qr)));
      steps.push_back(SequenceStep::drive(0, Transition::kGE, M_PI));
    }
    auto out = run_sequence(layout, steps);
    CHECK(fidelity(out.rho, layout.ground_state()) >= 0.999);
  }
}

TEST_CASE("superposition preparation") {
  const Vector p1 = (basis_ket(4, 0) + basis_ket(4, 1)) / std::sqrt(2.0);
  const Vector p2 = (basis_ket(4, 0) + basis_ket(4, 2)) / std::sqrt(2.0);
  auto s1 = prepare_superposition(1, ideal_node());
  CHECK(fidelity(s1.resonator(0), DensityMatrix::pure(p1)) >= 0.999);
  auto s2 = prepare_superposition(2, ideal_node());
  CHECK(fidelity(s2.resonator(0), DensityMatrix::pure(p2)) >= 0.995);
  auto alt = prepare_superposition(2, ideal_node(), {}, SuperpositionOrdering::kLongSecond);
  CHECK(fidelity(alt.resonator(0), DensityMatrix::pure(p2)) < 0.99);
  CHECK_THROWS_AS(prepare_superposition(3, ideal_node()), ParameterError);
  CHECK_THROWS_AS(prepare_superposition(2, ideal_node(3, 2)), InvalidDimension);
}

TEST_CASE("rabi trace model") {
  const double tau0 = swap_time(1, kG);
  CHECK(rabi_trace({0.0, 1.0}, kG, {tau0})[0] == doctest::Approx(1.0));
  for (double v : rabi_trace({1.0}, kG, {0.0, 1e-8, 5e-8})) CHECK(v == 0.0);
  CHECK_THROWS_AS(rabi_trace({-0.1, 1.0}, kG, {0.0}), ParameterError);
  CHECK_THROWS_AS(rabi_trace({0.6, 0.6}, kG, {0.0}), ParameterError);

  // Linear and bounded on random distributions.
  std::mt19937_64 rng(11);
  std::vector<double> times;
  for (int i = 0; i < 50; ++i) times.push_back(i * 4e-9);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(5), b(5);
    double sa = 0, sb = 0;
    for (int n = 0; n < 5; ++n) {
      a[n] = testing::uniform(rng, 0, 1);
      b[n] = testing::uniform(rng, 0, 1);
      sa += a[n];
      sb += b[n];
    }
    for (int n = 0; n < 5; ++n) {
      a[n] /= 2 * sa;
      b[n] /= 2 * sb;
    }
    std::vector<double> ab(5);
    for (int n = 0; n < 5; ++n) ab[n] = a[n] + b[n];
    auto ta = rabi_trace(a, kG, times), tb = rabi_trace(b, kG, times), tab = rabi_trace(ab, kG, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      CHECK(std::abs(tab[i] - ta[i] - tb[i]) < 1e-12);
      CHECK(tab[i] >= 0.0);
      CHECK(tab[i] <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("rabi trace matches a coherent-state JC simulation") {
  const int nmax = 12;
  HilbertSpec spec{Subsystem::qubit(2), Subsystem::resonator(nmax)};
  LindbladSystem sys(spec, 0.0, 200e-9);
  sys.add_hamiltonian(embed(spec, {{0, transition(2, 0, 1)}, {1, creation(nmax)}}),
                      Schedule::constant(2.0 * kG));
  Vector alpha = displacement(1.0, nmax + 10).col(0).head(nmax + 1);
  alpha.normalize();
  DensityMatrix rho0 = product_state({DensityMatrix::basis(2, 0), DensityMatrix::pure(alpha)});
  std::vector<double> times;
  for (int i = 0; i <= 100; ++i) times.push_back(i * 2e-9);
  Matrix pe = embed(spec, 0, transition(2, 0, 1).adjoint() * transition(2, 0, 1));
  auto traj = evolve(sys, rho0, times, {}, {{"pe", pe}});
  std::vector<double> poisson(nmax + 1);
  for (int n = 0; n <= nmax; ++n) poisson[n] = std::exp(-1.0) / std::tgamma(n + 1.0);
  auto model = rabi_trace(poisson, kG, times);
  for (std::size_t i = 0; i < times.size(); ++i) CHECK(std::abs(model[i] - traj.observables["pe"][i]) < 0.01);
}

TEST_CASE("sequence json round trip") {
  std::vector<SequenceStep> steps{
      SequenceStep::drive(0, Transition::kEF, M_PI, 0.25), SequenceStep::swap(1, 26e-9, Transition::kEF),
      SequenceStep::transfer(0, 0.5, 1), SequenceStep::idle(1e-7),
      SequenceStep::displace(1, Complex(0.3, -0.2))};
  auto back = sequence_from_json(sequence_to_json(steps));
  REQUIRE(back.size() == steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) CHECK(back[i] == steps[i]);
  CHECK_THROWS_AS(sequence_from_json(R"([{"kind": "teleport"}])"), ParameterError);
  CHECK_THROWS_AS(sequence_from_json(R"([{"kind": "transfer", "fraction": 1.5}])"), ParameterError);
  CHECK_THROWS_AS(sequence_from_json("{"), ParameterError);
}

TEST_CASE("layout validation") {
  NodeDevice bad = ideal_node();
  bad.qubit_levels = 4;
  CHECK_THROWS_AS(NodeLayout({bad}), InvalidDimension);
  bad = ideal_node();
  bad.resonator_t1 = 1e-6;
  bad.resonator_t2 = 3e-6;
  CHECK_THROWS_AS(NodeLayout({bad}), ParameterError);
  NodeLayout one({ideal_node()});
  CHECK_THROWS_AS(run_sequence(one, {}, DensityMatrix::basis(3, 0)), InvalidDimension);
  CHECK_THROWS_AS(run_sequence(one, {SequenceStep::transfer(0)}), ParameterError);
  CHECK_THROWS_AS(measured_node(3), ParameterError);
}

TEST_CASE("noon state with one photon") {
  NodeLayout layout({ideal_node(1), ideal_node(1)});
  auto s = prepare_noon(1, layout);
  DensityMatrix res = s.resonators();
  CHECK(fidelity(res, noon_target(1, 1, 1)) >= 0.99);
  HilbertSpec rs{Subsystem::resonator(1), Subsystem::resonator(1)};
  const int i11 = rs.flat_index(std::vector<int>{1, 1});
  CHECK(res(i11, i11).real() <= 1e-3);
}

TEST_CASE("noon state with two photons") {
  NodeLayout layout({ideal_node(2), ideal_node(2)});
  auto s = prepare_noon(2, layout);
  CHECK(fidelity(s.resonators(), noon_target(2, 2, 2)) >= 0.99);
  CHECK_THROWS_AS(prepare_noon(3, layout), ParameterError);
  CHECK_THROWS_AS(noon_sequence(1, NodeLayout({ideal_node()})), InvalidDimension);
}
