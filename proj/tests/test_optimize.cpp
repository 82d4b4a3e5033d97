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
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "wavelink/errors.hpp"
#include "wavelink/optimize.hpp"

using namespace wavelink;

namespace {

struct QuietWarnings {
  int count = 0;
  QuietWarnings() {
    set_warning_handler([this](const std::string&) { ++count; });
  }
  ~QuietWarnings() { set_warning_handler(nullptr); }
};

std::vector<double> evenly(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

// Knot values sampled from an analytic rate at the knot times.
std::vector<double> sample_at(const PulseShape& p, const std::vector<double>& times, double cap) {
  std::vector<double> v;
  for (double t : times) v.push_back(std::clamp(p(t).real(), 0.0, cap));
  return v;
}

}  // namespace

TEST_CASE("knot interpolation, hold and filter") {
  PulseParameterization p;
  p.knot_times = {0.0, 10e-9, 20e-9};
  p.filter_sigma = 0.0;
  const TimeGrid g = TimeGrid::spanning(-10e-9, 30e-9, 0.1e-9);
  const auto k = p.kappa({1e8, 3e8, 2e8}, g);
  CHECK(k(0.0).real() == doctest::Approx(1e8));
  CHECK(k(5e-9).real() == doctest::Approx(2e8));
  CHECK(k(10e-9).real() == doctest::Approx(3e8));
  CHECK(k(-8e-9).real() == doctest::Approx(1e8));
  CHECK(k(28e-9).real() == doctest::Approx(2e8));
  p.filter_sigma = 3e-9;
  const auto f = p.kappa({0.0, 6e8, 0.0}, g);
  double peak = 0.0;
  for (double v : f.real()) {
    CHECK(v >= 0.0);
    peak = std::max(peak, v);
  }
  CHECK(peak < 6e8);
  // The filter preserves the area away from the window ends.
  CHECK(f.area().real() == doctest::Approx(p.kappa({0.0, 6e8, 0.0}, g).area().real()).epsilon(1e-3) );
}

TEST_CASE("parameterization validation") {
  PulseParameterization p;
  p.knot_times = {0.0, 1e-9};
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.knot_times = evenly(0.0, 1e-9, 25);
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.knot_times = {0.0, 2e-9, 1e-9};
  CHECK_THROWS_AS(p.validate(), ParameterError);
  p.knot_times = default_knot_times(6);
  CHECK_NOTHROW(p.validate());
  CHECK_THROWS_AS(p.validate_values(std::vector<double>(5, 0.0)), InvalidDimension);
  CHECK_THROWS_AS(p.validate_values(std::vector<double>(6, 1e9)), ParameterError);
  CHECK_THROWS_AS(p.validate_values(std::vector<double>(6, -1.0)), ParameterError);
  p.stage = OptimizationStage::kJoint;
  CHECK(p.dimension() == 12);
}

TEST_CASE("objective sanity points") {
  TransferScenario sc;
  PulseParameterization p;
  p.knot_times = evenly(sc.t0 - 12e-9, sc.t0 + 8e-9, 24);
  p.filter_sigma = 0.0;
  CHECK(objective_transfer(std::vector<double>(24, 0.0), p, sc) == doctest::Approx(0.0).epsilon(1e-12));

  const auto kappa = optimal_release_kappa(sc.kappa_c, 0.6e9, sc.t0, sc.grid());
  const auto knots = sample_at(kappa, p.knot_times, p.kappa_max);
  // Linear interpolation over ~0.9 ns knot spacing costs a few percent.
  const double unfiltered = objective_transfer(knots, p, sc);
  CHECK(unfiltered >= 0.95);
  p.filter_sigma = 3e-9;
  const double filtered = objective_transfer(knots, p, sc);
  CHECK(filtered >= unfiltered - 0.05);
  CHECK(filtered <= 1.0 + 1e-9);
}

TEST_CASE("capture and joint objectives") {
  TransferScenario sc;
  PulseParameterization cap;
  cap.knot_times = evenly(sc.t0 - 8e-9, sc.t0 + 12e-9, 24);
  cap.filter_sigma = 0.0;
  cap.stage = OptimizationStage::kCapture;
  const auto kc = optimal_capture_kappa(sc.kappa_c, 0.6e9, sc.t0, sc.grid());
  CHECK(objective_transfer(sample_at(kc, cap.knot_times, cap.kappa_max), cap, sc) >= 0.9);

  PulseParameterization joint;
  joint.knot_times = evenly(sc.t0 - 12e-9, sc.t0 + 12e-9, 24);
  joint.filter_sigma = 0.0;
  joint.stage = OptimizationStage::kJoint;
  const auto kr = optimal_release_kappa(sc.kappa_c, 0.6e9, sc.t0, sc.grid());
  auto values = sample_at(kr, joint.knot_times, joint.kappa_max);
  const auto capture = sample_at(kc, joint.knot_times, joint.kappa_max);
  values.insert(values.end(), capture.begin(), capture.end());
  const double e = objective_transfer(values, joint, sc);
  CHECK(e >= 0.9);
  CHECK(e <= 1.0 + 1e-6);
  // A closed emitter: the emitted mode is undefined, which scores 0.
  QuietWarnings quiet;
  std::fill(values.begin(), values.begin() + 24, 0.0);
  CHECK(objective_transfer(values, joint, sc) == 0.0);
  CHECK(quiet.count >= 1);
}

// ---------------------------------------------------------------------------

TEST_CASE("optimizer locates a 1-D quadratic maximum") {
  OptimizerSettings s;
  s.budget = 40;
  s.seed = 3;
  const auto r = optimize_pulse([](const std::vector<double>& x) { return -(x[0] - 0.3) * (x[0] - 0.3); },
                                Bounds::uniform(1, 0.0, 1.0), s);
  CHECK(std::abs(r.best_params[0] - 0.3) < 5e-3);
  CHECK(r.log.size() <= 40);
}

TEST_CASE("property: optimizer respects bounds and logs consistently") {
  const Bounds b{{-1.0, 2.0, 0.0}, {1.0, 3.0, 0.5}};
  auto f = [](const std::vector<double>& x) {
    return -std::pow(x[0] - 0.2, 2) - std::pow(x[1] - 2.9, 2) - 4 * std::pow(x[2] - 0.1, 2);
  };
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    OptimizerSettings s;
    s.seed = seed;
    s.budget = 60;
    const auto r = optimize_pulse(f, b, s);
    double running = -INFINITY;
    double max_logged = -INFINITY;
    for (const auto& e : r.log) {
      for (int i = 0; i < 3; ++i) {
        CHECK(e.params[i] >= b.lower[i]);
        CHECK(e.params[i] <= b.upper[i]);
      }
      CHECK(e.value == doctest::Approx(f(e.params)));
      const double next = std::max(running, e.value);
      CHECK(next >= running);
      running = next;
      max_logged = std::max(max_logged, e.value);
    }
    CHECK(r.best_value == max_logged);
    CHECK(f(r.best_params) == r.best_value);
    CHECK(r.log.size() <= 60);
  }
}

TEST_CASE("optimizer is deterministic for a seed") {
  auto f = [](const std::vector<double>& x) { return std::sin(3 * x[0]) * std::cos(2 * x[1]); };
  OptimizerSettings s;
  s.seed = 17;
  s.budget = 30;
  const auto a = optimize_pulse(f, Bounds::uniform(2, 0.0, 2.0), s);
  const auto b = optimize_pulse(f, Bounds::uniform(2, 0.0, 2.0), s);
  REQUIRE(a.log.size() == b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    CHECK(a.log[i].params == b.log[i].params);
    CHECK(a.log[i].value == b.log[i].value);
    CHECK(a.log[i].phase == b.log[i].phase);
  }
  s.workers = 3;
  const auto c = optimize_pulse(f, Bounds::uniform(2, 0.0, 2.0), s);
  for (std::size_t i = 0; i < a.log.size(); ++i) CHECK(a.log[i].params == c.log[i].params);
}

TEST_CASE("property: doubling the budget does not hurt on average") {
  // Two-bump function with a narrow global peak.
  auto f = [](const std::vector<double>& x) {
    const double a = std::exp(-20 * (std::pow(x[0] - 0.7, 2) + std::pow(x[1] - 0.2, 2)));
    const double b = 0.6 * std::exp(-5 * (std::pow(x[0] - 0.2, 2) + std::pow(x[1] - 0.7, 2)));
    return a + b;
  };
  double small = 0.0, large = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    OptimizerSettings s;
    s.seed = seed;
    s.budget = 25;
    small += optimize_pulse(f, Bounds::uniform(2, 0.0, 1.0), s).best_value;
    s.budget = 50;
    large += optimize_pulse(f, Bounds::uniform(2, 0.0, 1.0), s).best_value;
  }
  CHECK(large >= small - 1e-12);
}

TEST_CASE("optimizer failure handling") {
  CHECK_THROWS_AS(optimize_pulse([](const std::vector<double>&) { return 0.0; }, Bounds::uniform(1, 0, 1),
                                 OptimizerSettings{.budget = 10}),
                  ParameterError);
  CHECK_THROWS_AS(optimize_pulse([](const std::vector<double>&) { return 0.0; }, Bounds{{0.0}, {0.0}}),
                  ParameterError);
  QuietWarnings quiet;
  CHECK_THROWS_AS(optimize_pulse([](const std::vector<double>&) -> double { throw std::runtime_error("x"); },
                                 Bounds::uniform(2, 0, 1), OptimizerSettings{.budget = 20}),
                  ConvergenceError);
  // Intermittent failures are skipped.
  int calls = 0;
  const auto r = optimize_pulse(
      [&](const std::vector<double>& x) {
        if (++calls % 3 == 0) return std::numeric_limits<double>::quiet_NaN();
        return -x[0] * x[0];
      },
      Bounds::uniform(1, -1, 1), OptimizerSettings{.budget = 30});
  CHECK(std::abs(r.best_params[0]) < 0.05);
  int failed = 0;
  for (const auto& e : r.log) failed += e.ok ? 0 : 1;
  CHECK(failed > 0);
}

TEST_CASE("report serialization") {
  OptimizerSettings s;
  s.budget = 20;
  const auto r = optimize_pulse([](const std::vector<double>& x) { return -std::abs(x[0] - 0.5); },
                                Bounds::uniform(2, 0.0, 1.0), s);
  const auto j = nlohmann::json::parse(r.to_json());
  CHECK(j["best_efficiency"].get<double>() == r.best_value);
  CHECK(j["log"].size() == r.log.size());
  CHECK(j["settings"]["kernel"] == "squared_exponential_isotropic");
  CHECK((j["method"] == "surrogate" || j["method"] == "simplex"));
  std::ostringstream csv;
  r.write_log_csv(csv);
  const std::string text = csv.str();
  CHECK(text.rfind("index,phase,ok,value,wall_time_s,p0,p1\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) == r.log.size() + 1);
}

TEST_CASE("six-knot emission optimization, one seed") {
  TransferScenario sc;
  PulseParameterization p;
  p.knot_times = default_knot_times(6, sc.t0);
  OptimizerSettings s;
  s.seed = 1;
  s.budget = 150;
  const auto r = optimize_pulse([&](const std::vector<double>& v) { return objective_transfer(v, p, sc); },
                                Bounds::uniform(6, 0.0, p.kappa_max), s);
  CHECK(r.best_value >= 0.95);
}
