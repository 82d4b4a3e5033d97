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

#include "wavelink/optimize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <future>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <Eigen/Cholesky>

#include "json.hpp"

#include "wavelink/errors.hpp"

namespace wavelink {

// ---------------------------------------------------------------------------
// Parameterization
// ---------------------------------------------------------------------------

int PulseParameterization::dimension() const {
  const int k = static_cast<int>(knot_times.size());
  return stage == OptimizationStage::kJoint ? 2 * k : k;
}

void PulseParameterization::validate() const {
  const std::size_t k = knot_times.size();
  if (k < 3 || k > 24) throw ParameterError("pulse parameterization: knot count must be in [3, 24]");
  for (std::size_t i = 1; i < k; ++i) {
    if (!(knot_times[i] > knot_times[i - 1])) {
      throw ParameterError("pulse parameterization: knot times must increase strictly");
    }
  }
  if (!(kappa_max > 0.0)) throw ParameterError("pulse parameterization: kappa_max must be positive");
  if (!(filter_sigma >= 0.0)) throw ParameterError("pulse parameterization: filter_sigma must be >= 0");
}

void PulseParameterization::validate_values(const std::vector<double>& values) const {
  validate();
  if (static_cast<int>(values.size()) != dimension()) {
    throw InvalidDimension("pulse parameterization: wrong number of knot values");
  }
  for (double v : values) {
    if (!(v >= 0.0 && v <= kappa_max)) {
      throw ParameterError("pulse parameterization: knot value outside [0, kappa_max]");
    }
  }
}

PulseShape PulseParameterization::kappa(const std::vector<double>& knot_values, const TimeGrid& grid) const {
  if (knot_values.size() != knot_times.size()) {
    throw InvalidDimension("pulse parameterization: one value per knot");
  }
  std::vector<double> out(grid.count);
  const std::size_t k = knot_times.size();
  for (int i = 0; i < grid.count; ++i) {
    const double t = grid.time(i);
    double v;
    if (t <= knot_times.front()) {
      v = knot_values.front();
    } else if (t >= knot_times.back()) {
      v = knot_values.back();
    } else {
      const std::size_t j = std::upper_bound(knot_times.begin(), knot_times.end(), t) - knot_times.begin();
      const double w = (t - knot_times[j - 1]) / (knot_times[j] - knot_times[j - 1]);
      v = (1.0 - w) * knot_values[j - 1] + w * knot_values[std::min(j, k - 1)];
    }
    out[i] = std::max(0.0, v);
  }
  PulseShape p(grid, out);
  return filter_sigma > 0.0 ? gaussian_filter(p, filter_sigma) : p;
}

std::vector<double> default_knot_times(int count, double t0) {
  if (count < 2) throw ParameterError("default_knot_times: need at least 2 knots");
  std::vector<double> t(count);
  for (int i = 0; i < count; ++i) t[i] = t0 - 12e-9 + 20e-9 * i / (count - 1);
  return t;
}

TimeGrid TransferScenario::grid() const {
  if (!(step > 0.0) || !(window_before >= 0.0) || !(window_after > 0.0)) {
    throw ParameterError("transfer scenario: invalid window");
  }
  return TimeGrid::spanning(t0 - window_before, t0 + window_after, step);
}

PulseShape TransferScenario::target() const {
  if (!(kappa_c > 0.0)) throw ParameterError("transfer scenario: kappa_c must be positive");
  return sech_wavepacket(kappa_c, t0, grid());
}

namespace {

DensityMatrix fock_pair(int a, int b) {
  return product_state({DensityMatrix::basis(2, a), DensityMatrix::basis(2, b)});
}

double stage_population(const TransferSystem& ts, const DensityMatrix& rho0, std::size_t index,
                        const SolverOptions& solver) {
  const DensityMatrix out = evolve_final(ts.sys, rho0, solver);
  return out.expectation(embed(ts.spec, index, number_operator(ts.spec[index].n_max())));
}

}  // namespace

double objective_transfer(const std::vector<double>& values, const PulseParameterization& params,
                          const TransferScenario& scenario) {
  params.validate_values(values);
  const std::size_t k = params.knot_times.size();
  try {
    const TimeGrid grid = scenario.grid();
    const PulseShape target = scenario.target();
    switch (params.stage) {
      case OptimizationStage::kEmission: {
        NodeParams node;
        node.truncation = 1;
        node.gamma = params.kappa(values, grid).to_schedule();
        const TransferSystem ts = build_stage(node, target, Stage::kEmission, 1);
        return stage_population(ts, fock_pair(1, 0), ts.virtual_index, scenario.solver);
      }
      case OptimizationStage::kCapture: {
        NodeParams node;
        node.truncation = 1;
        node.gamma = params.kappa(values, grid).to_schedule();
        const TransferSystem ts = build_stage(node, target, Stage::kCapture, 1);
        return stage_population(ts, fock_pair(0, 1), ts.node_index, scenario.solver);
      }
      case OptimizationStage::kJoint: {
        const std::vector<double> ve(values.begin(), values.begin() + k);
        const std::vector<double> vc(values.begin() + k, values.end());
        NodeParams emitter, receiver;
        emitter.truncation = receiver.truncation = 1;
        emitter.gamma = params.kappa(ve, grid).to_schedule();
        receiver.gamma = params.kappa(vc, grid).to_schedule();
        const PulseShape envelope = emitted_envelope(emitter.gamma, grid);
        TransferOptions opts;
        opts.virtual_truncation = 1;
        opts.solver = scenario.solver;
        opts.trajectory_points = 0;
        const double e = run_transfer(emitter, receiver, envelope, DensityMatrix::basis(2, 1), opts).efficiency;
        return std::isfinite(e) ? e : 0.0;
      }
    }
  } catch (const Error& e) {
    warn(std::string("objective_transfer: simulation failed, scoring 0: ") + e.what());
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Optimizer
// ---------------------------------------------------------------------------

Bounds Bounds::uniform(int dimension, double lo, double hi) {
  return Bounds{std::vector<double>(dimension, lo), std::vector<double>(dimension, hi)};
}

void Bounds::validate() const {
  if (lower.empty() || lower.size() != upper.size()) throw InvalidDimension("bounds: size mismatch");
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || !(upper[i] > lower[i])) {
      throw ParameterError("bounds: need finite lower < upper");
    }
  }
}

namespace {

using Clock = std::chrono::steady_clock;

const char* kPhaseInitial = "initial";
const char* kPhaseSurrogate = "surrogate";
const char* kPhaseSimplex = "simplex";

// Exact-bit key for the evaluation cache.
std::string cache_key(const std::vector<double>& x) {
  std::string key(x.size() * sizeof(double), '\0');
  std::memcpy(key.data(), x.data(), key.size());
  return key;
}

class Evaluator {
 public:
  Evaluator(const Objective& f, const Bounds& b, int budget, OptimizationReport& report)
      : f_(f), bounds_(b), budget_(budget), report_(report) {}

  int used() const { return static_cast<int>(report_.log.size()); }
  bool exhausted() const { return used() >= budget_; }

  std::vector<double> to_params(const Eigen::VectorXd& u) const {
    std::vector<double> x(u.size());
    for (int i = 0; i < u.size(); ++i) {
      const double c = std::clamp(u[i], 0.0, 1.0);
      x[i] = bounds_.lower[i] + c * (bounds_.upper[i] - bounds_.lower[i]);
      x[i] = std::clamp(x[i], bounds_.lower[i], bounds_.upper[i]);
    }
    return x;
  }

  // Value in objective units; NaN for a failed evaluation.
  double operator()(const Eigen::VectorXd& u, const char* phase) {
    const auto x = to_params(u);
    const auto key = cache_key(x);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++report_.cache_hits;
      return it->second;
    }
    const auto t0 = Clock::now();
    double v;
    bool ok = true;
    try {
      v = f_(x);
      if (!std::isfinite(v)) ok = false;
    } catch (const std::exception& e) {
      warn(std::string("optimizer: objective failed: ") + e.what());
      ok = false;
    }
    if (!ok) v = std::numeric_limits<double>::quiet_NaN();
    record(x, v, std::chrono::duration<double>(Clock::now() - t0).count(), phase, ok);
    cache_[key] = v;
    return v;
  }

  // Evaluates a batch concurrently; results are logged in input order.
  std::vector<double> batch(const std::vector<Eigen::VectorXd>& us, const char* phase, int workers) {
    std::vector<std::vector<double>> xs;
    for (const auto& u : us) xs.push_back(to_params(u));
    std::vector<double> v(us.size());
    std::vector<double> wall(us.size());
    std::vector<char> ok(us.size(), 1);
    auto run = [&](std::size_t begin) {
      for (std::size_t i = begin; i < xs.size(); i += workers) {
        const auto t0 = Clock::now();
        try {
          v[i] = f_(xs[i]);
          if (!std::isfinite(v[i])) ok[i] = 0;
        } catch (const std::exception&) {
          ok[i] = 0;
        }
        wall[i] = std::chrono::duration<double>(Clock::now() - t0).count();
      }
    };
    workers = std::max(1, std::min<int>(workers, static_cast<int>(xs.size())));
    std::vector<std::future<void>> jobs;
    for (int w = 1; w < workers; ++w) jobs.push_back(std::async(std::launch::async, run, w));
    run(0);
    for (auto& j : jobs) j.get();
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!ok[i]) {
        warn("optimizer: objective failed in the initial design");
        v[i] = std::numeric_limits<double>::quiet_NaN();
      }
      record(xs[i], v[i], wall[i], phase, ok[i]);
      cache_[cache_key(xs[i])] = v[i];
    }
    return v;
  }

 private:
  void record(const std::vector<double>& x, double v, double wall, const char* phase, bool ok) {
    report_.log.push_back(EvaluationRecord{x, ok ? v : 0.0, wall, phase, ok});
  }

  const Objective& f_;
  const Bounds& bounds_;
  int budget_;
  OptimizationReport& report_;
  std::map<std::string, double> cache_;
};

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

struct Surrogate {
  Eigen::MatrixXd x;  // n x d, normalized
  Eigen::VectorXd alpha;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double length = 1.0;
  double mean = 0.0;
  double scale = 1.0;

  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    return std::exp(-0.5 * (a - b).squaredNorm() / (length * length));
  }

  void fit(const std::vector<Eigen::VectorXd>& pts, const std::vector<double>& ys, double noise) {
    const int n = static_cast<int>(pts.size());
    const int d = static_cast<int>(pts.front().size());
    x.resize(n, d);
    for (int i = 0; i < n; ++i) x.row(i) = pts[i].transpose();
    // Median heuristic on pairwise distances.
    std::vector<double> dist;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) dist.push_back((x.row(i) - x.row(j)).norm());
    if (!dist.empty()) {
      std::nth_element(dist.begin(), dist.begin() + dist.size() / 2, dist.end());
      length = std::max(dist[dist.size() / 2], 1e-3);
    }
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(ys.data(), n);
    mean = y.mean();
    scale = std::sqrt((y.array() - mean).square().sum() / std::max(1, n - 1));
    if (!(scale > 1e-12)) scale = 1.0;
    y = (y.array() - mean) / scale;
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k(i, j) = kernel(x.row(i), x.row(j));
    double jitter = noise;
    for (int attempt = 0; attempt < 8; ++attempt) {
      llt.compute(k + jitter * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) break;
      jitter *= 10.0;
    }
    alpha = llt.solve(y);
  }

  // Standardized mean and standard deviation.
  std::pair<double, double> predict(const Eigen::VectorXd& u) const {
    const int n = static_cast<int>(x.rows());
    Eigen::VectorXd ks(n);
    for (int i = 0; i < n; ++i) ks[i] = kernel(u, x.row(i).transpose());
    const double mu = ks.dot(alpha);
    const Eigen::VectorXd v = llt.matrixL().solve(ks);
    const double var = std::max(1.0 - v.squaredNorm(), 1e-12);
    return {mu, std::sqrt(var)};
  }
};

std::vector<Eigen::VectorXd> latin_hypercube(int n, int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Eigen::VectorXd> pts(n, Eigen::VectorXd(d));
  for (int j = 0; j < d; ++j) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n; ++i) pts[i][j] = (perm[i] + unif(rng)) / n;
  }
  return pts;
}

// Bounded Nelder-Mead in normalized coordinates (points clamped to the box).
void nelder_mead(Evaluator& eval, Eigen::VectorXd start, double step, int max_rounds) {
  const int d = static_cast<int>(start.size());
  auto clamp01 = [](Eigen::VectorXd v) { return v.cwiseMax(0.0).cwiseMin(1.0).eval(); };
  // Minimize the negated objective; failures score +inf.
  auto cost = [&](const Eigen::VectorXd& u) {
    const double v = eval(u, kPhaseSimplex);
    return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
  };
  std::vector<Eigen::VectorXd> s(d + 1, clamp01(start));
  std::vector<double> f(d + 1);
  f[0] = cost(s[0]);
  for (int i = 0; i < d; ++i) {
    s[i + 1] = s[0];
    s[i + 1][i] += (s[0][i] + step <= 1.0 ? step : -step);
    if (eval.exhausted()) return;
    f[i + 1] = cost(s[i + 1]);
  }
  for (int round = 0; round < max_rounds && !eval.exhausted(); ++round) {
    std::vector<int> order(d + 1);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> s2;
    std::vector<double> f2;
    for (int i : order) {
      s2.push_back(s[i]);
      f2.push_back(f[i]);
    }
    s = s2;
    f = f2;
    double size = 0.0;
    for (int i = 1; i <= d; ++i) size = std::max(size, (s[i] - s[0]).cwiseAbs().maxCoeff());
    if (size < 1e-9) break;

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(d);
    for (int i = 0; i < d; ++i) centroid += s[i];
    centroid /= d;
    const Eigen::VectorXd xr = clamp01(centroid + (centroid - s[d]));
    const double fr = cost(xr);
    if (fr < f[0]) {
      if (eval.exhausted()) break;
      const Eigen::VectorXd xe = clamp01(centroid + 2.0 * (centroid - s[d]));
      const double fe = cost(xe);
      if (fe < fr) {
        s[d] = xe;
        f[d] = fe;
      } else {
        s[d] = xr;
        f[d] = fr;
      }
    } else if (fr < f[d - 1]) {
      s[d] = xr;
      f[d] = fr;
    } else {
      if (eval.exhausted()) break;
      const bool outside = fr < f[d];
      const Eigen::VectorXd xc =
          clamp01(outside ? (centroid + 0.5 * (xr - centroid)).eval() : (centroid + 0.5 * (s[d] - centroid)).eval());
      const double fc = cost(xc);
      if (fc < (outside ? fr : f[d])) {
        s[d] = xc;
        f[d] = fc;
      } else {
        for (int i = 1; i <= d && !eval.exhausted(); ++i) {
          s[i] = clamp01(s[0] + 0.5 * (s[i] - s[0]));
          f[i] = cost(s[i]);
        }
      }
    }
  }
}

}  // namespace

OptimizationReport optimize_pulse(const Objective& objective, const Bounds& bounds,
                                  const OptimizerSettings& settings) {
  bounds.validate();
  if (settings.budget < 20) throw ParameterError("optimize_pulse: budget must be >= 20");
  if (!(settings.surrogate_fraction >= 0.0 && settings.surrogate_fraction <= 1.0)) {
    throw ParameterError("optimize_pulse: surrogate_fraction must be in [0, 1]");
  }
  if (settings.acquisition_candidates < 1) throw ParameterError("optimize_pulse: need acquisition candidates");
  const int d = bounds.dimension();
  OptimizationReport report;
  report.settings = settings;
  Evaluator eval(objective, bounds, settings.budget, report);
  std::mt19937_64 rng(settings.seed);

  const int surrogate_budget = static_cast<int>(std::lround(settings.budget * settings.surrogate_fraction));
  int n_init = settings.initial_points > 0 ? settings.initial_points : std::max(5, 2 * d);
  n_init = std::max(2, std::min(n_init, std::max(2, surrogate_budget / 3)));

  std::vector<Eigen::VectorXd> pts = latin_hypercube(n_init, d, rng);
  std::vector<double> vals = eval.batch(pts, kPhaseInitial, settings.workers);

  auto to_unit = [&](const std::vector<double>& x) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u[i] = (x[i] - bounds.lower[i]) / (bounds.upper[i] - bounds.lower[i]);
    return u;
  };

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Surrogate gp;
  while (eval.used() < surrogate_budget) {
    std::vector<Eigen::VectorXd> good;
    std::vector<double> ys;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (std::isfinite(vals[i])) {
        good.push_back(pts[i]);
        ys.push_back(vals[i]);
      }
    }
    Eigen::VectorXd next(d);
    if (good.size() < 2) {
      for (int j = 0; j < d; ++j) next[j] = unif(rng);
    } else {
      gp.fit(good, ys, settings.gp_noise);
      const auto best_it = std::max_element(ys.begin(), ys.end());
      const double y_best = (*best_it - gp.mean) / gp.scale;
      const Eigen::VectorXd incumbent = good[best_it - ys.begin()];
      double best_ei = -1.0;
      for (int c = 0; c < settings.acquisition_candidates; ++c) {
        Eigen::VectorXd u(d);
        if (c % 4 == 3) {
          // Local candidates around the incumbent.
          for (int j = 0; j < d; ++j) u[j] = std::clamp(incumbent[j] + 0.1 * gp.length * gauss(rng), 0.0, 1.0);
        } else {
          for (int j = 0; j < d; ++j) u[j] = unif(rng);
        }
        const auto [mu, sd] = gp.predict(u);
        const double imp = mu - y_best - settings.xi;
        const double z = imp / sd;
        const double ei = imp * normal_cdf(z) + sd * normal_pdf(z);
        if (ei > best_ei) {
          best_ei = ei;
          next = u;
        }
      }
      report.length_scale = gp.length;
    }
    const int before = eval.used();
    const double v = eval(next, kPhaseSurrogate);
    if (eval.used() == before) {
      // Cache hit: nudge randomly so the loop keeps making progress.
      for (int j = 0; j < d; ++j) next[j] = unif(rng);
      pts.push_back(next);
      vals.push_back(eval(next, kPhaseSurrogate));
      continue;
    }
    pts.push_back(to_unit(eval.to_params(next)));
    vals.push_back(v);
  }

  // Incumbent so far.
  auto best_index = [&]() {
    int best = -1;
    for (std::size_t i = 0; i < report.log.size(); ++i) {
      if (report.log[i].ok && (best < 0 || report.log[i].value > report.log[best].value)) best = static_cast<int>(i);
    }
    return best;
  };
  int b = best_index();
  if (b >= 0 && !eval.exhausted()) {
    nelder_mead(eval, to_unit(report.log[b].params), settings.simplex_step, 50 * settings.budget);
  } else if (b < 0) {
    // No success yet: spend the rest on random points.
    while (!eval.exhausted()) {
      Eigen::VectorXd u(d);
      for (int j = 0; j < d; ++j) u[j] = unif(rng);
      eval(u, kPhaseSimplex);
    }
  }
  b = best_index();
  if (b < 0) throw ConvergenceError("optimize_pulse: no successful evaluation within the budget");
  report.best_params = report.log[b].params;
  report.best_value = report.log[b].value;
  report.method = report.log[b].phase == kPhaseSimplex ? kPhaseSimplex : kPhaseSurrogate;
  return report;
}

std::string OptimizationReport::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = method;
  j["best_params"] = best_params;
  j["best_efficiency"] = best_value;
  j["evaluations"] = log.size();
  j["cache_hits"] = cache_hits;
  j["settings"] = {
      {"budget", settings.budget},
      {"seed", settings.seed},
      {"surrogate_fraction", settings.surrogate_fraction},
      {"initial_points", settings.initial_points},
      {"acquisition", "expected_improvement"},
      {"acquisition_candidates", settings.acquisition_candidates},
      {"xi", settings.xi},
      {"kernel", "squared_exponential_isotropic"},
      {"length_scale_rule", "median_pairwise_distance"},
      {"final_length_scale", length_scale},
      {"gp_noise", settings.gp_noise},
      {"polish", "nelder_mead"},
      {"simplex_step", settings.simplex_step},
  };
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& r : log) {
    entries.push_back({{"phase", r.phase}, {"value", r.value}, {"ok", r.ok}, {"wall_time_s", r.wall_time}, {"params", r.params}});
  }
  j["log"] = entries;
  return j.dump(2);
}

void OptimizationReport::write_log_csv(std::ostream& out) const {
  const std::size_t d = log.empty() ? best_params.size() : log.front().params.size();
  out << "index,phase,ok,value,wall_time_s";
  for (std::size_t i = 0; i < d; ++i) out << ",p" << i;
  out << '\n' << std::setprecision(12);
  for (std::size_t k = 0; k < log.size(); ++k) {
    const auto& r = log[k];
    out << k << ',' << r.phase << ',' << (r.ok ? 1 : 0) << ',' << r.value << ',' << r.wall_time;
    for (double p : r.params) out << ',' << p;
    out << '\n';
  }
}

}  // namespace wavelink
