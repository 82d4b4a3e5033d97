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

#include "wavelink/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

#include "json.hpp"

#include "wavelink/errors.hpp"

namespace wavelink {

namespace {

constexpr double kProbLow = -0.02;
constexpr double kProbHigh = 1.02;

int padding_for(Complex alpha, int needed_levels) {
  const double a = std::abs(alpha);
  const int pad = static_cast<int>(std::ceil(4.0 * a * a + 10.0 * a + 10.0));
  return std::max({20, pad, needed_levels});
}

// Rows 0..n_max, columns 0..cols-1 of D(alpha) from the closed-form matrix
// elements (generalized Laguerre polynomials), so no truncation enters:
// column k is D(alpha)|k> projected on the reconstruction space and
// (B^dag rho B)_kk = <k| D(-alpha) rho D(alpha) |k>.
Matrix displaced_rows(Complex alpha, int n_max, int levels_needed) {
  const int cols = std::max(n_max + 1, n_max + 1 + padding_for(alpha, levels_needed));
  Matrix b = Matrix::Zero(n_max + 1, cols);
  const double x = std::norm(alpha);
  if (x == 0.0) {
    for (int k = 0; k <= n_max; ++k) b(k, k) = 1.0;
    return b;
  }
  const double log_r = 0.5 * std::log(x);
  const Complex u = alpha / std::abs(alpha);
  auto laguerre = [x](int k, int a) {
    double l0 = 1.0;
    if (k == 0) return l0;
    double l1 = 1.0 + a - x;
    for (int j = 1; j < k; ++j) {
      const double l2 = ((2 * j + 1 + a - x) * l1 - (j + a) * l0) / (j + 1);
      l0 = l1;
      l1 = l2;
    }
    return l1;
  };
  for (int m = 0; m <= n_max; ++m) {
    for (int n = 0; n < cols; ++n) {
      const int lo = std::min(m, n), d = std::abs(m - n);
      const double mag = std::exp(0.5 * (std::lgamma(lo + 1.0) - std::lgamma(lo + d + 1.0)) + d * log_r - 0.5 * x);
      // m >= n: alpha^d; m < n: (-conj(alpha))^d.
      const Complex phase = m >= n ? std::pow(u, d) : std::pow(-std::conj(u), d);
      b(m, n) = mag * phase * laguerre(lo, d);
    }
  }
  return b;
}

double frob2(const Matrix& m) { return m.squaredNorm(); }

// Measurement vectors b_i with outcome probabilities <b_i| rho |b_i>.
struct MeasurementModel {
  Matrix b;  // d x m
  Eigen::VectorXd data;

  Eigen::VectorXd forward(const Matrix& rho) const {
    const Matrix rb = rho * b;
    return (b.conjugate().cwiseProduct(rb)).colwise().sum().real().transpose();
  }
  Matrix adjoint(const Eigen::VectorXd& r) const {
    return b * r.cast<Complex>().asDiagonal() * b.adjoint();
  }
  double objective(const Matrix& rho) const { return (forward(rho) - data).squaredNorm(); }
};

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

double lipschitz(const MeasurementModel& model, int dim) {
  // Power iteration on the Gram operator rho -> A*(A rho).
  Matrix x = Matrix::Identity(dim, dim) / std::sqrt(static_cast<double>(dim));
  double lambda = 0.0;
  for (int it = 0; it < 100; ++it) {
    Matrix y = model.adjoint(model.forward(x));
    const double n = std::sqrt(frob2(y));
    if (n == 0.0) return 0.0;
    const double prev = lambda;
    lambda = n;
    x = y / n;
    if (it > 5 && std::abs(lambda - prev) <= 1e-6 * lambda) break;
  }
  return lambda;
}

Matrix solve_constrained(const MeasurementModel& model, int dim, const ReconstructionOptions& options,
                         ReconstructionReport* report) {
  if (model.data.cwiseAbs().maxCoeff() == 0.0) {
    throw ReconstructionError("reconstruction: data are all zero");
  }
  const double l = 1.01 * lipschitz(model, dim);
  if (!(l > 0.0)) throw ReconstructionError("reconstruction: measurement operators vanish");
  Matrix x = Matrix::Identity(dim, dim) / static_cast<double>(dim);
  Matrix y = x;
  double t = 1.0;
  double f_prev = model.objective(x);
  int it = 0;
  bool converged = false;
  for (; it < options.max_iterations; ++it) {
    const Matrix grad = model.adjoint(model.forward(y) - model.data);
    const Matrix next = project_to_density(hermitian_part(y - grad / l));
    const double f = model.objective(next);
    if (!std::isfinite(f)) throw ReconstructionError("reconstruction: objective diverged");
    if (f > f_prev) {
      // Monotone restart.
      t = 1.0;
      y = x;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - x);
    x = next;
    t = t_next;
    const double change = f_prev - f;
    f_prev = f;
    if (it >= 20 && change < options.tolerance) {
      converged = true;
      ++it;
      break;
    }
  }
  if (!converged) warn("reconstruction: iteration limit reached before convergence");
  if (report) *report = ReconstructionReport{it, f_prev, converged};
  return x;
}

void check_probability(double p, const char* what) {
  if (!(p >= kProbLow && p <= kProbHigh)) {
    std::ostringstream msg;
    msg << what << ": probability " << p << " outside [" << kProbLow << ", " << kProbHigh << "]";
    throw ParameterError(msg.str());
  }
}

std::vector<double> finish_distribution(const Eigen::VectorXd& x, bool has_zero_column) {
  // x holds P_1.. (single) or all P (joint); cap the sum at 1.
  std::vector<double> p(x.data(), x.data() + x.size());
  double s = std::accumulate(p.begin(), p.end(), 0.0);
  if (s > 1.0) {
    for (double& v : p) v /= s;
    s = 1.0;
  }
  if (has_zero_column) p.insert(p.begin(), std::max(0.0, 1.0 - s));
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Wigner
// ---------------------------------------------------------------------------

namespace {

double wigner_unchecked(const DensityMatrix& rho, Complex alpha) {
  const Matrix b = displaced_rows(alpha, rho.dim() - 1, 0);
  const Matrix rb = rho.matrix() * b;
  double w = 0.0;
  for (int k = 0; k < b.cols(); ++k) {
    const double pk = std::real(b.col(k).dot(rb.col(k)));
    w += (k % 2 == 0 ? pk : -pk);
  }
  return 2.0 / M_PI * w;
}

}  // namespace

double wigner(const DensityMatrix& rho, Complex alpha) {
  if (std::norm(alpha) > rho.dim() - 1) {
    warn("wigner: |alpha|^2 exceeds the state truncation");
  }
  return wigner_unchecked(rho, alpha);
}

double wigner_from_distribution(const std::vector<double>& probs) {
  double w = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) w += (n % 2 == 0 ? probs[n] : -probs[n]);
  return 2.0 / M_PI * w;
}

std::vector<Complex> square_grid(int n, double extent) {
  if (n < 1) throw ParameterError("square_grid: need at least one point per axis");
  if (!(extent >= 0.0)) throw ParameterError("square_grid: extent must be nonnegative");
  std::vector<Complex> out;
  for (int i = 0; i < n; ++i) {
    const double re = n == 1 ? 0.0 : -extent + 2.0 * extent * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double im = n == 1 ? 0.0 : -extent + 2.0 * extent * j / (n - 1);
      out.emplace_back(re, im);
    }
  }
  return out;
}

void write_wigner_csv(std::ostream& out, const DensityMatrix& rho, const std::vector<Complex>& alphas) {
  out << "re_alpha,im_alpha,W\n" << std::setprecision(12);
  int beyond = 0;
  for (const Complex& a : alphas) {
    if (std::norm(a) > rho.dim() - 1) ++beyond;
    out << a.real() << ',' << a.imag() << ',' << wigner_unchecked(rho, a) << '\n';
  }
  // One warning per map rather than per point.
  if (beyond > 0) {
    warn("write_wigner_csv: " + std::to_string(beyond) + " of " + std::to_string(alphas.size()) +
         " points have |alpha|^2 beyond the state truncation");
  }
}

// ---------------------------------------------------------------------------
// Fock extraction
// ---------------------------------------------------------------------------

Eigen::VectorXd nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iterations) {
  const int n = static_cast<int>(a.cols());
  if (a.rows() != b.size()) throw InvalidDimension("nnls: A and b disagree");
  if (max_iterations <= 0) max_iterations = 3 * n + 30;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(n, false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * a.norm() * std::max(a.rows(), a.cols());

  auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    Eigen::MatrixXd ap(a.rows(), idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) ap.col(k) = a.col(idx[k]);
    const Eigen::VectorXd sp = ap.colPivHouseholderQr().solve(b);
    s.setZero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) s[idx[k]] = sp[k];
  };

  for (int outer = 0; outer < max_iterations; ++outer) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    int j_best = -1;
    double w_best = tol;
    for (int j = 0; j < n; ++j) {
      if (!passive[j] && w[j] > w_best) {
        w_best = w[j];
        j_best = j;
      }
    }
    if (j_best < 0) return x;
    passive[j_best] = true;
    Eigen::VectorXd s;
    for (int inner = 0; inner < 3 * n + 30; ++inner) {
      solve_passive(s);
      double step = 1.0;
      bool feasible = true;
      for (int j = 0; j < n; ++j) {
        if (passive[j] && s[j] <= 0.0) {
          feasible = false;
          step = std::min(step, x[j] / (x[j] - s[j]));
        }
      }
      if (feasible) break;
      x += step * (s - x);
      for (int j = 0; j < n; ++j) {
        if (passive[j] && x[j] <= tol) {
          passive[j] = false;
          x[j] = 0.0;
        }
      }
    }
    x = s;
  }
  throw ConvergenceError("nnls: iteration limit reached");
}

FockFit fit_fock_distribution(const std::vector<double>& trace, const std::vector<double>& times,
                              double g, int n_max, const FockFitOptions& options) {
  if (trace.size() != times.size() || times.empty()) {
    throw InvalidDimension("fock fit: trace and times must have the same nonzero length");
  }
  if (!(g > 0.0)) throw ParameterError("fock fit: coupling must be positive");
  if (n_max < 1) throw InvalidDimension("fock fit: n_max must be >= 1");
  for (double p : trace) check_probability(p, "fock fit");
  const auto [tmin, tmax] = std::minmax_element(times.begin(), times.end());
  const double tau0 = M_PI / (2.0 * g);
  if (*tmax - *tmin < 2.0 * tau0) {
    throw ConditioningError("fock fit: times must span at least two single-photon swap times");
  }
  const int m = static_cast<int>(times.size());
  Eigen::MatrixXd basis(m, n_max);
  for (int i = 0; i < m; ++i) {
    for (int n = 1; n <= n_max; ++n) {
      const double s = std::sin(std::sqrt(static_cast<double>(n)) * g * times[i]);
      basis(i, n - 1) = s * s;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis);
  const auto& sv = svd.singularValues();
  const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
  if (!(cond < options.max_condition)) {
    std::ostringstream msg;
    msg << "fock fit: basis condition number " << cond << " exceeds " << options.max_condition;
    throw ConditioningError(msg.str());
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(trace.data(), m);

  auto solve = [&](double decay) {
    Eigen::MatrixXd a = basis;
    if (std::isfinite(decay)) {
      for (int i = 0; i < m; ++i) a.row(i) *= std::exp(-(times[i] - *tmin) / decay);
    }
    Eigen::VectorXd x = nnls(a, y);
    return std::make_pair(x, (a * x - y).norm() / std::sqrt(static_cast<double>(m)));
  };

  double best_decay = INFINITY;
  auto [x, res] = solve(best_decay);
  if (options.fit_decay) {
    // Golden-section search on log T between tau0 and 1e4 x the span.
    double lo = std::log(tau0), hi = std::log(1e4 * (*tmax - *tmin));
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    double fc = solve(std::exp(c)).second, fd = solve(std::exp(d)).second;
    for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - r * (hi - lo);
        fc = solve(std::exp(c)).second;
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + r * (hi - lo);
        fd = solve(std::exp(d)).second;
      }
    }
    const double t_fit = std::exp(0.5 * (lo + hi));
    auto fit = solve(t_fit);
    if (fit.second < res) {
      x = fit.first;
      res = fit.second;
      best_decay = t_fit;
    }
  }
  return FockFit{finish_distribution(x, true), best_decay, res};
}

std::vector<double> extract_fock_distribution(const std::vector<double>& trace,
                                              const std::vector<double>& times, double g, int n_max,
                                              const FockFitOptions& options) {
  return fit_fock_distribution(trace, times, g, n_max, options).probs;
}

std::vector<std::vector<double>> joint_rabi_outcomes(const std::vector<double>& joint_probs, int n_max,
                                                     double g1, double g2,
                                                     const std::vector<double>& times) {
  const int d = n_max + 1;
  if (static_cast<int>(joint_probs.size()) != d * d) {
    throw InvalidDimension("joint outcomes: distribution size must be (n_max + 1)^2");
  }
  std::vector<std::vector<double>> out(4, std::vector<double>(times.size(), 0.0));
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (int n1 = 0; n1 < d; ++n1) {
      const double s1 = std::pow(std::sin(std::sqrt(static_cast<double>(n1)) * g1 * times[i]), 2);
      for (int n2 = 0; n2 < d; ++n2) {
        const double s2 = std::pow(std::sin(std::sqrt(static_cast<double>(n2)) * g2 * times[i]), 2);
        const double p = joint_probs[n1 * d + n2];
        out[0][i] += p * (1 - s1) * (1 - s2);
        out[1][i] += p * (1 - s1) * s2;
        out[2][i] += p * s1 * (1 - s2);
        out[3][i] += p * s1 * s2;
      }
    }
  }
  return out;
}

std::vector<double> extract_joint_distribution(const std::vector<std::vector<double>>& outcomes,
                                               const std::vector<double>& times, double g1, double g2,
                                               int n_max) {
  if (outcomes.size() != 4) throw InvalidDimension("joint fit: need four outcome series");
  for (const auto& o : outcomes) {
    if (o.size() != times.size()) throw InvalidDimension("joint fit: series length mismatch");
    for (double p : o) check_probability(p, "joint fit");
  }
  if (!(g1 > 0.0) || !(g2 > 0.0)) throw ParameterError("joint fit: couplings must be positive");
  const auto [tmin, tmax] = std::minmax_element(times.begin(), times.end());
  if (*tmax - *tmin < 2.0 * M_PI / (2.0 * std::min(g1, g2))) {
    throw ConditioningError("joint fit: times must span at least two single-photon swap times");
  }
  const int d = n_max + 1;
  const int m = static_cast<int>(times.size());
  Eigen::MatrixXd a(4 * m, d * d);
  Eigen::VectorXd y(4 * m);
  for (int col = 0; col < d * d; ++col) {
    std::vector<double> unit(d * d, 0.0);
    unit[col] = 1.0;
    const auto basis = joint_rabi_outcomes(unit, n_max, g1, g2, times);
    for (int o = 0; o < 4; ++o)
      for (int i = 0; i < m; ++i) a(o * m + i, col) = basis[o][i];
  }
  for (int o = 0; o < 4; ++o)
    for (int i = 0; i < m; ++i) y[o * m + i] = outcomes[o][i];
  return finish_distribution(nnls(a, y), false);
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

bool TomographyDataset::is_joint() const {
  return !displacements.empty() && displacements.front().size() == 2;
}

void TomographyDataset::validate() const {
  if (displacements.empty()) throw ParameterError("dataset: no displacement points");
  if (n_max < 1) throw InvalidDimension("dataset: n_max must be >= 1");
  const std::size_t per = displacements.front().size();
  if (per != 1 && per != 2) throw InvalidDimension("dataset: one or two displacements per point");
  for (const auto& d : displacements) {
    if (d.size() != per) throw InvalidDimension("dataset: mixed single and joint points");
  }
  const bool has_dist = !distributions.empty();
  const bool has_traces = !traces.empty();
  if (has_dist == has_traces) throw ParameterError("dataset: give either distributions or traces");
  if (has_dist) {
    if (distributions.size() != size()) throw InvalidDimension("dataset: one distribution per point");
    for (const auto& p : distributions) {
      if (p.empty()) throw InvalidDimension("dataset: empty distribution");
      if (per == 2) {
        const auto side = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(p.size()))));
        if (side * side != p.size()) throw InvalidDimension("dataset: joint distribution is not square");
      }
      for (double v : p) check_probability(v, "dataset");
    }
  } else {
    if (traces.size() != size()) throw InvalidDimension("dataset: one trace set per point");
    if (!(g > 0.0)) throw ParameterError("dataset: traces need g_rad_s > 0");
    for (const auto& t : traces) {
      if (t.size() != (per == 1 ? 1u : 4u)) throw InvalidDimension("dataset: wrong number of trace series");
      for (const auto& s : t) {
        if (s.size() != times.size()) throw InvalidDimension("dataset: trace length differs from times");
      }
    }
  }
}

std::vector<std::vector<double>> TomographyDataset::resolved_distributions() const {
  validate();
  if (!distributions.empty()) return distributions;
  std::vector<std::vector<double>> out;
  for (const auto& t : traces) {
    if (is_joint()) {
      out.push_back(extract_joint_distribution(t, times, g, g2 > 0.0 ? g2 : g, n_max + 2));
    } else {
      out.push_back(extract_fock_distribution(t[0], times, g, n_max + 4));
    }
  }
  return out;
}

std::string dataset_to_json(const TomographyDataset& ds) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json disp = nlohmann::ordered_json::array();
  for (const auto& d : ds.displacements) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (const Complex& a : d) {
      row.push_back(a.real());
      row.push_back(a.imag());
    }
    disp.push_back(row);
  }
  j["displacements"] = disp;
  if (!ds.distributions.empty()) j["distributions"] = ds.distributions;
  if (!ds.traces.empty()) {
    if (ds.is_joint()) {
      j["traces"] = ds.traces;
    } else {
      std::vector<std::vector<double>> flat;
      for (const auto& t : ds.traces) flat.push_back(t.at(0));
      j["traces"] = flat;
    }
    j["times_s"] = ds.times;
  }
  j["g_rad_s"] = ds.g;
  if (ds.g2 > 0.0) j["g2_rad_s"] = ds.g2;
  j["n_max"] = ds.n_max;
  return j.dump(2);
}

TomographyDataset dataset_from_json(const std::string& text) {
  TomographyDataset ds;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& row : j.at("displacements")) {
      std::vector<double> v = row.get<std::vector<double>>();
      if (v.size() != 2 && v.size() != 4) {
        throw ParameterError("dataset JSON: displacement rows are [re, im] or [re1, im1, re2, im2]");
      }
      std::vector<Complex> d;
      for (std::size_t k = 0; k < v.size(); k += 2) d.emplace_back(v[k], v[k + 1]);
      ds.displacements.push_back(d);
    }
    if (j.contains("distributions")) ds.distributions = j["distributions"].get<std::vector<std::vector<double>>>();
    if (j.contains("traces")) {
      if (ds.is_joint()) {
        ds.traces = j["traces"].get<std::vector<std::vector<std::vector<double>>>>();
      } else {
        for (const auto& t : j["traces"]) ds.traces.push_back({t.get<std::vector<double>>()});
      }
    }
    if (j.contains("times_s")) ds.times = j["times_s"].get<std::vector<double>>();
    ds.g = j.value("g_rad_s", 0.0);
    ds.g2 = j.value("g2_rad_s", 0.0);
    ds.n_max = j.at("n_max").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("dataset JSON: ") + e.what());
  }
  ds.validate();
  return ds;
}

TomographyDataset synthesize_dataset(const DensityMatrix& rho, const std::vector<Complex>& alphas,
                                     int n_meas) {
  const int n_max = rho.dim() - 1;
  if (n_meas < n_max) throw InvalidDimension("synthesize: n_meas below the state truncation");
  TomographyDataset ds;
  ds.n_max = n_max;
  for (const Complex& a : alphas) {
    const Matrix b = displaced_rows(a, n_max, n_meas + 1).leftCols(n_meas + 1);
    const Matrix rb = rho.matrix() * b;
    std::vector<double> p(n_meas + 1);
    for (int k = 0; k <= n_meas; ++k) p[k] = std::max(0.0, std::real(b.col(k).dot(rb.col(k))));
    ds.displacements.push_back({a});
    ds.distributions.push_back(std::move(p));
  }
  return ds;
}

TomographyDataset synthesize_joint_dataset(const DensityMatrix& rho, const HilbertSpec& spec,
                                           const std::vector<std::pair<Complex, Complex>>& alphas,
                                           int n_meas) {
  if (spec.size() != 2 || rho.dim() != spec.total_dim()) {
    throw InvalidDimension("synthesize_joint: need a two-mode state matching the layout");
  }
  const int na = spec[0].n_max(), nb = spec[1].n_max();
  if (n_meas < std::max(na, nb)) throw InvalidDimension("synthesize_joint: n_meas below truncation");
  TomographyDataset ds;
  ds.n_max = std::max(na, nb);
  for (const auto& [a1, a2] : alphas) {
    const Matrix b1 = displaced_rows(a1, na, n_meas + 1).leftCols(n_meas + 1);
    const Matrix b2 = displaced_rows(a2, nb, n_meas + 1).leftCols(n_meas + 1);
    const Matrix b = Eigen::kroneckerProduct(b1, b2).eval();
    const Matrix rb = rho.matrix() * b;
    std::vector<double> p(b.cols());
    for (int k = 0; k < b.cols(); ++k) p[k] = std::max(0.0, std::real(b.col(k).dot(rb.col(k))));
    ds.displacements.push_back({a1, a2});
    ds.distributions.push_back(std::move(p));
  }
  return ds;
}

TomographyDataset add_gaussian_noise(const TomographyDataset& ds, double sigma, std::mt19937_64& rng) {
  if (!(sigma >= 0.0)) throw ParameterError("add_gaussian_noise: sigma must be nonnegative");
  TomographyDataset out = ds;
  std::normal_distribution<double> noise(0.0, sigma);
  // Clipped to the admissible raw-probability range.
  for (auto& p : out.distributions)
    for (double& v : p) v = std::clamp(v + noise(rng), kProbLow, kProbHigh);
  for (auto& t : out.traces)
    for (auto& s : t)
      for (double& v : s) v = std::clamp(v + noise(rng), kProbLow, kProbHigh);
  return out;
}

std::vector<std::pair<Complex, Complex>> joint_grid(int n, double extent) {
  const auto g = square_grid(n, extent);
  std::vector<std::pair<Complex, Complex>> out;
  for (const Complex& a : g)
    for (const Complex& b : g) out.emplace_back(a, b);
  return out;
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

DensityMatrix reconstruct_density_matrix(const TomographyDataset& ds, const ReconstructionOptions& options,
                                         ReconstructionReport* report) {
  if (ds.is_joint()) throw InvalidDimension("reconstruct_density_matrix: dataset is joint");
  const auto dists = ds.resolved_distributions();
  const int n_max = options.n_max < 0 ? ds.n_max : options.n_max;
  const int d = n_max + 1;
  if (static_cast<int>(ds.size()) < d * d) {
    warn("reconstruction: fewer displacement points than (n_max + 1)^2");
  }
  std::size_t cols = 0;
  for (const auto& p : dists) cols += p.size();
  MeasurementModel model;
  model.b.resize(d, static_cast<Eigen::Index>(cols));
  model.data.resize(static_cast<Eigen::Index>(cols));
  Eigen::Index c = 0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const int len = static_cast<int>(dists[k].size());
    const Matrix b = displaced_rows(ds.displacements[k][0], n_max, len);
    for (int n = 0; n < len; ++n, ++c) {
      model.b.col(c) = b.col(n);
      model.data[c] = dists[k][n];
    }
  }
  return DensityMatrix(solve_constrained(model, d, options, report), DensityTolerance::relaxed());
}

DensityMatrix reconstruct_joint(const TomographyDataset& ds, std::optional<int> noon_n,
                                const ReconstructionOptions& options, ReconstructionReport* report) {
  if (!ds.is_joint()) throw InvalidDimension("reconstruct_joint: dataset is not joint");
  const auto dists = ds.resolved_distributions();
  const int n_max = options.n_max < 0 ? ds.n_max : options.n_max;
  const int d = n_max + 1;
  if (noon_n && (*noon_n < 1 || *noon_n > n_max)) {
    throw ParameterError("reconstruct_joint: noon_n must lie in [1, n_max]");
  }
  if (static_cast<int>(ds.size()) < d * d) {
    warn("reconstruction: fewer displacement points than (n_max + 1)^2");
  }
  // Support: all joint basis states, or those with n1 + n2 <= noon_n.
  std::vector<int> support;
  for (int n1 = 0; n1 < d; ++n1)
    for (int n2 = 0; n2 < d; ++n2)
      if (!noon_n || n1 + n2 <= *noon_n) support.push_back(n1 * d + n2);
  const int ds_dim = static_cast<int>(support.size());

  std::size_t cols = 0;
  for (const auto& p : dists) cols += p.size();
  MeasurementModel model;
  model.b.resize(ds_dim, static_cast<Eigen::Index>(cols));
  model.data.resize(static_cast<Eigen::Index>(cols));
  Eigen::Index c = 0;
  for (std::size_t k = 0; k < ds.size(); ++k) {
    const int len = static_cast<int>(dists[k].size());
    const int side = static_cast<int>(std::llround(std::sqrt(static_cast<double>(len))));
    const Matrix b1 = displaced_rows(ds.displacements[k][0], n_max, side);
    const Matrix b2 = displaced_rows(ds.displacements[k][1], n_max, side);
    for (int m1 = 0; m1 < side; ++m1) {
      for (int m2 = 0; m2 < side; ++m2, ++c) {
        for (int s = 0; s < ds_dim; ++s) {
          model.b(s, c) = b1(support[s] / d, m1) * b2(support[s] % d, m2);
        }
        model.data[c] = dists[k][m1 * side + m2];
      }
    }
  }
  const Matrix reduced = solve_constrained(model, ds_dim, options, report);
  Matrix full = Matrix::Zero(d * d, d * d);
  for (int i = 0; i < ds_dim; ++i)
    for (int j = 0; j < ds_dim; ++j) full(support[i], support[j]) = reduced(i, j);
  return DensityMatrix(full, DensityTolerance::relaxed());
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

DisplacementCalibration calibrate_displacement(const std::vector<double>& amplitudes,
                                               const std::vector<double>& mean_photons,
                                               double residual_threshold) {
  if (amplitudes.size() != mean_photons.size()) {
    throw InvalidDimension("calibrate_displacement: amplitude and photon lists differ in length");
  }
  if (amplitudes.size() < 4) throw ParameterError("calibrate_displacement: need at least 4 points");
  for (double a : amplitudes) {
    if (!(a >= 0.0)) throw ParameterError("calibrate_displacement: amplitudes must be nonnegative");
  }
  std::vector<std::size_t> order(amplitudes.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return amplitudes[i] < amplitudes[j]; });

  auto fit = [&](int m) {
    Eigen::MatrixXd a(m, 2);
    Eigen::VectorXd y(m);
    double ymax = 0.0;
    for (int i = 0; i < m; ++i) {
      const double amp = amplitudes[order[i]];
      a(i, 0) = amp * amp;
      a(i, 1) = 1.0;
      y[i] = mean_photons[order[i]];
      ymax = std::max(ymax, std::abs(y[i]));
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(y);
    const double rms = (a * coef - y).norm() / std::sqrt(static_cast<double>(m));
    return std::make_tuple(coef, rms, ymax);
  };

  int best = 0;
  Eigen::Vector2d best_coef = Eigen::Vector2d::Zero();
  for (int m = 4; m <= static_cast<int>(order.size()); ++m) {
    auto [coef, rms, ymax] = fit(m);
    if (ymax > 0.0 && rms <= residual_threshold * ymax) {
      best = m;
      best_coef = coef;
    } else if (best > 0) {
      break;
    }
  }
  if (best == 0) {
    auto [coef, rms, ymax] = fit(4);
    throw FitFailure("calibrate_displacement: no linear low-power region", {coef[0], coef[1]});
  }
  if (!(best_coef[0] > 0.0)) {
    throw FitFailure("calibrate_displacement: nonpositive slope", {best_coef[0], best_coef[1]});
  }
  return DisplacementCalibration{best_coef[0], best_coef[1], amplitudes[order[best - 1]], best};
}

void CrosstalkMatrix::validate() const {
  if (m(0, 0) == Complex(0.0) || m(1, 1) == Complex(0.0)) {
    throw ParameterError("crosstalk matrix: diagonal entries must be nonzero");
  }
}

double crosstalk_ratio(double leaked, double driven) {
  if (!(leaked >= 0.0) || !(driven > 0.0)) {
    throw ParameterError("crosstalk_ratio: need leaked >= 0 and driven > 0");
  }
  return std::sqrt(leaked / driven);
}

Eigen::Vector2cd correct_crosstalk(const Eigen::Vector2cd& desired, const CrosstalkMatrix& m) {
  m.validate();
  Eigen::JacobiSVD<Eigen::Matrix2cd> svd(m.m);
  const auto& sv = svd.singularValues();
  if (!(sv[1] > 0.0) || sv[0] / sv[1] >= 1e6) {
    throw SingularMatrix("correct_crosstalk: crosstalk matrix is singular or ill conditioned");
  }
  return m.m.partialPivLu().solve(desired);
}

}  // namespace wavelink
