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

#include "wavelink/pulses.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "wavelink/errors.hpp"

namespace wavelink {

namespace {

void check_grid(const TimeGrid& grid) {
  if (grid.count < 1) throw InvalidDimension("pulse grid is empty");
  if (grid.count > 1 && !(grid.step > 0.0)) throw ParameterError("pulse grid step must be positive");
}

}  // namespace

// ---------------------------------------------------------------------------
// PulseShape
// ---------------------------------------------------------------------------

PulseShape::PulseShape(TimeGrid g, std::vector<Complex> v) : grid(g), values(std::move(v)) {
  check_grid(grid);
  if (static_cast<int>(values.size()) != grid.count) {
    throw InvalidDimension("PulseShape: value count does not match the grid");
  }
  for (const auto& x : values) {
    if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) {
      throw ParameterError("PulseShape: non-finite value");
    }
  }
}

PulseShape::PulseShape(TimeGrid g, const std::vector<double>& v)
    : PulseShape(g, std::vector<Complex>(v.begin(), v.end())) {}

double PulseShape::norm() const {
  double s = 0.0;
  for (const auto& x : values) s += std::norm(x);
  return s * grid.step;
}

Complex PulseShape::area() const {
  Complex s = 0.0;
  for (const auto& x : values) s += x;
  return s * grid.step;
}

std::vector<double> PulseShape::real() const {
  std::vector<double> r(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) r[i] = values[i].real();
  return r;
}

std::vector<double> PulseShape::abs2() const {
  std::vector<double> r(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) r[i] = std::norm(values[i]);
  return r;
}

Complex PulseShape::operator()(double t) const {
  if (grid.count == 1 || t <= grid.start) return values.front();
  const double x = (t - grid.start) / grid.step;
  const auto i = static_cast<std::size_t>(x);
  if (i + 1 >= values.size()) return values.back();
  const double f = x - static_cast<double>(i);
  return values[i] + f * (values[i + 1] - values[i]);
}

PulseShape PulseShape::normalized() const {
  const double n = norm();
  if (!(n > 0.0)) throw ParameterError("PulseShape: cannot normalize a zero envelope");
  return scaled(1.0 / std::sqrt(n));
}

PulseShape PulseShape::conjugated() const {
  PulseShape p = *this;
  for (auto& x : p.values) x = std::conj(x);
  return p;
}

PulseShape PulseShape::scaled(Complex factor) const {
  PulseShape p = *this;
  for (auto& x : p.values) x *= factor;
  return p;
}

std::vector<double> PulseShape::cumulative_norm() const {
  std::vector<double> c(values.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = std::norm(values[i]) * grid.step;
    c[i] = acc + 0.5 * w;
    acc += w;
  }
  return c;
}

Schedule PulseShape::to_schedule() const { return Schedule::sampled(grid, values); }

TimeGrid default_grid(double t0) {
  const double start = t0 - 0.5 * kDefaultPulseSpan;
  return TimeGrid::spanning(start, start + kDefaultPulseSpan, kDefaultPulseStep);
}

// ---------------------------------------------------------------------------
// Constructors
// ---------------------------------------------------------------------------

PulseShape sech_wavepacket(double kappa_c, double t0, const TimeGrid& grid) {
  if (!(kappa_c > 0.0)) throw ParameterError("sech_wavepacket: kappa_c must be positive");
  check_grid(grid);
  const double reach = 10.0 / kappa_c;
  if (grid.start > t0 - reach || grid.end() < t0 + reach) {
    warn("sech_wavepacket: grid does not span 10/kappa_c on both sides of t0; "
         "renormalization removes a visible tail");
  }
  std::vector<Complex> v(grid.count);
  const double pref = std::sqrt(kappa_c / 4.0);
  for (int i = 0; i < grid.count; ++i) {
    v[i] = pref / std::cosh(0.5 * kappa_c * (grid.time(i) - t0));
  }
  return PulseShape(grid, std::move(v)).normalized();
}

namespace {

// kappa_m / (1 + e^{-x}) evaluated without overflow.
double logistic(double kappa_m, double x) {
  if (x >= 0.0) return kappa_m / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return kappa_m * e / (1.0 + e);
}

}  // namespace

PulseShape optimal_release_kappa(double kappa_c, double kappa_m, double t0, const TimeGrid& grid) {
  if (!(kappa_c > 0.0) || !(kappa_m > 0.0)) {
    throw ParameterError("optimal_release_kappa: kappa_c and kappa_m must be positive");
  }
  check_grid(grid);
  std::vector<double> v(grid.count);
  for (int i = 0; i < grid.count; ++i) v[i] = logistic(kappa_m, kappa_c * (grid.time(i) - t0));
  return PulseShape(grid, v);
}

PulseShape optimal_capture_kappa(double kappa_c, double kappa_m, double t0, const TimeGrid& grid) {
  if (!(kappa_c > 0.0) || !(kappa_m > 0.0)) {
    throw ParameterError("optimal_capture_kappa: kappa_c and kappa_m must be positive");
  }
  check_grid(grid);
  std::vector<double> v(grid.count);
  for (int i = 0; i < grid.count; ++i) v[i] = logistic(kappa_m, -kappa_c * (grid.time(i) - t0));
  return PulseShape(grid, v);
}

namespace {

double skewed_sech_value(double theta, double w, double t0, double t) {
  const double tau = (t - t0) / w;
  const double a = 0.5 * M_PI * std::abs(tau);
  // e^{theta tau} / (2 cosh(a)) = e^{theta tau - a} / (1 + e^{-2a}).
  return std::cos(theta) * std::exp(theta * tau - a) / (1.0 + std::exp(-2.0 * a));
}

}  // namespace

PulseShape skewed_sech(double theta, double w, double t0, const TimeGrid& grid, bool normalize) {
  if (!(std::abs(theta) < 0.5 * M_PI)) {
    throw ParameterError("skewed_sech: |theta| must be below pi/2");
  }
  if (!(w > 0.0)) throw ParameterError("skewed_sech: w must be positive");
  check_grid(grid);
  std::vector<double> v(grid.count);
  for (int i = 0; i < grid.count; ++i) v[i] = skewed_sech_value(theta, w, t0, grid.time(i));
  PulseShape p(grid, v);
  if (normalize) {
    const double a = p.area().real();
    if (!(a > 0.0)) throw ParameterError("skewed_sech: zero area on this grid");
    p = p.scaled(1.0 / a);
  }
  return p;
}

PulseShape flattop(double width, double rise_w, double amplitude, const TimeGrid& grid,
                   double t_on) {
  if (!(width > 0.0)) throw ParameterError("flattop: width must be positive");
  if (!(rise_w >= 0.0)) throw ParameterError("flattop: rise_w must be nonnegative");
  check_grid(grid);
  const double t_off = t_on + width;
  std::vector<double> v(grid.count);
  for (int i = 0; i < grid.count; ++i) {
    const double t = grid.time(i);
    if (rise_w == 0.0) {
      v[i] = (t >= t_on && t < t_off) ? amplitude : 0.0;
    } else {
      const double s = std::sqrt(2.0) * rise_w;
      v[i] = 0.5 * amplitude * (std::erf((t - t_on) / s) - std::erf((t - t_off) / s));
    }
  }
  return PulseShape(grid, v);
}

PulseShape gaussian_filter(const PulseShape& p, double sigma) {
  if (!(sigma >= 0.0)) throw ParameterError("gaussian_filter: sigma must be nonnegative");
  if (sigma == 0.0 || p.size() < 2) return p;
  const double s = sigma / p.grid.step;
  const int radius = std::max(1, static_cast<int>(std::ceil(5.0 * s)));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * (k / s) * (k / s));
    total += kernel[k + radius];
  }
  for (auto& k : kernel) k /= total;

  const int n = p.size();
  std::vector<Complex> out(n);
  for (int i = 0; i < n; ++i) {
    Complex acc = 0.0;
    for (int k = -radius; k <= radius; ++k) {
      const int j = std::clamp(i + k, 0, n - 1);
      acc += kernel[k + radius] * p.values[j];
    }
    out[i] = acc;
  }
  return PulseShape(p.grid, std::move(out));
}

double rise_time_10_90(const PulseShape& p) {
  const auto v = p.real();
  const auto peak_it = std::max_element(v.begin(), v.end());
  const double peak = *peak_it;
  if (!(peak > 0.0)) throw ParameterError("rise_time_10_90: pulse has no positive maximum");
  const auto crossing = [&](double level) {
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (v[i - 1] < level && v[i] >= level) {
        const double f = (level - v[i - 1]) / (v[i] - v[i - 1]);
        return p.time(static_cast<int>(i) - 1) + f * p.grid.step;
      }
    }
    throw ParameterError("rise_time_10_90: leading edge not resolved on the grid");
  };
  return crossing(0.9 * peak) - crossing(0.1 * peak);
}

// ---------------------------------------------------------------------------
// Skewed-sech fit
// ---------------------------------------------------------------------------

namespace {

// Parameters x = {atanh(2 theta / pi), log w, t0, amplitude}; the mapping
// keeps |theta| < pi/2 and w > 0 during the search.
struct SkewFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>* t;
  const std::vector<double>* y;
  double time_scale;

  int inputs() const { return 4; }
  int values() const { return static_cast<int>(t->size()); }

  static double theta_of(double s) { return 0.5 * M_PI * std::tanh(s); }

  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    const double theta = theta_of(x[0]);
    const double w = std::exp(x[1]) * time_scale;
    const double t0 = x[2] * time_scale;
    for (std::size_t i = 0; i < t->size(); ++i) {
      f[static_cast<Eigen::Index>(i)] =
          x[3] * skewed_sech_value(theta, w, t0, (*t)[i]) - (*y)[i];
    }
    return 0;
  }
};

}  // namespace

SkewedSechFit fit_skewed_sech(const std::vector<double>& times, const std::vector<double>& values,
                              const FitOptions& options) {
  if (times.size() != values.size()) throw InvalidDimension("fit_skewed_sech: size mismatch");
  if (times.size() < 8) throw ParameterError("fit_skewed_sech: need at least 8 samples");

  const auto peak_it = std::max_element(values.begin(), values.end());
  const std::size_t ip = static_cast<std::size_t>(peak_it - values.begin());
  const double peak = *peak_it;
  if (!(peak > 0.0)) throw ParameterError("fit_skewed_sech: trace has no positive peak");
  if (ip == 0 || ip + 1 == values.size()) {
    throw ParameterError("fit_skewed_sech: samples do not span the peak");
  }

  // Full width at half maximum by linear interpolation on both flanks.
  double left = times.front(), right = times.back();
  for (std::size_t i = ip; i > 0; --i) {
    if (values[i - 1] < 0.5 * peak) {
      const double f = (0.5 * peak - values[i - 1]) / (values[i] - values[i - 1]);
      left = times[i - 1] + f * (times[i] - times[i - 1]);
      break;
    }
  }
  for (std::size_t i = ip; i + 1 < values.size(); ++i) {
    if (values[i + 1] < 0.5 * peak) {
      const double f = (values[i] - 0.5 * peak) / (values[i] - values[i + 1]);
      right = times[i] + f * (times[i + 1] - times[i]);
      break;
    }
  }
  const double fwhm = std::max(right - left, 1e-3 * (times.back() - times.front()));
  const double w0 = fwhm / 1.677;
  const double t_peak = times[ip];

  // Sign of the asymmetry from the third moment about the peak.
  double m3 = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double d = (times[i] - t_peak) / w0;
    m3 += std::max(values[i], 0.0) * d * d * d;
  }
  const double skew_sign = m3 > 0 ? 1.0 : (m3 < 0 ? -1.0 : 0.0);

  const double scale = w0;
  SkewFunctor functor{&times, &values, scale};
  Eigen::NumericalDiff<SkewFunctor> numdiff(functor);

  SkewedSechFit best;
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x(4);
  bool converged = false;

  for (double theta_start : {0.3 * skew_sign, 0.0, 0.7 * skew_sign, -0.3 * skew_sign}) {
    // The maximum of the skewed sech sits at t0 + w (2/pi) atanh(2 theta / pi).
    const double t0_start = t_peak - w0 * (2.0 / M_PI) * std::atanh(2.0 * theta_start / M_PI);
    const double f_peak = skewed_sech_value(theta_start, w0, t0_start, t_peak);
    Eigen::VectorXd x(4);
    x << std::atanh(2.0 * theta_start / M_PI), 0.0, t0_start / scale, peak / f_peak;

    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<SkewFunctor>> lm(numdiff);
    lm.parameters.maxfev = options.max_function_evaluations;
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-14;
    const auto status = lm.minimize(x);

    Eigen::VectorXd f(static_cast<Eigen::Index>(times.size()));
    functor(x, f);
    const double cost = f.squaredNorm();
    if (!std::isfinite(cost)) continue;
    const bool ok = status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
                    status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters;
    if (cost < best_cost) {
      best_cost = cost;
      best_x = x;
      converged = ok;
    }
  }
  if (!std::isfinite(best_cost)) {
    throw FitFailure("fit_skewed_sech: no start point produced a finite residual", {});
  }
  best.theta = SkewFunctor::theta_of(best_x[0]);
  best.w = std::exp(best_x[1]) * scale;
  best.t0 = best_x[2] * scale;
  best.amplitude = best_x[3];
  best.residual = std::sqrt(best_cost / static_cast<double>(times.size()));
  if (!converged) {
    throw FitFailure("fit_skewed_sech: Levenberg-Marquardt did not converge",
                     {best.theta, best.w, best.t0, best.amplitude});
  }
  return best;
}

void write_pulse_csv(std::ostream& out, const PulseShape& p) {
  out << "time_s,re,im\n" << std::setprecision(17);
  for (int i = 0; i < p.size(); ++i) {
    out << p.time(i) << ',' << p.values[i].real() << ',' << p.values[i].imag() << '\n';
  }
}

}  // namespace wavelink
