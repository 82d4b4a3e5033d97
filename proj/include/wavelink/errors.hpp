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

#ifndef WAVELINK_ERRORS_HPP_
#define WAVELINK_ERRORS_HPP_

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wavelink {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented physical or numerical precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A matrix does not satisfy the density-matrix invariants.
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// The adaptive integrator could not make progress.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, double last_good_time)
      : Error(what), last_good_time_(last_good_time) {}
  double last_good_time() const { return last_good_time_; }

 private:
  double last_good_time_;
};

/// Nonlinear fit did not converge. Carries the best parameter vector seen.
class FitFailure : public Error {
 public:
  FitFailure(const std::string& what, std::vector<double> best)
      : Error(what), best_(std::move(best)) {}
  const std::vector<double>& best() const { return best_; }

 private:
  std::vector<double> best_;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

class ReconstructionError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Non-fatal diagnostics (truncation warnings, normalization warnings).
/// The default handler writes to stderr; tests install a capturing handler.
using WarningHandler = std::function<void(const std::string&)>;

void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

}  // namespace wavelink

#endif  // WAVELINK_ERRORS_HPP_
