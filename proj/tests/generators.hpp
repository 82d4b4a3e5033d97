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

// Hand-rolled random generators for property tests.

#ifndef WAVELINK_TESTS_GENERATORS_HPP_
#define WAVELINK_TESTS_GENERATORS_HPP_

#include <random>

#include "wavelink/hilbert.hpp"

namespace wavelink::testing {

inline Matrix random_complex(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int dim) {
  const Matrix g = random_complex(rng, dim, dim);
  return 0.5 * (g + g.adjoint());
}

/// Full-rank random state (Ginibre ensemble); rank < dim when requested.
inline Matrix random_density(std::mt19937_64& rng, int dim, int rank = -1) {
  if (rank < 0) rank = dim;
  const Matrix g = random_complex(rng, dim, rank);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

inline Vector random_ket(std::mt19937_64& rng, int dim) {
  Vector v = random_complex(rng, dim, 1);
  return v / v.norm();
}

inline Matrix random_unitary(std::mt19937_64& rng, int dim) {
  Eigen::HouseholderQR<Matrix> qr(random_complex(rng, dim, dim));
  return qr.householderQ() * Matrix::Identity(dim, dim);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace wavelink::testing

#endif  // WAVELINK_TESTS_GENERATORS_HPP_
