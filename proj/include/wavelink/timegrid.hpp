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

#ifndef WAVELINK_TIMEGRID_HPP_
#define WAVELINK_TIMEGRID_HPP_

#include <cmath>
#include <vector>

namespace wavelink {

/// Uniform time grid t_i = start + i * step, i = 0 .. count-1 (seconds).
struct TimeGrid {
  double start = 0.0;
  double step = 0.0;
  int count = 0;

  double time(int i) const { return start + step * i; }
  double end() const { return start + step * (count - 1); }

  std::vector<double> times() const {
    std::vector<double> t(count);
    for (int i = 0; i < count; ++i) t[i] = time(i);
    return t;
  }

  /// Grid covering [start, stop] (inclusive, rounded to whole steps).
  static TimeGrid spanning(double start, double stop, double step) {
    const int n = static_cast<int>(std::floor((stop - start) / step + 1e-9)) + 1;
    return {start, step, n};
  }

  bool operator==(const TimeGrid&) const = default;
};

}  // namespace wavelink

#endif  // WAVELINK_TIMEGRID_HPP_
