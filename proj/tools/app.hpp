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

#ifndef WAVELINK_TOOLS_APP_HPP_
#define WAVELINK_TOOLS_APP_HPP_

#include <iosfwd>

namespace wavelink::cli {

inline constexpr int kExitOk = 0;
/// Bad command line, unreadable/unwritable files.
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSimulation = 3;
inline constexpr int kExitReconstruction = 4;

/// Entry point of the `wavelink` tool:
///   wavelink run <config|recipe> [--set key=value]... [--workers N] [--output-dir DIR]
///   wavelink recipes [--show NAME]
///   wavelink validate <config|recipe> [--set key=value]...
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavelink::cli

#endif  // WAVELINK_TOOLS_APP_HPP_
