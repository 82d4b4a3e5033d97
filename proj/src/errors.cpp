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

#include "wavelink/errors.hpp"

#include <iostream>
#include <mutex>

namespace wavelink {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler_slot() {
  static WarningHandler handler;
  return handler;
}

}  // namespace

void set_warning_handler(WarningHandler handler) {
  std::lock_guard lock(handler_mutex());
  handler_slot() = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard lock(handler_mutex());
  if (handler_slot()) {
    handler_slot()(message);
  } else {
    std::cerr << "wavelink warning: " << message << '\n';
  }
}

}  // namespace wavelink
