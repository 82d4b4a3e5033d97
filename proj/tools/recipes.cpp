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

#include <algorithm>
#include <utility>

#include "scenarios.hpp"

namespace wavelink::cli {

namespace {

const std::pair<const char*, const char*> kShipped[] = {
#include "recipes_data.inc"
};

// First line "# text" of the document.
std::string description_of(const std::string& body) {
  const std::string line = body.substr(0, body.find('\n'));
  if (line.rfind("# ", 0) != 0) return "";
  return line.substr(2);
}

}  // namespace

const std::vector<Recipe>& recipes() {
  static const std::vector<Recipe> list = [] {
    std::vector<Recipe> out;
    for (const auto& [name, body] : kShipped) out.push_back({name, description_of(body), body});
    std::sort(out.begin(), out.end(), [](const Recipe& a, const Recipe& b) { return a.name < b.name; });
    return out;
  }();
  return list;
}

const Recipe* find_recipe(const std::string& name) {
  for (const auto& r : recipes()) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace wavelink::cli
