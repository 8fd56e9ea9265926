// Copyright 2026 The oscnet Authors
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

#pragma once

// Small networks shared by several test files.

#include "oscnet/network.hpp"

#include <string>
#include <utility>
#include <vector>

namespace fixture {

/// Three-node open chain with omega = (1.2, 1.0, 1.8) and lambda_12 = lambda_23 = 0.4.
inline oscnet::NetworkSpec chain3() { return oscnet::build_network({1.2, 1.0, 1.8}, {{{0, 1}, 0.4}, {{1, 2}, 0.4}}); }

inline oscnet::NetworkSpec uncoupled(const std::vector<double>& omega) {
  return oscnet::build_network(omega, std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>>{});
}

inline oscnet::NetworkSpec pair(double wa, double wb, double lambda) {
  return oscnet::build_network({wa, wb}, {{{0, 1}, lambda}});
}

inline std::string preset(const std::string& name) { return std::string(OSCNET_PRESET_DIR) + "/" + name; }

}  // namespace fixture
