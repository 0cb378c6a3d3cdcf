// Copyright 2026 The cbfform Authors
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

// Claim suites behind `cbfform verify`.

#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cbf/scenario.hpp"

namespace cbf {

struct Claim {
  std::string suite;
  std::string name;
  bool passed = false;
  std::string detail;
  nlohmann::json measured;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<Claim> claims;

  bool allPassed() const;
  nlohmann::json toJson() const;
  std::string summary() const;
};

/// lemma1, lyapunov, setpoints, instability, preset
std::vector<std::string> suiteNames();

/// Runs the selected suites ("all" expands to every suite). Randomized
/// claims draw from one generator seeded with `seed`. Throws
/// ValidationError for an unknown suite.
VerifyReport runVerify(const std::vector<std::string>& suites, std::uint64_t seed, unsigned threads = 1);

/// Random two-agent scenario with a static leader and static formation, used
/// by the Lyapunov suite. Not filtered for barrier margin.
Scenario randomTwoAgentScenario(std::mt19937_64& rng);

/// Runs fn(0..count-1) on up to `threads` workers.
void parallelFor(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace cbf
