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

#include "cbf/errors.hpp"

#include <fmt/format.h>

namespace cbf {

BarrierViolation::BarrierViolation(int edge, double t, double d)
    : Error(fmt::format("barrier violation on edge {} at t={:.6f} (d={:.3e})", edge, t, d)),
      edge_(edge),
      t_(t),
      d_(d) {}

namespace {
std::string joinProblems(const std::vector<std::string>& problems) {
  std::string out = "invalid input:";
  for (const auto& p : problems) {
    out += "\n  - ";
    out += p;
  }
  return out;
}
}  // namespace

ValidationError::ValidationError(std::vector<std::string> problems)
    : Error(joinProblems(problems)), problems_(std::move(problems)) {}

}  // namespace cbf
