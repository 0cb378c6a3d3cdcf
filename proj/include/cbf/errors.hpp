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

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cbf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Relative position vector too short to define a direction.
class DegenerateEdge : public Error {
 public:
  using Error::Error;
};

// Some edge reached d <= d_floor. The offending edge (follower index, 1-based
// agent numbering) and the time are kept so the caller can report them.
class BarrierViolation : public Error {
 public:
  BarrierViolation(int edge, double t, double d);
  int edge() const noexcept { return edge_; }
  double time() const noexcept { return t_; }
  double distance() const noexcept { return d_; }

 private:
  int edge_;
  double t_;
  double d_;
};

class NonFiniteState : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// Carries every violated invariant, not only the first one found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

}  // namespace cbf
