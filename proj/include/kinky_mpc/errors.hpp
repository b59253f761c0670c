// Copyright 2026 The kinky-mpc Authors
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

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace kinky_mpc {

/// Bad dimensions, non-finite inputs or invalid parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Two observations that no function with the configured Hölder constant
/// can explain. `first` and `second` index the offending pair in the
/// dataset; `second == kIncoming` means the observation being added.
class HolderViolation : public std::runtime_error {
 public:
  static constexpr std::size_t kIncoming =
      std::numeric_limits<std::size_t>::max();

  HolderViolation(const std::string& what, std::size_t first,
                  std::size_t second, double implied_q)
      : std::runtime_error(what),
        first_(first),
        second_(second),
        implied_q_(implied_q) {}

  std::size_t first() const { return first_; }
  std::size_t second() const { return second_; }
  /// Smallest Hölder constant that would make the pair consistent.
  double implied_q() const { return implied_q_; }

 private:
  std::size_t first_;
  std::size_t second_;
  double implied_q_;
};

/// Non-finite intermediate value. `step` is the time/horizon index where it
/// appeared, or -1 when not applicable.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// A runtime diagnostic that must hold by construction failed.
class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kinky_mpc
