/*
 * Copyright 2026 The drltr Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
// Exception types shared by all drltr modules.

#ifndef DRLTR_ERRORS_H_
#define DRLTR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace drltr {

// Input outside the mathematical domain of an operation (bad label, tau <= 0,
// unclamped probabilities in a log term, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed text input. `line` is 1-based; 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what
                                    : what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

// Numerical breakdown during training (non-finite loss, scores or weights).
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace drltr

#endif  // DRLTR_ERRORS_H_
