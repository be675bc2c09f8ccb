// Copyright 2026 The PEEL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PEEL_ERRORS_H_
#define PEEL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace peel {

// Bad configuration values (epsilon <= 0, missing columns, malformed files).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Input outside the declared domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Mismatch between a report/vector and the object it is used with
// (wrong payload shape, wrong dimension, wrong mechanism kind).
class TypeError : public std::invalid_argument {
 public:
  explicit TypeError(const std::string& msg) : std::invalid_argument(msg) {}
};

// An input that makes the operation undefined (e.g. all-zero inclusion
// products in Horvitz-Thompson allocation).
class DegenerateInputError : public std::invalid_argument {
 public:
  explicit DegenerateInputError(const std::string& msg)
      : std::invalid_argument(msg) {}
};

// Restore called on a vector with no recoverable support.
class RestorationError : public std::runtime_error {
 public:
  explicit RestorationError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// Codec construction failed (e.g. condition-number rejection exhausted
// its retry budget).
class ConstructionError : public std::runtime_error {
 public:
  explicit ConstructionError(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace peel

#endif  // PEEL_ERRORS_H_
