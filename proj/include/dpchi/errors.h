//
// Copyright 2026 The dpchi Authors
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
//

#ifndef DPCHI_ERRORS_H_
#define DPCHI_ERRORS_H_

#include <stdexcept>
#include <string>

namespace dpchi {

// Base class for every error raised by the library. The CLI maps all of these
// to the "data/domain error" exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric argument lies outside the domain of the operation (rho <= 0,
// alpha outside (0,1), invalid probability vector, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Vector or matrix dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Input files or tables that cannot be interpreted as counts.
class DataError : public Error {
 public:
  using Error::Error;
};

// Fewer Monte Carlo samples than the requested level requires.
class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

// Inconsistent experiment configuration, detected before any work is done.
class ConfigError : public Error {
 public:
  using Error::Error;
};

namespace internal {

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

inline void RequireShape(bool condition, const std::string& message) {
  if (!condition) throw ShapeError(message);
}

}  // namespace internal
}  // namespace dpchi

#endif  // DPCHI_ERRORS_H_
