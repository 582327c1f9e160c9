// Copyright 2026 The QHBM Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QHBM_ERRORS_HPP
#define QHBM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qhbm {

// Wrong vector/matrix/configuration shape handed to an operation.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid user-facing configuration (bad option values, unknown keys).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or missing input data (files, datasets, checkpoints).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical invariant failed (non-PSD matrix, unnormalised distribution).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void check_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace qhbm

#endif
