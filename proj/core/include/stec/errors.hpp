// Copyright 2026 The STEC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STEC_ERRORS_HPP_
#define STEC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace stec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or axis mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf produced by an operation, or a non-finite input value.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Invalid argument value (labels outside {0,1}, batch size < 1, ...).
class ValueError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

// Corrupt, truncated or incompatible weight file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Malformed dataset input.
class DataError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A metric that is undefined for the given input (single-class AUC).
class MetricError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace stec

#endif  // STEC_ERRORS_HPP_
