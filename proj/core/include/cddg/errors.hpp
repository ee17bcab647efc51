// Copyright 2026 The CDDG Authors. All rights reserved.
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

#ifndef CDDG_ERRORS_HPP_
#define CDDG_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace cddg {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A label or index outside its declared range.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Tensor or matrix dimensions that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A caller-side precondition on values (e.g. unit-norm rows) was violated.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A scalar parameter outside its mathematical domain (e.g. temperature <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration document or specification.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Dataset directory could not be ingested.
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Checkpoint produced by a different configuration or format version.
class VersionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a NaN or infinite loss.
class NonFiniteLossError : public Error {
 public:
  using Error::Error;
};

}  // namespace cddg

#endif  // CDDG_ERRORS_HPP_
