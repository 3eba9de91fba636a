// Copyright 2026 The sedkit Authors
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

#ifndef SEDKIT_ERRORS_HPP_
#define SEDKIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sedkit {

// Base class for all errors raised by this library.  The CLI maps the
// subclasses onto process exit codes: ConfigError -> 1 (usage), the data /
// format / shape family -> 2, NumericAbort -> 3.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Tensor/layer dimension mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value (bad probability, empty task list, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A call-site precondition was violated (non-scalar loss, label outside
// {0,1}, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A file is well-formed enough to read but violates the declared format
// (stereo wav, unsupported bit depth, bad magic, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A file or stream is malformed or truncated where structure was expected.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Dataset-level problem: empty split, missing audio, inconsistent labels.
class DataError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss or gradient; the run must stop.
class NumericAbort : public Error {
 public:
  using Error::Error;
};

}  // namespace sedkit

#endif  // SEDKIT_ERRORS_HPP_
