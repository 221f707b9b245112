// Copyright 2026 The rofl-lab Authors.
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

#ifndef ROFL_ERRORS_H_
#define ROFL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace rofl {

// Base of every error the library raises on its own.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or parameter value (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Vector lengths or container sizes that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Operations invoked out of order, or state the protocol does not allow.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Secure aggregation aborted a round. Carries the failing coordinate and
// the name of the check so the transcript can record the evidence.
class ProtocolAbort : public ProtocolError {
 public:
  ProtocolAbort(std::string check, long coordinate, const std::string& what)
      : ProtocolError(what), check_(std::move(check)), coordinate_(coordinate) {}

  const std::string& check() const { return check_; }
  long coordinate() const { return coordinate_; }

 private:
  std::string check_;
  long coordinate_;
};

// Truncated or malformed byte encodings.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// File system failures (CLI exit code 4).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rofl

#endif  // ROFL_ERRORS_H_
