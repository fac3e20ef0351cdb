// Copyright 2026 the mi-audit authors
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

#ifndef MIAUDIT_ERRORS_HPP
#define MIAUDIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace miaudit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A value violates an operation's preconditions (shape, range, finiteness).
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// Data does not match its declared feature schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the offending line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, long line = -1)
      : Error(line >= 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Binary container (IDX, checkpoint) is not in the expected format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Not enough records to satisfy a split or sampling request.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// Training diverged or could not proceed; names the offending step.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Experiment or attack configuration is inconsistent.
class ConfigurationError : public Error {
 public:
  using Error::Error;
};

/// Model is degenerate for the requested operation (zero weights, no hidden layer).
class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

/// Requested architecture does not support the operation.
class UnsupportedArchitectureError : public Error {
 public:
  using Error::Error;
};

/// A task class has no shadow examples to tune on.
class CoverageError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure while reading or writing artifacts.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace miaudit

#endif  // MIAUDIT_ERRORS_HPP
