/* Copyright 2026 The MSnet Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef MSNET_ERROR_HPP_
#define MSNET_ERROR_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace msnet {

// Base of every error raised by the library. The CLI maps the two families
// below onto its exit codes: input/usage problems exit 1, I/O and file format
// problems exit 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NumericError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class AlignmentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// A GAP row that failed validation. Carries the 1-based data row number and
// the record id (empty when the id column itself could not be read).
class RecordError : public ValidationError {
 public:
  RecordError(std::size_t row, std::string id, const std::string& what)
      : ValidationError("row " + std::to_string(row) +
                        (id.empty() ? std::string() : " (" + id + ")") + ": " +
                        what),
        row_(row),
        id_(std::move(id)) {}

  std::size_t row() const { return row_; }
  const std::string& id() const { return id_; }

 private:
  std::size_t row_;
  std::string id_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed binary input; `offset` is the byte position where reading failed.
class FormatError : public IoError {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : IoError(what + " at byte " + std::to_string(offset)), offset_(offset) {}

  std::uint64_t offset() const { return offset_; }

 private:
  std::uint64_t offset_;
};

}  // namespace msnet

#endif  // MSNET_ERROR_HPP_
