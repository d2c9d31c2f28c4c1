// include/casc/base/errors.h

// Copyright 2026  The casc-tar Authors

// See the top-level LICENSE file for the full license text.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CASC_BASE_ERRORS_H_
#define CASC_BASE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace casc {

// Caller violated an operation's precondition (bad shape, bad argument).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite value where a finite one is required.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration, or a model/checkpoint that does not match it.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested target (alignment, compression factor) cannot be reached.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string &what, long step)
      : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// Checkpoint container failures. Each failure mode has its own type.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};
class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};
class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace casc

#endif  // CASC_BASE_ERRORS_H_
