// Copyright 2026 The GuardNet Authors
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

#ifndef GUARDNET_ERRORS_H_
#define GUARDNET_ERRORS_H_

#include <stdexcept>
#include <string>

namespace guardnet {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data: interchange records, CoNLL-U files, score files,
// checkpoints, or arguments that violate an operation's preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Shape disagreement between matrices, graphs and models.
class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Non-finite values produced during training or inference.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Bad command-line usage (missing paths, unknown flags).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace guardnet

#endif  // GUARDNET_ERRORS_H_
