// Copyright 2026 The BPE Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace bpe {

/// A caller broke a documented precondition (bad index, length mismatch, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A request exceeds a hard size limit (dense backends, configured maxima).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Input data cannot support the requested analysis (e.g. no overlap in a collapse).
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Something that must hold by construction did not.
class InternalInvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool cond, const std::string &what) {
  if (!cond) {
    throw ContractViolation(what);
  }
}

}  // namespace detail
}  // namespace bpe
