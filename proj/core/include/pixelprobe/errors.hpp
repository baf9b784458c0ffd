/*
 * Copyright 2026 The PixelProbe Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIXELPROBE_ERRORS_HPP
#define PIXELPROBE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pixelprobe {

// Raised when a caller breaks an operation's precondition (bad shapes,
// malformed candidates, out-of-range indices).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// File-level failures: unreadable PNGs, mask/image dimension mismatch.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An oracle answered, but the answer breaks the protocol (bad JSON, wrong
// count, probabilities off the simplex).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The oracle could not be reached (after the allowed retry).
class OracleUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pixelprobe

#endif  // PIXELPROBE_ERRORS_HPP
