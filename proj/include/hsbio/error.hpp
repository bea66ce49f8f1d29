// Copyright 2026 The hsbio Authors
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

#ifndef HSBIO_ERROR_HPP_
#define HSBIO_ERROR_HPP_

#include <stdexcept>

namespace hsbio {

// Base for all recoverable data/parameter errors raised by the library.
// Internal invariant violations use std::logic_error instead.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MalformedWav : Error { using Error::Error; };
struct UnsupportedFormat : Error { using Error::Error; };
struct InvalidCutoff : Error { using Error::Error; };
struct SignalTooShort : Error { using Error::Error; };
struct NoPeriodFound : Error { using Error::Error; };
struct TooFewTones : Error { using Error::Error; };
struct InvalidBand : Error { using Error::Error; };
struct NoCompleteCycle : Error { using Error::Error; };
struct DegeneratePower : Error { using Error::Error; };
struct NoValidSubsequence : Error { using Error::Error; };
struct DimensionMismatch : Error { using Error::Error; };
struct InsufficientData : Error { using Error::Error; };
struct NonFiniteFeature : Error { using Error::Error; };
struct EmptyFeatures : Error { using Error::Error; };
struct EmptyTrials : Error { using Error::Error; };
struct ManifestError : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };

}  // namespace hsbio

#endif  // HSBIO_ERROR_HPP_
