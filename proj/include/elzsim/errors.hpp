// Copyright 2026 The elzsim Authors
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

namespace elzsim {

/// Input outside the mathematical or physical domain of an operation.
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Mixture fit could not separate two components.
struct DegenerateFitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A requested window or index lies outside the available data.
struct BoundsError : std::out_of_range {
    using std::out_of_range::out_of_range;
};

struct InsufficientDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Nonlinear fit failed to converge or the data do not constrain it.
struct FitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration text is malformed or violates a parameter invariant.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace elzsim
