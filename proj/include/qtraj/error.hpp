// Copyright 2026 The qtraj Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace qtraj {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid argument, parameter or configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Shapes or spaces that do not fit together.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Probability mass reached the top of the truncated Fock basis.
class TruncationError : public Error {
public:
    TruncationError(const std::string& what, int subsystem)
        : Error(what), subsystem_(subsystem) {}

    /// Offending subsystem, or -1 when the breach is not attributable to one.
    int subsystem() const noexcept { return subsystem_; }

private:
    int subsystem_;
};

/// The integration step is too large for the current state (norm drift or rate monitor).
class StepSizeError : public Error {
public:
    using Error::Error;
};

/// Internal inconsistency detected in a numerical kernel.
class NumericalFault : public Error {
public:
    using Error::Error;
};

/// Requested work exceeds the configured resource guard.
class ResourceGuardError : public Error {
public:
    using Error::Error;
};

}  // namespace qtraj
