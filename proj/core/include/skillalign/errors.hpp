// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace skillalign {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed or inconsistent input data: files, records, enum values, invariant violations.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Bad or incomplete configuration (missing paths, unknown provider names).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Provider call failed. Transient failures are eligible for retry,
/// non-transient ones (authentication, malformed reply) are not.
class ProviderError : public Error {
public:
    ProviderError(const std::string& what, bool transient)
        : Error(what), transient_(transient) {}
    bool transient() const { return transient_; }

private:
    bool transient_;
};

}  // namespace skillalign
