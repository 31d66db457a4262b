#pragma once

#include <stdexcept>
#include <string>

namespace specmap {

/// Input that violates a documented contract (bad file contents, mismatched
/// dimensions, invalid manifest). The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Failures that are not the caller's fault: I/O, locks, ports in use.
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace specmap
