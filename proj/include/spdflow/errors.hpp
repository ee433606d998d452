#pragma once

#include <stdexcept>
#include <string>

namespace spdflow {

// File-format and filesystem failures (unreadable path, bad header, short payload).
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures surfaced to the caller by policy: strict-mode SPD
// violations and detected instabilities. A domain error (the data left the
// domain the math is defined on), distinct from std::invalid_argument (bad
// configuration) so drivers can map them to different exit codes.
struct NumericalError : std::domain_error {
    explicit NumericalError(const std::string& what) : std::domain_error(what) {}
};

} // namespace spdflow
