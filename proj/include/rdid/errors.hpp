#pragma once

#include <stdexcept>
#include <string>

namespace rdid {

// Bad inputs: rejected before any state is touched. CLI exit code 1.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Computation produced something unusable (NaN state, no valid certificate,
// singular implicit matrix, non-convergent root find). CLI exit code 2.
struct numerical_alarm : std::runtime_error {
    explicit numerical_alarm(const std::string& msg) : std::runtime_error(msg) {}
};

// Filesystem failures. CLI exit code 3.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace rdid
