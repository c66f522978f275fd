#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdelab {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// A modelling hypothesis does not hold (theta threshold, r(N) <= 0, ...).
class HypothesisError : public Error {
public:
    using Error::Error;
};

class BlowUpError : public Error {
public:
    BlowUpError(std::size_t step_index, const std::string& what)
        : Error("non-finite state at step " + std::to_string(step_index) + ": " + what),
          step_(step_index) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

inline void require_same_size(std::size_t a, std::size_t b, const char* where) {
    if (a != b) {
        throw DimensionError(std::string(where) + ": dimension mismatch (" + std::to_string(a) +
                             " vs " + std::to_string(b) + ")");
    }
}

}  // namespace spdelab
