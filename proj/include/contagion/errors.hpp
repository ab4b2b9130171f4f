#pragma once

#include <stdexcept>
#include <string>

namespace contagion {

/// Input or configuration that violates a documented invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not produce a meaningful result
/// (total absorption, non-contraction, non-finite values).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The const char* overload keeps hot-path checks free of string construction.
inline void require(bool condition, const char* message) {
    if (!condition) [[unlikely]] {
        throw ValidationError(message);
    }
}

inline void require(bool condition, const std::string& message) {
    if (!condition) [[unlikely]] {
        throw ValidationError(message);
    }
}

}  // namespace contagion
