#pragma once

#include <stdexcept>
#include <string>

namespace adacos {

// Bad input: malformed files, contract violations, conflicting options.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A solver failed to converge or produced a non-finite result.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace adacos
