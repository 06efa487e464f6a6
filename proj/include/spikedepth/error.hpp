#pragma once

#include <stdexcept>
#include <string>

namespace spikedepth {

// Bad input: malformed trains, inconsistent domains, out-of-range parameters.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A computation produced a non-finite or otherwise unusable value.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond) throw ValidationError(what);
}

}  // namespace spikedepth
