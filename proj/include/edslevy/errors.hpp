#pragma once

#include <stdexcept>
#include <string>

namespace edslevy {

/// Invalid input or configuration. The CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical stage could not produce a trustworthy result. The CLI maps
/// this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace edslevy
