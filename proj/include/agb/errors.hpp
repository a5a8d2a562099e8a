#pragma once

#include <stdexcept>
#include <string>

namespace agb {

// Base of everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A precondition on the arguments was violated (index out of range,
// depth too small, non-increasing schedule, frequency outside horizon).
class DomainError : public Error {
public:
    using Error::Error;
};

// Malformed input files or experiment configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A materialization cap or term budget would be exceeded.
class ResourceError : public Error {
public:
    using Error::Error;
};

} // namespace agb
