#pragma once

#include <stdexcept>
#include <string>

namespace ambrosia {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration or input. The CLI maps this to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

}  // namespace ambrosia
