#pragma once

#include <stdexcept>
#include <string>

namespace atomstress {

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// geometry too small for the requested cutoff, bad cell, etc.
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// integration blow-up, failed root search
struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace atomstress
