#pragma once

#include <stdexcept>
#include <string>

namespace tbg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// exit code 2
struct InvalidInput : Error {
    using Error::Error;
};

// exit code 3: size or radius guards, degenerate denominators
struct ComputeGuard : Error {
    using Error::Error;
};

// exit code 4
struct IoError : Error {
    using Error::Error;
};

// an identity that must hold by construction did not
struct InternalError : Error {
    using Error::Error;
};

}  // namespace tbg
