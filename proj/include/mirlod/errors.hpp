#pragma once

#include <stdexcept>
#include <string>

namespace mirlod {

// Base class for every error raised by the engine. Messages carry
// file:line context where the failure came from parsing input files.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mirlod
