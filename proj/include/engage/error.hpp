#pragma once

#include <stdexcept>
#include <string>

namespace engage {

// Error categories map one-to-one onto CLI exit codes (1, 2, 3).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace engage
