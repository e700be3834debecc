#pragma once

#include <stdexcept>
#include <string>

namespace tdn {

// Error taxonomy shared across the library. The CLI maps these onto process
// exit codes: ConfigError -> 2, DataError/IoError -> 3, NumericError/TrainError -> 4.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace tdn
