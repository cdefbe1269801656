#pragma once

#include <stdexcept>
#include <string>

namespace lesionfuse {

/// Malformed configuration: unknown descriptor ids, bad grids, invalid
/// parameter ranges. The CLI maps this to exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad input data: unreadable files, malformed CSV rows, mismatched ids,
/// non-finite values. The CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lesionfuse
