#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace decontam {

// Invalid configuration (empty test-set list, mismatched pool configs, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable or unwritable files, failed subprocesses.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed pool file; `offset` is the byte position of the problem.
class PoolFormatError : public std::runtime_error {
public:
    PoolFormatError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte offset " +
                             std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

}  // namespace decontam
