#pragma once

#include <stdexcept>
#include <string>

namespace windcast {

/// Error type thrown by every windcast operation on contract violations
/// and I/O failures. The message is a single human-readable line.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace windcast
