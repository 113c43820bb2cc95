#pragma once

#include <charconv>
#include <string>
#include <string_view>
#include <system_error>

#include "windcast/error.hpp"

namespace windcast {

/// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

/// Strict full-string double parse (locale independent).
/// Returns false on trailing garbage or empty input.
inline bool parse_double(std::string_view text, double& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto r = std::from_chars(first, last, out);
    return r.ec == std::errc() && r.ptr == last;
}

inline bool parse_int64(std::string_view text, std::int64_t& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    const auto r = std::from_chars(first, last, out);
    return r.ec == std::errc() && r.ptr == last;
}

} // namespace windcast
