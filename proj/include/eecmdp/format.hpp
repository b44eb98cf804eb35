#pragma once

#include <charconv>
#include <string>

namespace eecmdp {

// Shortest decimal form that round-trips to the same double; keeps
// every textual artifact (config dumps, CSV, reports, tables)
// canonical and byte-stable.
inline std::string fmt_double(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

} // namespace eecmdp
