#pragma once

#include <cstdio>
#include <string>

namespace ym2 {

/// Round-trip decimal representation ('.' separator regardless of locale).
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    for (char& c : s)
        if (c == ',') c = '.';
    return s;
}

}  // namespace ym2
