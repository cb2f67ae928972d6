#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

#include "tidelink/errors.hpp"

namespace tidelink::timeutil {

/// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's algorithm).
inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);            // [0, 399]
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;  // [0, 365]
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;           // [0, 146096]
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yy + (m <= 2));
}

/// Parses "YYYY-MM-DDThh:mm:ss" with optional trailing 'Z' into seconds since
/// the Unix epoch (UTC, no leap seconds). Throws ParseError on malformed input.
inline std::int64_t parse_utc(const std::string& s) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, se = 0;
    char sep = 0, z = 0;
    const int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%c",
                              &y, &mo, &d, &sep, &h, &mi, &se, &z);
    if (n < 7 || (sep != 'T' && sep != 't') || (n == 8 && z != 'Z'))
        throw ParseError("bad UTC timestamp: " + s);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || se > 60)
        throw ParseError("UTC timestamp field out of range: " + s);
    return days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400
         + h * 3600 + mi * 60 + se;
}

/// Formats whole seconds since the Unix epoch as "YYYY-MM-DDThh:mm:ssZ".
inline std::string format_utc(std::int64_t t) {
    std::int64_t days = t / 86400;
    std::int64_t sod = t % 86400;
    if (sod < 0) { sod += 86400; --days; }
    int y; unsigned m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                  y, m, d,
                  static_cast<long long>(sod / 3600),
                  static_cast<long long>(sod / 60 % 60),
                  static_cast<long long>(sod % 60));
    return buf;
}

} // namespace tidelink::timeutil
