#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace turnover {

/// Shortest decimal representation that round-trips the double exactly.
/// Used for every CSV cell so outputs are byte-deterministic and panels
/// survive a save/load cycle unchanged.
inline std::string format_double(double x) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    if (ec != std::errc{}) throw std::runtime_error("format_double: conversion failed");
    return std::string(buf.data(), ptr);
}

inline double parse_double(std::string_view s, const std::string& where) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(where + ": cannot parse number '" + std::string(s) + "'");
    return out;
}

inline long parse_long(std::string_view s, const std::string& where) {
    long out = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::runtime_error(where + ": cannot parse integer '" + std::string(s) + "'");
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return fields;
}

// ---- calendar dates -------------------------------------------------------

/// ISO-8601 "YYYY-MM-DD" validation; throws naming the offending text.
inline void check_iso_date(std::string_view s, const std::string& where) {
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    bool ok = s.size() == 10 && s[4] == '-' && s[7] == '-';
    if (ok)
        for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
            ok = ok && digit(s[i]);
    if (!ok) throw std::runtime_error(where + ": bad ISO date '" + std::string(s) + "'");
    int month = (s[5] - '0') * 10 + (s[6] - '0');
    int day = (s[8] - '0') * 10 + (s[9] - '0');
    if (month < 1 || month > 12 || day < 1 || day > 31)
        throw std::runtime_error(where + ": bad ISO date '" + std::string(s) + "'");
}

/// Days since 1970-01-01 for a civil date (proleptic Gregorian).
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

inline std::int64_t iso_to_days(std::string_view s) {
    check_iso_date(s, "iso_to_days");
    int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    int m = (s[5] - '0') * 10 + (s[6] - '0');
    int d = (s[8] - '0') * 10 + (s[9] - '0');
    return days_from_civil(y, m, d);
}

inline std::string days_to_iso(std::int64_t z) {
    int y, m, d;
    civil_from_days(z, y, m, d);
    char buf[11];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return std::string(buf);
}

/// Next weekday strictly after the given day number (skips Sat/Sun).
inline std::int64_t next_weekday(std::int64_t z) {
    ++z;
    // 1970-01-01 was a Thursday; weekday = (z + 4) mod 7, 0 = Sunday.
    while (true) {
        int wd = static_cast<int>(((z + 4) % 7 + 7) % 7);
        if (wd != 0 && wd != 6) return z;
        ++z;
    }
}

}  // namespace turnover
