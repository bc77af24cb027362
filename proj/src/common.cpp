#include "netleak/common.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace netleak {

std::optional<Date> Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
    auto digits = [](std::string_view s) {
        for (char c : s)
            if (c < '0' || c > '9') return false;
        return true;
    };
    if (!digits(iso.substr(0, 4)) || !digits(iso.substr(5, 2)) || !digits(iso.substr(8, 2)))
        return std::nullopt;
    int y = 0, m = 0, d = 0;
    std::from_chars(iso.data(), iso.data() + 4, y);
    std::from_chars(iso.data() + 5, iso.data() + 7, m);
    std::from_chars(iso.data() + 8, iso.data() + 10, d);
    Date date(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
    if (!date.ok()) return std::nullopt;
    return date;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date Date::minus_months(int months) const {
    auto shifted = ymd - std::chrono::months{months};
    if (!shifted.ok())
        shifted = shifted.year() / shifted.month() / std::chrono::last;
    return Date(std::chrono::year_month_day{shifted});
}

int months_in_window(const Date& start, const Date& end) {
    if (end < start) return 0;
    int ys = static_cast<int>(start.ymd.year());
    int ye = static_cast<int>(end.ymd.year());
    int ms = static_cast<int>(static_cast<unsigned>(start.ymd.month()));
    int me = static_cast<int>(static_cast<unsigned>(end.ymd.month()));
    return (ye - ys) * 12 + (me - ms) + 1;
}

std::optional<std::int64_t> parse_money_cents(std::string_view text) {
    std::string_view s = text;
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) return std::nullopt;
    std::int64_t units = 0, cents = 0;
    std::size_t dot = s.find('.');
    std::string_view whole = dot == std::string_view::npos ? s : s.substr(0, dot);
    std::string_view frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
    if (whole.empty() && frac.empty()) return std::nullopt;
    for (char c : whole) {
        if (c < '0' || c > '9') return std::nullopt;
        units = units * 10 + (c - '0');
    }
    if (dot != std::string_view::npos) {
        if (frac.empty() || frac.size() > 2) return std::nullopt;
        for (char c : frac) {
            if (c < '0' || c > '9') return std::nullopt;
        }
        cents = (frac[0] - '0') * 10;
        if (frac.size() == 2) cents += frac[1] - '0';
    }
    std::int64_t total = units * 100 + cents;
    return negative ? -total : total;
}

std::string format_cents(std::int64_t cents) {
    bool negative = cents < 0;
    std::uint64_t mag = negative ? static_cast<std::uint64_t>(-cents) : static_cast<std::uint64_t>(cents);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%llu.%02llu", negative ? "-" : "",
                  static_cast<unsigned long long>(mag / 100),
                  static_cast<unsigned long long>(mag % 100));
    return buf;
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim_copy(std::string_view s) {
    auto is_space = [](char c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
    };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return std::string(s);
}

SpecialtyLabel normalize_specialty(std::string_view raw) {
    std::string trimmed = trim_copy(raw);
    std::string display;
    display.reserve(trimmed.size());
    bool in_space = false;
    for (char c : trimmed) {
        bool space = c == ' ' || c == '\t';
        if (space) {
            in_space = true;
            continue;
        }
        if (in_space && !display.empty()) display.push_back(' ');
        in_space = false;
        display.push_back(c);
    }
    return SpecialtyLabel{display, to_lower_ascii(display)};
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string format_double(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    // snprintf may emit "-0.000000"; canonicalize for stable diffs
    bool all_zero = true;
    for (const char* p = buf; *p; ++p)
        if (*p >= '1' && *p <= '9') { all_zero = false; break; }
    if (all_zero && buf[0] == '-') return buf + 1;
    return buf;
}

}  // namespace netleak
