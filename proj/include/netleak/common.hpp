#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace netleak {

/// Calendar date backed by std::chrono; all claim dates are day-resolution.
struct Date {
    std::chrono::year_month_day ymd{};

    Date() = default;
    Date(int y, unsigned m, unsigned d)
        : ymd(std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}) {}
    explicit Date(std::chrono::year_month_day v) : ymd(v) {}

    bool ok() const { return ymd.ok(); }
    std::chrono::sys_days days() const { return std::chrono::sys_days{ymd}; }

    /// Parse strict ISO 8601 (YYYY-MM-DD). Rejects invalid calendar dates.
    static std::optional<Date> parse(std::string_view iso);

    std::string to_string() const;

    /// Calendar-shift backwards by whole months, clamping to the last valid
    /// day of the target month (e.g. Mar 31 minus 1 month -> Feb 28/29).
    Date minus_months(int months) const;

    friend bool operator==(const Date& a, const Date& b) { return a.ymd == b.ymd; }
    friend auto operator<=>(const Date& a, const Date& b) {
        return std::chrono::sys_days{a.ymd} <=> std::chrono::sys_days{b.ymd};
    }
};

/// Whole months spanned by [start, end], counting any started month.
int months_in_window(const Date& start, const Date& end);

/// Currency is held as integer cents so spend sums are exact.
/// Accepts an optional sign and at most two decimals.
std::optional<std::int64_t> parse_money_cents(std::string_view text);
std::string format_cents(std::int64_t cents);

struct SpecialtyLabel {
    std::string display;  // trimmed, internal whitespace collapsed
    std::string key;      // display case-folded; used for all matching
};

/// Trim, collapse internal whitespace, case-fold for the matching key.
SpecialtyLabel normalize_specialty(std::string_view raw);

std::string to_lower_ascii(std::string_view s);
std::string trim_copy(std::string_view s);

/// FNV-1a, used for stable config hashes in run metadata.
std::uint64_t fnv1a64(std::string_view data);

/// Fixed-point decimal formatting with '.' as separator, no locale.
std::string format_double(double v, int decimals);

}  // namespace netleak
