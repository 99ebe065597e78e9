#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace stormfx {

/// Calendar day, stored as days since 1970-01-01.
struct Date {
    int days = 0;

    static Date parse(std::string_view iso);
    static Date from_ymd(int year, unsigned month, unsigned day);

    std::string to_string() const;
    int year() const;

    Date operator+(int offset) const { return Date{days + offset}; }
    Date operator-(int offset) const { return Date{days - offset}; }
    int operator-(Date other) const { return days - other.days; }
    auto operator<=>(const Date&) const = default;
};

} // namespace stormfx
