#include "stormfx/dates.hpp"

#include "stormfx/error.hpp"

#include <charconv>
#include <cstdio>

namespace stormfx {

namespace {

unsigned parse_part(std::string_view text, std::string_view whole) {
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        fail(ErrorKind::InvalidInput, "not an ISO-8601 date: '" + std::string(whole) + "'");
    }
    return value;
}

} // namespace

Date Date::parse(std::string_view iso) {
    if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
        fail(ErrorKind::InvalidInput, "not an ISO-8601 date: '" + std::string(iso) + "'");
    }
    const auto y = static_cast<int>(parse_part(iso.substr(0, 4), iso));
    const auto m = parse_part(iso.substr(5, 2), iso);
    const auto d = parse_part(iso.substr(8, 2), iso);
    return from_ymd(y, m, d);
}

Date Date::from_ymd(int year, unsigned month, unsigned day) {
    using namespace std::chrono;
    const year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                             std::chrono::day{day}};
    if (!ymd.ok()) {
        fail(ErrorKind::InvalidInput, "invalid calendar date " + std::to_string(year) + "-" +
                                          std::to_string(month) + "-" + std::to_string(day));
    }
    return Date{static_cast<int>(sys_days{ymd}.time_since_epoch().count())};
}

std::string Date::to_string() const {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

int Date::year() const {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    return static_cast<int>(ymd.year());
}

} // namespace stormfx
