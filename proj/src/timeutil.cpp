#include "geosid/timeutil.hpp"

#include <array>
#include <cstdio>

#include "geosid/types.hpp"

namespace geosid {

namespace {

constexpr std::array<const char*, 12> kMonthNames = {
    "January", "February", "March",     "April",   "May",      "June",
    "July",    "August",   "September", "October", "November", "December"};

constexpr std::array<const char*, 7> kWeekdayNames = {
    "Sunday", "Monday", "Tuesday", "Wednesday", "Thursday", "Friday",
    "Saturday"};

}  // namespace

// Howard Hinnant's days-from-civil algorithm (public domain).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy =
        (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
        static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDateTime civil_from_timestamp(std::int64_t seconds) {
    std::int64_t days = seconds / 86400;
    std::int64_t rem = seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        --days;
    }
    const std::int64_t z = days + 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp + (mp < 10 ? 3 : -9);

    CivilDateTime out;
    out.year = static_cast<int>(y + (m <= 2));
    out.month = static_cast<int>(m);
    out.day = static_cast<int>(d);
    out.hour = static_cast<int>(rem / 3600);
    out.minute = static_cast<int>((rem / 60) % 60);
    out.second = static_cast<int>(rem % 60);
    out.weekday = static_cast<int>(((days % 7) + 7 + 4) % 7);
    return out;
}

std::int64_t timestamp_from_civil(int year, int month, int day, int hour,
                                  int minute, int second) {
    return days_from_civil(year, month, day) * 86400 + hour * 3600 +
           minute * 60 + second;
}

std::string english_ordinal(int day) {
    const int tens = day % 100;
    const char* suffix = "th";
    if (tens < 11 || tens > 13) {
        switch (day % 10) {
            case 1: suffix = "st"; break;
            case 2: suffix = "nd"; break;
            case 3: suffix = "rd"; break;
        }
    }
    return std::to_string(day) + suffix;
}

std::string format_prompt_datetime(std::int64_t local_seconds) {
    const CivilDateTime c = civil_from_timestamp(local_seconds);
    char hm[8];
    std::snprintf(hm, sizeof(hm), "%02d:%02d", c.hour, c.minute);
    return std::string(kMonthNames[static_cast<std::size_t>(c.month - 1)]) +
           " " + english_ordinal(c.day) + ", " + std::to_string(c.year) + ", " +
           kWeekdayNames[static_cast<std::size_t>(c.weekday)] + ", " + hm;
}

std::string format_iso(std::int64_t seconds) {
    const CivilDateTime c = civil_from_timestamp(seconds);
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", c.year,
                  c.month, c.day, c.hour, c.minute, c.second);
    return buf;
}

std::int64_t parse_iso(const std::string& text) {
    int y, mo, d, h, mi, s;
    if (std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &y, &mo, &d, &h, &mi,
                    &s) != 6) {
        throw ValidationError("unparseable ISO timestamp: '" + text + "'");
    }
    return timestamp_from_civil(y, mo, d, h, mi, s);
}

}  // namespace geosid
