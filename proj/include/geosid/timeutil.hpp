#pragma once

#include <cstdint>
#include <string>

namespace geosid {

struct CivilDateTime {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31
    int hour = 0;
    int minute = 0;
    int second = 0;
    int weekday = 4;  // 0=Sunday .. 6=Saturday
};

// Proleptic Gregorian calendar, no leap seconds, no time zones. Callers pass
// local timestamps when they want local dates.
std::int64_t days_from_civil(int year, int month, int day);
CivilDateTime civil_from_timestamp(std::int64_t seconds);
std::int64_t timestamp_from_civil(int year, int month, int day, int hour,
                                  int minute, int second);

// "April 11th, 2012, Wednesday, 04:59" — the prompt serialization format.
std::string format_prompt_datetime(std::int64_t local_seconds);

// "2012-04-11T04:59:03"
std::string format_iso(std::int64_t seconds);
std::int64_t parse_iso(const std::string& text);  // accepts trailing 'Z'

std::string english_ordinal(int day);

}  // namespace geosid
