/*
* Copyright (C) 2026 bedcast contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef BEDCAST_DATES_H
#define BEDCAST_DATES_H

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace bedcast
{

using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD).
std::optional<Date> parse_date(std::string_view text);

std::string format_date(Date date);

int year_of(Date date);

/// Zero-based day within the calendar year (0 = January 1st).
int day_of_year(Date date);

Date first_day_of_year(int year);

int days_in_year(int year);

/// Inclusive calendar window [first, last].
struct DateWindow {
    Date first;
    Date last;

    int num_days() const
    {
        return static_cast<int>((last - first).count()) + 1;
    }

    bool contains(Date d) const
    {
        return d >= first && d <= last;
    }
};

} // namespace bedcast

#endif // BEDCAST_DATES_H
