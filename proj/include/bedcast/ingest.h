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
#ifndef BEDCAST_INGEST_H
#define BEDCAST_INGEST_H

#include "bedcast/dates.h"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bedcast
{

/// One patient stay. LOS is measured in (possibly fractional) days.
struct AdmissionRecord {
    std::string site_id;
    Date admit_date;
    double los_days = 0.0;

    bool operator==(const AdmissionRecord&) const = default;
};

/// Header names of the three required CSV columns.
struct ColumnSchema {
    std::string site_id    = "site_id";
    std::string admit_date = "admit_date";
    std::string los_days   = "los_days";
};

/**
 * Per-site, calendar-indexed daily series.
 * Index t corresponds to the date start + t days.
 */
struct DailySiteSeries {
    std::string site_id;
    Date start;
    std::vector<int> admit_count;
    /// Daily mean LOS among that day's admissions, nullopt on days without admissions.
    std::vector<std::optional<double>> mean_los;
    std::vector<int> census;

    std::size_t size() const
    {
        return admit_count.size();
    }

    Date date_at(std::size_t t) const
    {
        return start + std::chrono::days{static_cast<int>(t)};
    }
};

/// Daily mean LOS after gap filling; imputed[t] marks values that were interpolated or extended.
struct FilledLos {
    std::vector<double> values;
    std::vector<bool> imputed;
};

/**
 * Reads admission records from a CSV stream with a header row.
 * Blank lines are skipped. Row numbers in errors count data rows from 1.
 * @throws Error with MissingColumn, BadDate, BadNumber or NegativeLos.
 */
std::vector<AdmissionRecord> parse_admissions(std::istream& stream, const ColumnSchema& schema = {});

void write_admissions(std::ostream& stream, const std::vector<AdmissionRecord>& records,
                      const ColumnSchema& schema = {});

/// Sorted, de-duplicated site identifiers.
std::vector<std::string> site_ids(const std::vector<AdmissionRecord>& records);

/// Smallest window containing every admission date of the site.
DateWindow site_window(const std::vector<AdmissionRecord>& records, const std::string& site_id);

/// LOS values of the site's admissions inside the window, in input order.
std::vector<double> los_samples(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                                const DateWindow& window);

/**
 * Aggregates one site's admissions into daily counts and daily mean LOS and reconstructs the census.
 * Records admitted outside the window are not counted but may still contribute census inside it.
 */
DailySiteSeries build_daily_series(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                                   const DateWindow& window);

/// Linear interpolation of interior gaps, nearest-value extension at the edges.
FilledLos fill_gaps(const std::vector<std::optional<double>>& mean_los);

/**
 * Daily census: a stay admitted on day d with LOS s occupies days d .. d + ceil(s) - 1.
 * A zero-length stay occupies no day.
 */
std::vector<int> reconstruct_census(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                                    const DateWindow& window);

void write_daily_series_csv(std::ostream& stream, const DailySiteSeries& series, const FilledLos& filled);

} // namespace bedcast

#endif // BEDCAST_INGEST_H
