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
#include "bedcast/ingest.h"
#include "bedcast/error.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

namespace bedcast
{

namespace
{

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> fields;
    std::size_t begin = 0;
    while (true) {
        const auto comma = line.find(',', begin);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(begin)));
            break;
        }
        fields.push_back(trim(line.substr(begin, comma - begin)));
        begin = comma + 1;
    }
    return fields;
}

std::size_t column_index(const std::vector<std::string_view>& header, const std::string& name)
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header", 0);
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::size_t index_of(const DateWindow& window, Date d)
{
    return static_cast<std::size_t>((d - window.first).count());
}

} // namespace

std::vector<AdmissionRecord> parse_admissions(std::istream& stream, const ColumnSchema& schema)
{
    std::string line;
    if (!std::getline(stream, line)) {
        throw Error(ErrorCode::MissingColumn, "missing header row", 0);
    }
    const std::string header_line = line;
    const auto header             = split_fields(header_line);
    const auto site_col           = column_index(header, schema.site_id);
    const auto date_col           = column_index(header, schema.admit_date);
    const auto los_col            = column_index(header, schema.los_days);
    const auto needed             = std::max({site_col, date_col, los_col}) + 1;

    std::vector<AdmissionRecord> records;
    std::size_t row = 0;
    while (std::getline(stream, line)) {
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto fields = split_fields(line);
        if (fields.size() < needed) {
            throw Error(ErrorCode::MissingColumn, "expected at least " + std::to_string(needed) + " fields", row);
        }
        const auto date = parse_date(fields[date_col]);
        if (!date) {
            throw Error(ErrorCode::BadDate, "unparseable date '" + std::string(fields[date_col]) + "'", row);
        }
        double los        = 0.0;
        const auto los_sv = fields[los_col];
        auto [ptr, ec]    = std::from_chars(los_sv.data(), los_sv.data() + los_sv.size(), los);
        if (los_sv.empty() || ec != std::errc() || ptr != los_sv.data() + los_sv.size() || !std::isfinite(los)) {
            throw Error(ErrorCode::BadNumber, "unparseable LOS '" + std::string(los_sv) + "'", row);
        }
        if (los < 0.0) {
            throw Error(ErrorCode::NegativeLos, "LOS " + std::string(los_sv) + " is negative", row);
        }
        records.push_back({std::string(fields[site_col]), *date, los});
    }
    return records;
}

void write_admissions(std::ostream& stream, const std::vector<AdmissionRecord>& records, const ColumnSchema& schema)
{
    stream << schema.site_id << ',' << schema.admit_date << ',' << schema.los_days << '\n';
    char buf[64];
    for (const auto& r : records) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), r.los_days);
        stream << r.site_id << ',' << format_date(r.admit_date) << ',' << std::string_view(buf, ptr - buf) << '\n';
    }
}

std::vector<std::string> site_ids(const std::vector<AdmissionRecord>& records)
{
    std::set<std::string> ids;
    for (const auto& r : records) {
        ids.insert(r.site_id);
    }
    return {ids.begin(), ids.end()};
}

DateWindow site_window(const std::vector<AdmissionRecord>& records, const std::string& site_id)
{
    std::optional<DateWindow> window;
    for (const auto& r : records) {
        if (r.site_id != site_id) {
            continue;
        }
        if (!window) {
            window = DateWindow{r.admit_date, r.admit_date};
        }
        else {
            window->first = std::min(window->first, r.admit_date);
            window->last  = std::max(window->last, r.admit_date);
        }
    }
    if (!window) {
        throw Error(ErrorCode::EmptyWindow, "no admissions for site '" + site_id + "'");
    }
    return *window;
}

std::vector<double> los_samples(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                                const DateWindow& window)
{
    std::vector<double> samples;
    for (const auto& r : records) {
        if (r.site_id == site_id && window.contains(r.admit_date)) {
            samples.push_back(r.los_days);
        }
    }
    return samples;
}

DailySiteSeries build_daily_series(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                                   const DateWindow& window)
{
    if (window.last < window.first) {
        throw Error(ErrorCode::EmptyWindow, "window ends before it starts");
    }
    const auto n = static_cast<std::size_t>(window.num_days());
    DailySiteSeries series;
    series.site_id = site_id;
    series.start   = window.first;
    series.admit_count.assign(n, 0);
    series.mean_los.assign(n, std::nullopt);

    std::vector<double> los_sum(n, 0.0);
    for (const auto& r : records) {
        if (r.site_id != site_id || !window.contains(r.admit_date)) {
            continue;
        }
        const auto t = index_of(window, r.admit_date);
        series.admit_count[t] += 1;
        los_sum[t] += r.los_days;
    }
    for (std::size_t t = 0; t < n; ++t) {
        if (series.admit_count[t] > 0) {
            series.mean_los[t] = los_sum[t] / series.admit_count[t];
        }
    }
    series.census = reconstruct_census(records, site_id, window);
    return series;
}

FilledLos fill_gaps(const std::vector<std::optional<double>>& mean_los)
{
    const auto n = mean_los.size();
    std::vector<std::size_t> observed;
    for (std::size_t t = 0; t < n; ++t) {
        if (mean_los[t]) {
            observed.push_back(t);
        }
    }
    if (observed.empty()) {
        throw Error(ErrorCode::AllGaps, "series has no observed value");
    }

    FilledLos out;
    out.values.resize(n);
    out.imputed.assign(n, false);
    for (std::size_t t = 0; t < observed.front(); ++t) {
        out.values[t]  = *mean_los[observed.front()];
        out.imputed[t] = true;
    }
    for (std::size_t k = 0; k < observed.size(); ++k) {
        const auto a = observed[k];
        out.values[a] = *mean_los[a];
        if (k + 1 == observed.size()) {
            break;
        }
        const auto b = observed[k + 1];
        const double va = *mean_los[a];
        const double vb = *mean_los[b];
        for (auto t = a + 1; t < b; ++t) {
            const double w = static_cast<double>(t - a) / static_cast<double>(b - a);
            out.values[t]  = va + w * (vb - va);
            out.imputed[t] = true;
        }
    }
    for (auto t = observed.back() + 1; t < n; ++t) {
        out.values[t]  = *mean_los[observed.back()];
        out.imputed[t] = true;
    }
    return out;
}

std::vector<int> reconstruct_census(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                                    const DateWindow& window)
{
    const auto n = static_cast<long>(window.num_days());
    std::vector<int> census(static_cast<std::size_t>(std::max(0L, n)), 0);
    for (const auto& r : records) {
        if (r.site_id != site_id) {
            continue;
        }
        const long first = static_cast<long>((r.admit_date - window.first).count());
        const long stay  = static_cast<long>(std::ceil(r.los_days));
        const long lo    = std::max(0L, first);
        const long hi    = std::min(n - 1, first + stay - 1);
        for (long t = lo; t <= hi; ++t) {
            census[static_cast<std::size_t>(t)] += 1;
        }
    }
    return census;
}

void write_daily_series_csv(std::ostream& stream, const DailySiteSeries& series, const FilledLos& filled)
{
    stream << "date,admit_count,mean_los,mean_los_imputed,census\n";
    for (std::size_t t = 0; t < series.size(); ++t) {
        stream << format_date(series.date_at(t)) << ',' << series.admit_count[t] << ',';
        if (t < filled.values.size()) {
            stream << filled.values[t] << ',' << (filled.imputed[t] ? 1 : 0);
        }
        else {
            stream << ',';
        }
        stream << ',' << series.census[t] << '\n';
    }
}

} // namespace bedcast
