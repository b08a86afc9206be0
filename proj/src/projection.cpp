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
#include "bedcast/projection.h"
#include "bedcast/error.h"
#include "bedcast/occupancy.h"
#include "bedcast/stats.h"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <sstream>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace bedcast
{

namespace
{

/// Day indices [first, first + days) of `year` inside the site's tracks, or nullopt if not fully covered.
std::optional<std::pair<std::size_t, int>> year_span(const SiteHistory& site, int year)
{
    const long offset = static_cast<long>((first_day_of_year(year) - site.start).count());
    const int days    = days_in_year(year);
    if (offset < 0 || offset + days > static_cast<long>(site.admit_count.size())) {
        return std::nullopt;
    }
    return std::pair{static_cast<std::size_t>(offset), days};
}

std::pair<std::size_t, int> require_year(const SiteHistory& site, int year)
{
    const auto span = year_span(site, year);
    if (!span) {
        throw Error(ErrorCode::MissingHistory,
                    "site '" + site.site_id + "' history does not cover year " + std::to_string(year));
    }
    return *span;
}

/// First 365 days of a year's track; a leap year's last day is dropped.
std::vector<double> year_track(const SiteHistory& site, const std::vector<double>& track, int year)
{
    const auto [first, days] = require_year(site, year);
    if (track.size() < first + static_cast<std::size_t>(days)) {
        throw Error(ErrorCode::MissingHistory, "site '" + site.site_id + "' track is shorter than its history");
    }
    return {track.begin() + static_cast<long>(first), track.begin() + static_cast<long>(first) + kProjectionYearDays};
}

int draw_year(const std::vector<int>& years, std::mt19937_64& rng)
{
    std::uniform_int_distribution<std::size_t> pick(0, years.size() - 1);
    return years[pick(rng)];
}

} // namespace

void validate(const ProjectionConfig& config)
{
    if (config.y_max < config.y_min) {
        throw Error(ErrorCode::InvalidArgument, "projection years must satisfy y_min <= y_max");
    }
    if (config.y_ref_omega.empty() || config.y_ref_nu.empty()) {
        throw Error(ErrorCode::InvalidArgument, "reference year sets must not be empty");
    }
    if (config.runs < 1) {
        throw Error(ErrorCode::InvalidArgument, "at least one projection run is required");
    }
    if (!(config.gamma > 0.0 && config.gamma <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1]");
    }
    for (double a : config.alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
        }
    }
}

std::optional<double> SiteHistory::annual_admissions(int year) const
{
    const auto span = year_span(*this, year);
    if (!span) {
        return std::nullopt;
    }
    double total = 0.0;
    for (int d = 0; d < span->second; ++d) {
        total += admit_count[span->first + static_cast<std::size_t>(d)];
    }
    return total;
}

std::map<int, double> project_admissions(const ProjectionConfig& config, const ProjectionHistory& history)
{
    if (history.empty()) {
        throw Error(ErrorCode::MissingHistory, "no site history");
    }
    for (int y = config.y_min; y <= config.y_max; ++y) {
        if (!config.births.contains(y)) {
            throw Error(ErrorCode::MissingBirths, "no projected births for " + std::to_string(y));
        }
    }
    if (config.y_ref_omega.empty()) {
        throw Error(ErrorCode::MissingHistory, "no baseline reference years");
    }
    double base = 0.0;
    for (int y : config.y_ref_omega) {
        for (const auto& site : history) {
            const auto a = site.annual_admissions(y);
            if (!a) {
                throw Error(ErrorCode::MissingHistory,
                            "site '" + site.site_id + "' history does not cover year " + std::to_string(y));
            }
            base += *a;
        }
    }
    base /= static_cast<double>(config.y_ref_omega.size());

    const double births0 = config.births.at(config.y_min);
    if (!(births0 > 0.0)) {
        throw Error(ErrorCode::MissingBirths, "base-year births must be positive");
    }
    std::map<int, double> projected;
    for (int y = config.y_min; y <= config.y_max; ++y) {
        projected[y] = base * std::pow(config.births.at(y) / births0, config.eta) * std::pow(config.psi, y - config.y_min);
    }
    return projected;
}

std::vector<double> site_shares(const ProjectionHistory& history, const std::vector<int>& y_ref_omega)
{
    if (history.empty() || y_ref_omega.empty()) {
        throw Error(ErrorCode::MissingHistory, "site shares need sites and reference years");
    }
    std::vector<double> shares(history.size(), 0.0);
    for (int y : y_ref_omega) {
        std::vector<double> counts;
        double total = 0.0;
        for (const auto& site : history) {
            const auto a = site.annual_admissions(y);
            if (!a) {
                throw Error(ErrorCode::MissingHistory,
                            "site '" + site.site_id + "' history does not cover year " + std::to_string(y));
            }
            counts.push_back(*a);
            total += *a;
        }
        if (!(total > 0.0)) {
            throw Error(ErrorCode::ZeroYearTotal, "no admissions in reference year " + std::to_string(y));
        }
        for (std::size_t m = 0; m < counts.size(); ++m) {
            shares[m] += counts[m] / total;
        }
    }
    for (auto& s : shares) {
        s /= static_cast<double>(y_ref_omega.size());
    }
    return shares;
}

DailyProfile year_profile(const SiteHistory& site, int year)
{
    const auto [first, days] = require_year(site, year);
    if (site.lambda_t.size() < first + static_cast<std::size_t>(days)) {
        throw Error(ErrorCode::MissingHistory, "site '" + site.site_id + "' arrival track is too short");
    }
    DailyProfile p{};
    for (int d = 0; d < days; ++d) {
        p[static_cast<std::size_t>(std::min(d, kProjectionYearDays - 1))] +=
            site.lambda_t[first + static_cast<std::size_t>(d)];
    }
    double total = 0.0;
    for (double v : p) {
        total += v;
    }
    for (auto& v : p) {
        v = total > 0.0 ? v / total : 1.0 / kProjectionYearDays;
    }
    return p;
}

ResampledProfile resample_profile(const SiteHistory& site, const std::vector<int>& y_ref_nu, std::mt19937_64& rng)
{
    if (y_ref_nu.empty()) {
        throw Error(ErrorCode::MissingHistory, "no profile reference years");
    }
    ResampledProfile out;
    out.year    = draw_year(y_ref_nu, rng);
    out.profile = year_profile(site, out.year);
    return out;
}

double reference_mean_los(const SiteHistory& site, const std::vector<int>& years)
{
    double los = 0.0, count = 0.0;
    for (int y : years) {
        const auto [first, days] = require_year(site, y);
        for (int d = 0; d < days; ++d) {
            const auto t = first + static_cast<std::size_t>(d);
            count += site.admit_count[t];
            los += t < site.los_sum.size() ? site.los_sum[t] : 0.0;
        }
    }
    if (!(count > 0.0)) {
        throw Error(ErrorCode::MissingHistory, "site '" + site.site_id + "' has no admissions in the reference years");
    }
    return los / count;
}

std::mt19937_64 projection_rng(std::uint64_t seed, std::size_t run_index, std::size_t site_index)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(run_index), static_cast<std::uint32_t>(site_index), 0x6265u};
    return std::mt19937_64(seq);
}

RunResult project_run(const ProjectionConfig& config, const ProjectionHistory& history, std::size_t run_index,
                      bool keep_series)
{
    validate(config);
    const auto system = project_admissions(config, history);
    const auto shares = site_shares(history, config.y_ref_omega);

    RunResult result;
    result.run_index = run_index;
    for (std::size_t m = 0; m < history.size(); ++m) {
        const SiteHistory& site = history[m];
        auto rng                = projection_rng(config.seed, run_index, m);
        const double mean_los   = reference_mean_los(site, config.y_ref_nu);

        ProjectedSite projected;
        projected.site_id = site.site_id;
        LosModel model;
        model.family = site.family;
        model.kappa  = site.kappa;
        model.s_max  = site.s_max;
        std::vector<double> lambda;
        for (int y = config.y_min; y <= config.y_max; ++y) {
            ProjectedYear py;
            py.year       = y;
            py.admissions = shares[m] * system.at(y);
            const auto arrivals = resample_profile(site, config.y_ref_nu, rng);
            py.arrival_ref      = arrivals.year;
            py.los_ref          = draw_year(config.y_ref_nu, rng);
            py.lambda_t.resize(kProjectionYearDays);
            for (std::size_t t = 0; t < kProjectionYearDays; ++t) {
                py.lambda_t[t] = py.admissions * arrivals.profile[t];
            }
            py.mu_t     = year_track(site, site.mu_t, py.los_ref);
            py.sigma2_t = site.family == LosFamily::Lognormal ? year_track(site, site.sigma2_t, py.los_ref)
                                                               : std::vector<double>(kProjectionYearDays, 0.0);
            lambda.insert(lambda.end(), py.lambda_t.begin(), py.lambda_t.end());
            model.mu_t.insert(model.mu_t.end(), py.mu_t.begin(), py.mu_t.end());
            model.sigma2_t.insert(model.sigma2_t.end(), py.sigma2_t.begin(), py.sigma2_t.end());
            projected.years.push_back(std::move(py));
        }

        const auto rho = expected_occupancy(lambda, model);
        for (std::size_t k = 0; k < projected.years.size(); ++k) {
            ProjectedYear& py = projected.years[k];
            OccupancySeries slice;
            const auto begin = rho.rho.begin() + static_cast<long>(k * kProjectionYearDays);
            slice.rho.assign(begin, begin + kProjectionYearDays);
            slice.rho_bar = py.admissions / kProjectionYearDays * mean_los;

            py.plan.b_average = b_average(py.admissions / kProjectionYearDays, mean_los);
            py.plan.b_max     = b_max(slice);
            for (double alpha : config.alphas) {
                py.plan.b_overflow[{config.gamma, alpha}] = b_overflow(slice, config.gamma, alpha, config.mode);
            }
            if (keep_series) {
                py.rho = std::move(slice.rho);
            }
            else {
                py.lambda_t.clear();
                py.mu_t.clear();
                py.sigma2_t.clear();
            }
        }
        result.sites.push_back(std::move(projected));
    }
    return result;
}

RunSummary summarize_runs(std::span<const double> values)
{
    if (values.empty()) {
        throw Error(ErrorCode::EmptyRuns, "no projection runs to summarise");
    }
    RunSummary s;
    s.median = median(values);
    s.q25    = quantile(values, 0.25);
    s.q75    = quantile(values, 0.75);
    s.mean   = mean(values);
    s.sd     = population_sd(values);
    return s;
}

std::map<int, double> parse_births(std::istream& stream)
{
    auto split = [](const std::string& line) {
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) {
            const auto b = field.find_first_not_of(" \t\r");
            const auto e = field.find_last_not_of(" \t\r");
            fields.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
        }
        return fields;
    };
    std::string line;
    if (!std::getline(stream, line)) {
        throw Error(ErrorCode::MissingColumn, "missing header row", 0);
    }
    const auto header = split(line);
    const auto year_it   = std::find(header.begin(), header.end(), "year");
    const auto births_it = std::find(header.begin(), header.end(), "births");
    if (year_it == header.end() || births_it == header.end()) {
        throw Error(ErrorCode::MissingColumn, "births file needs columns year and births", 0);
    }
    const auto year_col   = static_cast<std::size_t>(year_it - header.begin());
    const auto births_col = static_cast<std::size_t>(births_it - header.begin());

    std::map<int, double> births;
    std::size_t row = 0;
    while (std::getline(stream, line)) {
        const auto fields = split(line);
        if (fields.empty() || (fields.size() == 1 && fields[0].empty())) {
            continue;
        }
        ++row;
        if (fields.size() <= std::max(year_col, births_col)) {
            throw Error(ErrorCode::MissingColumn, "too few fields", row);
        }
        int year     = 0;
        double value = 0.0;
        const auto& y = fields[year_col];
        const auto& b = fields[births_col];
        auto ry       = std::from_chars(y.data(), y.data() + y.size(), year);
        auto rb       = std::from_chars(b.data(), b.data() + b.size(), value);
        if (y.empty() || ry.ec != std::errc() || ry.ptr != y.data() + y.size()) {
            throw Error(ErrorCode::BadNumber, "unparseable year '" + y + "'", row);
        }
        if (b.empty() || rb.ec != std::errc() || rb.ptr != b.data() + b.size() || !(value >= 0.0)) {
            throw Error(ErrorCode::BadNumber, "unparseable births '" + b + "'", row);
        }
        births[year] = value;
    }
    return births;
}

std::string overflow_label(double alpha)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "B_%g", alpha);
    return buf;
}

ProjectionSummary run_projection(const ProjectionConfig& config, const ProjectionHistory& history)
{
    validate(config);
    ProjectionSummary summary;
    summary.system_admissions = project_admissions(config, history);
    summary.shares            = site_shares(history, config.y_ref_omega);

    std::vector<RunResult> runs(static_cast<std::size_t>(config.runs));
    parallel_for(runs.size(), [&](std::size_t r) { runs[r] = project_run(config, history, r, false); });

    for (std::size_t m = 0; m < history.size(); ++m) {
        const auto& first = runs.front().sites[m];
        for (std::size_t k = 0; k < first.years.size(); ++k) {
            ProjectionRow row;
            row.site_id    = first.site_id;
            row.year       = first.years[k].year;
            row.admissions = first.years[k].admissions;
            row.b_average  = first.years[k].plan.b_average;

            auto collect = [&](auto&& pick) {
                std::vector<double> values;
                values.reserve(runs.size());
                for (const auto& run : runs) {
                    values.push_back(pick(run.sites[m].years[k].plan));
                }
                return summarize_runs(values);
            };
            for (double alpha : config.alphas) {
                row.strategies.emplace_back(overflow_label(alpha), collect([&](const CapacityPlan& p) {
                                                return static_cast<double>(p.b_overflow.at({config.gamma, alpha}));
                                            }));
            }
            row.strategies.emplace_back("B_max", collect([](const CapacityPlan& p) { return double(p.b_max); }));
            summary.rows.push_back(std::move(row));
        }
    }
    return summary;
}

void write_projection_csv(std::ostream& stream, const ProjectionSummary& summary)
{
    stream << "site,year,admissions,b_average";
    if (!summary.rows.empty()) {
        for (const auto& [label, s] : summary.rows.front().strategies) {
            stream << ',' << label << "_median," << label << "_q25," << label << "_q75," << label << "_mean," << label
                   << "_sd";
        }
    }
    stream << '\n';
    for (const auto& row : summary.rows) {
        stream << row.site_id << ',' << row.year << ',' << row.admissions << ',' << row.b_average;
        for (const auto& [label, s] : row.strategies) {
            stream << ',' << s.median << ',' << s.q25 << ',' << s.q75 << ',' << s.mean << ',' << s.sd;
        }
        stream << '\n';
    }
}

std::string projection_to_json(const ProjectionSummary& summary, int indent)
{
    nlohmann::json j;
    auto& admissions = j["system_admissions"];
    admissions       = nlohmann::json::object();
    for (const auto& [year, a] : summary.system_admissions) {
        admissions[std::to_string(year)] = a;
    }
    j["shares"] = summary.shares;
    auto rows   = nlohmann::json::array();
    for (const auto& row : summary.rows) {
        nlohmann::json r{{"site", row.site_id}, {"year", row.year}, {"admissions", row.admissions},
                         {"b_average", row.b_average}};
        for (const auto& [label, s] : row.strategies) {
            r[label] = {{"median", s.median}, {"q25", s.q25}, {"q75", s.q75}, {"mean", s.mean}, {"sd", s.sd}};
        }
        rows.push_back(std::move(r));
    }
    j["rows"] = rows;
    return j.dump(indent);
}

} // namespace bedcast
