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
#include "bedcast/planning.h"
#include "bedcast/error.h"
#include "bedcast/stats.h"

#include <boost/math/special_functions/gamma.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace bedcast
{

namespace
{

// Guards ceil/floor against representation noise such as 25.000000000000004.
constexpr double kRoundingSlack = 1e-9;

int ceil_beds(double x)
{
    return std::max(1, static_cast<int>(std::ceil(x - kRoundingSlack)));
}

long overflow_threshold(double gamma, int beds)
{
    return static_cast<long>(std::floor(gamma * beds + kRoundingSlack));
}

double overflow_probability(const OccupancySeries& rho, long k, OverflowMode mode)
{
    double agg = 0.0;
    for (double r : rho.rho) {
        const double p = poisson_tail(k, r);
        agg            = mode == OverflowMode::Averaged ? agg + p : std::max(agg, p);
    }
    return mode == OverflowMode::Averaged ? agg / static_cast<double>(rho.rho.size()) : agg;
}

} // namespace

int b_average(double lambda_bar, double mean_los)
{
    if (!(lambda_bar > 0.0) || !(mean_los > 0.0)) {
        throw Error(ErrorCode::DomainError, "arrival rate and mean LOS must be positive");
    }
    const double rho_bar = lambda_bar * mean_los;
    return ceil_beds(rho_bar + std::sqrt(rho_bar));
}

int b_max(const OccupancySeries& rho)
{
    const double peak = rho.peak();
    return ceil_beds(peak + std::sqrt(std::max(peak, 0.0)));
}

double poisson_tail(long k, double mean)
{
    if (mean < 0.0 || k < 0) {
        throw Error(ErrorCode::DomainError, "Poisson tail needs k >= 0 and mean >= 0");
    }
    if (mean == 0.0) {
        return 0.0;
    }
    // P(X > k) = P(X >= k + 1) is the lower regularised incomplete gamma P(k + 1, mean).
    return boost::math::gamma_p(static_cast<double>(k) + 1.0, mean);
}

int overflow_search_cap(const OccupancySeries& rho)
{
    return static_cast<int>(std::ceil(100.0 * (1.0 + rho.peak())));
}

int b_overflow(const OccupancySeries& rho, double gamma, double alpha, OverflowMode mode)
{
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "gamma must lie in (0, 1]");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
    }
    const int cap = overflow_search_cap(rho);
    auto feasible = [&](int beds) { return overflow_probability(rho, overflow_threshold(gamma, beds), mode) <= alpha; };

    int beds = std::clamp(static_cast<int>(std::ceil(rho.rho_bar)), 1, cap);
    if (feasible(beds)) {
        while (beds > 1 && feasible(beds - 1)) {
            --beds;
        }
        return beds;
    }
    while (++beds <= cap) {
        if (feasible(beds)) {
            return beds;
        }
    }
    throw Error(ErrorCode::SearchExhausted, "no bed count up to " + std::to_string(cap) + " meets alpha");
}

CapacityPlan make_plan(double lambda_bar, double mean_los, const OccupancySeries& rho,
                       std::span<const OverflowTarget> targets, OverflowMode mode)
{
    CapacityPlan plan;
    plan.b_average = b_average(lambda_bar, mean_los);
    plan.b_max     = b_max(rho);
    for (const auto& t : targets) {
        plan.b_overflow[t] = b_overflow(rho, t.gamma, t.alpha, mode);
    }
    return plan;
}

UtilizationStats utilization_stats(std::span<const int> census, int capacity)
{
    if (capacity < 1) {
        throw Error(ErrorCode::InvalidArgument, "capacity must be at least one bed");
    }
    UtilizationStats s;
    if (census.empty()) {
        return s;
    }
    std::vector<double> u, excess, shortfall;
    u.reserve(census.size());
    for (int c : census) {
        const double pct = 100.0 * c / capacity;
        u.push_back(pct);
        if (pct > 100.0) {
            excess.push_back(pct - 100.0);
        }
        if (pct < 70.0) {
            shortfall.push_back(70.0 - pct);
        }
    }
    const double n      = static_cast<double>(u.size());
    s.mean_pct          = mean(u);
    s.sd_pct            = population_sd(u);
    s.pct_days_over_100 = 100.0 * static_cast<double>(excess.size()) / n;
    s.pct_days_under_70 = 100.0 * static_cast<double>(shortfall.size()) / n;
    if (!excess.empty()) {
        s.excess_mean_pct = mean(excess);
        s.excess_sd_pct   = population_sd(excess);
    }
    if (!shortfall.empty()) {
        s.shortfall_mean_pct = mean(shortfall);
        s.shortfall_sd_pct   = population_sd(shortfall);
    }
    return s;
}

WeightedAggregate weighted_aggregate(std::span<const std::pair<double, double>> mean_and_weight)
{
    if (mean_and_weight.empty()) {
        throw Error(ErrorCode::EmptyInput, "no site statistics to aggregate");
    }
    double total = 0.0, weighted = 0.0;
    for (const auto& [m, w] : mean_and_weight) {
        if (!(w > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "weights must be positive");
        }
        total += w;
        weighted += w * m;
    }
    WeightedAggregate out;
    out.mean  = weighted / total;
    double ss = 0.0;
    for (const auto& [m, w] : mean_and_weight) {
        ss += w * (m - out.mean) * (m - out.mean);
    }
    out.sd = std::sqrt(ss / total);
    return out;
}

int peak_admissions_heuristic(std::span<const int> daily_admissions, double mean_los)
{
    if (daily_admissions.empty()) {
        throw Error(ErrorCode::EmptySeries, "no daily admissions");
    }
    const int peak = *std::max_element(daily_admissions.begin(), daily_admissions.end());
    return static_cast<int>(std::ceil(peak * mean_los - kRoundingSlack));
}

std::string plan_to_json(const CapacityPlan& plan, int indent)
{
    nlohmann::json j;
    j["b_average"] = plan.b_average;
    j["b_max"]     = plan.b_max;
    auto overflow  = nlohmann::json::array();
    for (const auto& [target, beds] : plan.b_overflow) {
        overflow.push_back({{"gamma", target.gamma}, {"alpha", target.alpha}, {"beds", beds}});
    }
    j["b_overflow"] = overflow;
    return j.dump(indent);
}

PlanTableRow plan_table_row(const std::string& site, std::optional<int> actual_beds, const CapacityPlan& plan,
                            double gamma)
{
    PlanTableRow row;
    row.site        = site;
    row.actual_beds = actual_beds;
    row.b_average   = plan.b_average;
    row.b_max       = plan.b_max;
    if (auto it = plan.b_overflow.find({gamma, 0.05}); it != plan.b_overflow.end()) {
        row.b_005 = it->second;
    }
    if (auto it = plan.b_overflow.find({gamma, 0.01}); it != plan.b_overflow.end()) {
        row.b_001 = it->second;
    }
    return row;
}

void write_plan_table_csv(std::ostream& stream, std::span<const PlanTableRow> rows)
{
    auto opt = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    stream << "site,actual,b_average,b_005,b_001,b_max\n";
    for (const auto& r : rows) {
        stream << r.site << ',' << opt(r.actual_beds) << ',' << r.b_average << ',' << opt(r.b_005) << ','
               << opt(r.b_001) << ',' << r.b_max << '\n';
    }
}

void write_utilization_csv(std::ostream& stream, const std::vector<std::string>& dates, std::span<const int> census,
                           const std::vector<std::pair<std::string, int>>& capacities)
{
    stream << "date,census";
    for (const auto& [name, beds] : capacities) {
        stream << ",util_" << name;
    }
    stream << ",ref_85,ref_100\n";
    for (std::size_t t = 0; t < census.size(); ++t) {
        stream << (t < dates.size() ? dates[t] : std::to_string(t)) << ',' << census[t];
        for (const auto& [name, beds] : capacities) {
            stream << ',' << 100.0 * census[t] / beds;
        }
        stream << ",85,100\n";
    }
}

} // namespace bedcast
