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
#ifndef BEDCAST_PLANNING_H
#define BEDCAST_PLANNING_H

#include "bedcast/occupancy.h"

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace bedcast
{

/// Overflow criterion aggregation across days.
enum class OverflowMode
{
    /// Mean over days of P(L_t > floor(gamma B)) must not exceed alpha.
    Averaged,
    /// Every day's P(L_t > floor(gamma B)) must not exceed alpha.
    PerDayMax,
};

struct OverflowTarget {
    double gamma = 1.0;
    double alpha = 0.05;

    auto operator<=>(const OverflowTarget&) const = default;
};

struct CapacityPlan {
    int b_average = 0;
    int b_max     = 0;
    std::map<OverflowTarget, int> b_overflow;
};

struct UtilizationStats {
    double mean_pct          = 0.0;
    double sd_pct            = 0.0;
    double pct_days_over_100 = 0.0;
    std::optional<double> excess_mean_pct;
    std::optional<double> excess_sd_pct;
    double pct_days_under_70 = 0.0;
    std::optional<double> shortfall_mean_pct;
    std::optional<double> shortfall_sd_pct;
};

/// ceil(rho_bar + sqrt(rho_bar)) with rho_bar = lambda_bar * mean_los; throws DomainError on non-positive input.
int b_average(double lambda_bar, double mean_los);

/// ceil(peak + sqrt(peak)) over the expected occupancy; throws EmptySeries.
int b_max(const OccupancySeries& rho);

/// P(X > k) for X ~ Poisson(mean).
double poisson_tail(long k, double mean);

/// Capacity above which the overflow search gives up: 100 * (1 + max rho).
int overflow_search_cap(const OccupancySeries& rho);

/**
 * Smallest B >= 1 such that the overflow probability P(L_t > floor(gamma B)), L_t ~ Poisson(rho_t),
 * satisfies the criterion of `mode` at level alpha. The search starts at ceil(rho_bar) and walks
 * down or up; the overflow probability is non-increasing in B so the first feasible B is minimal.
 * @throws Error InvalidArgument on gamma outside (0, 1] or alpha outside (0, 1); SearchExhausted.
 */
int b_overflow(const OccupancySeries& rho, double gamma, double alpha, OverflowMode mode = OverflowMode::Averaged);

CapacityPlan make_plan(double lambda_bar, double mean_los, const OccupancySeries& rho,
                       std::span<const OverflowTarget> targets, OverflowMode mode = OverflowMode::Averaged);

/// Daily utilisation 100 * L_t / C with overload (> 100%) and underutilisation (< 70%) day statistics.
UtilizationStats utilization_stats(std::span<const int> census, int capacity);

struct WeightedAggregate {
    double mean = 0.0;
    double sd   = 0.0;
};

/// Weighted mean and weighted population sd of site means; weights are typically admission volumes.
WeightedAggregate weighted_aggregate(std::span<const std::pair<double, double>> mean_and_weight);

/// The rejected peak heuristic: ceil(max_t admissions_t * mean_los). Kept for comparison only.
int peak_admissions_heuristic(std::span<const int> daily_admissions, double mean_los);

/// Single-object JSON of a plan.
std::string plan_to_json(const CapacityPlan& plan, int indent = 2);

struct PlanTableRow {
    std::string site;
    std::optional<int> actual_beds;
    int b_average = 0;
    std::optional<int> b_005;
    std::optional<int> b_001;
    int b_max = 0;
};

PlanTableRow plan_table_row(const std::string& site, std::optional<int> actual_beds, const CapacityPlan& plan,
                            double gamma = 1.0);

/// Columns: site, actual, b_average, b_005, b_001, b_max.
void write_plan_table_csv(std::ostream& stream, std::span<const PlanTableRow> rows);

/// Daily utilisation per plan with the 85% and 100% reference levels as columns.
void write_utilization_csv(std::ostream& stream, const std::vector<std::string>& dates, std::span<const int> census,
                           const std::vector<std::pair<std::string, int>>& capacities);

} // namespace bedcast

#endif // BEDCAST_PLANNING_H
