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
#ifndef BEDCAST_SCENARIO_H
#define BEDCAST_SCENARIO_H

#include "bedcast/losfit.h"
#include "bedcast/occupancy.h"
#include "bedcast/planning.h"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bedcast
{

/// Inclusive range of day indices.
struct DayRange {
    std::size_t first = 0;
    std::size_t last  = 0;

    bool contains(std::size_t t) const
    {
        return t >= first && t <= last;
    }
};

struct ScenarioSpec {
    double beta_lambda = 1.0;
    double beta_mu     = 1.0;
    double beta_sigma2 = 1.0;
    std::optional<DayRange> date_range;
};

/// Site inputs the occupancy model consumes.
struct ModelInputs {
    std::vector<double> lambda_t;
    LosModel model;
};

/**
 * Scales lambda_t, mu_t and sigma2_t by the scenario multipliers inside the date range.
 * Variance scaling is only defined for Lognormal models; beta_sigma2 = 0 yields deterministic stays.
 * When beta_mu exceeds one, s_max grows by the same factor so the lag window still spans the tail.
 * @throws Error FamilyMismatch, InvalidArgument on non-finite or negative multipliers.
 */
ModelInputs apply_scenario(const ModelInputs& inputs, const ScenarioSpec& spec);

enum class Strategy
{
    Average,
    Overflow05,
    Overflow01,
    Max,
};

std::string_view to_string(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view name);

/// Beds for one strategy. Average uses the long-run means of the inputs.
int strategy_beds(Strategy strategy, const ModelInputs& inputs, const OccupancySeries& rho, double gamma = 1.0,
                  OverflowMode mode = OverflowMode::Averaged);

struct SensitivityCell {
    double beta = 1.0;
    Strategy strategy = Strategy::Overflow05;
    int beds          = 0;
    int baseline_beds = 0;
    double pct_change = 0.0;
};

inline constexpr std::array<double, 7> kVarianceMultipliers = {0.0, 0.2, 0.5, 0.8, 1.2, 1.5, 1.8};

/// Percentage change in beds 100 (B_beta - B_1) / B_1 when the LOS variance track is scaled by beta.
std::vector<SensitivityCell> variance_sensitivity(const ModelInputs& inputs, std::span<const double> betas,
                                                  std::span<const Strategy> strategies, double gamma = 1.0);

/// Rows per strategy, one column per multiplier.
void write_sensitivity_csv(std::ostream& stream, std::span<const SensitivityCell> cells);

} // namespace bedcast

#endif // BEDCAST_SCENARIO_H
