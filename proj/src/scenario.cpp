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
#include "bedcast/scenario.h"
#include "bedcast/error.h"
#include "bedcast/stats.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

namespace bedcast
{

namespace
{

void scale_track(std::vector<double>& track, double beta, const std::optional<DayRange>& range,
                 std::size_t horizon)
{
    if (beta == 1.0) {
        return;
    }
    // Broadcast constant tracks before a partial-range edit.
    if (range && track.size() == 1 && horizon > 1) {
        track.assign(horizon, track.front());
    }
    for (std::size_t t = 0; t < track.size(); ++t) {
        if (!range || range->contains(t)) {
            track[t] *= beta;
        }
    }
}

void check_multiplier(double beta, const char* name)
{
    if (!std::isfinite(beta) || beta < 0.0) {
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be finite and non-negative");
    }
}

} // namespace

ModelInputs apply_scenario(const ModelInputs& inputs, const ScenarioSpec& spec)
{
    check_multiplier(spec.beta_lambda, "beta_lambda");
    check_multiplier(spec.beta_mu, "beta_mu");
    check_multiplier(spec.beta_sigma2, "beta_sigma2");
    if (spec.beta_lambda == 0.0 || spec.beta_mu == 0.0) {
        throw Error(ErrorCode::InvalidArgument, "beta_lambda and beta_mu must be positive");
    }
    if (spec.beta_sigma2 != 1.0 && inputs.model.family != LosFamily::Lognormal) {
        throw Error(ErrorCode::FamilyMismatch, "variance scaling requires a Lognormal LOS model, site uses " +
                                                   std::string(to_string(inputs.model.family)));
    }
    if (spec.date_range && spec.date_range->last < spec.date_range->first) {
        throw Error(ErrorCode::InvalidArgument, "scenario date range ends before it starts");
    }

    ModelInputs out     = inputs;
    const auto horizon  = inputs.lambda_t.size();
    scale_track(out.lambda_t, spec.beta_lambda, spec.date_range, horizon);
    scale_track(out.model.mu_t, spec.beta_mu, spec.date_range, horizon);
    scale_track(out.model.sigma2_t, spec.beta_sigma2, spec.date_range, horizon);
    if (spec.beta_mu > 1.0) {
        out.model.s_max = static_cast<int>(std::ceil(inputs.model.s_max * spec.beta_mu));
    }
    return out;
}

std::string_view to_string(Strategy strategy)
{
    switch (strategy) {
    case Strategy::Average:
        return "B_average";
    case Strategy::Overflow05:
        return "B_0.05";
    case Strategy::Overflow01:
        return "B_0.01";
    case Strategy::Max:
        return "B_max";
    }
    return "unknown";
}

std::optional<Strategy> parse_strategy(std::string_view name)
{
    for (auto s : {Strategy::Average, Strategy::Overflow05, Strategy::Overflow01, Strategy::Max}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

int strategy_beds(Strategy strategy, const ModelInputs& inputs, const OccupancySeries& rho, double gamma,
                  OverflowMode mode)
{
    switch (strategy) {
    case Strategy::Average: {
        const auto n = inputs.lambda_t.size();
        const std::span<const double> mu(inputs.model.mu_t.data(), std::min(n, inputs.model.mu_t.size()));
        return b_average(mean(inputs.lambda_t), mean(mu));
    }
    case Strategy::Overflow05:
        return b_overflow(rho, gamma, 0.05, mode);
    case Strategy::Overflow01:
        return b_overflow(rho, gamma, 0.01, mode);
    case Strategy::Max:
        return b_max(rho);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown strategy");
}

std::vector<SensitivityCell> variance_sensitivity(const ModelInputs& inputs, std::span<const double> betas,
                                                  std::span<const Strategy> strategies, double gamma)
{
    if (inputs.model.family != LosFamily::Lognormal) {
        throw Error(ErrorCode::FamilyMismatch, "variance sensitivity requires a Lognormal LOS model");
    }
    const auto baseline_rho = expected_occupancy(inputs.lambda_t, inputs.model);
    std::vector<int> baseline;
    for (auto s : strategies) {
        baseline.push_back(strategy_beds(s, inputs, baseline_rho, gamma));
    }

    std::vector<SensitivityCell> cells(betas.size() * strategies.size());
    parallel_for(betas.size(), [&](std::size_t b) {
        ScenarioSpec spec;
        spec.beta_sigma2 = betas[b];
        const auto scenario = apply_scenario(inputs, spec);
        const auto rho      = expected_occupancy(scenario.lambda_t, scenario.model);
        for (std::size_t s = 0; s < strategies.size(); ++s) {
            SensitivityCell& cell = cells[b * strategies.size() + s];
            cell.beta             = betas[b];
            cell.strategy         = strategies[s];
            cell.baseline_beds    = baseline[s];
            cell.beds             = betas[b] == 1.0 ? baseline[s] : strategy_beds(strategies[s], scenario, rho, gamma);
            cell.pct_change       = 100.0 * (cell.beds - cell.baseline_beds) / cell.baseline_beds;
        }
    });
    return cells;
}

void write_sensitivity_csv(std::ostream& stream, std::span<const SensitivityCell> cells)
{
    std::vector<double> betas;
    std::vector<Strategy> strategies;
    std::map<std::pair<Strategy, double>, double> value;
    for (const auto& c : cells) {
        if (std::find(betas.begin(), betas.end(), c.beta) == betas.end()) {
            betas.push_back(c.beta);
        }
        if (std::find(strategies.begin(), strategies.end(), c.strategy) == strategies.end()) {
            strategies.push_back(c.strategy);
        }
        value[{c.strategy, c.beta}] = c.pct_change;
    }
    stream << "strategy";
    for (double b : betas) {
        stream << ",beta_" << b;
    }
    stream << '\n';
    for (auto s : strategies) {
        stream << to_string(s);
        for (double b : betas) {
            stream << ',';
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", value[{s, b}]);
            stream << buf;
        }
        stream << '\n';
    }
}

} // namespace bedcast
