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
#include "bedcast/occupancy.h"
#include "bedcast/error.h"
#include "bedcast/stats.h"

#include <algorithm>
#include <ostream>

namespace bedcast
{

double OccupancySeries::peak() const
{
    if (rho.empty()) {
        throw Error(ErrorCode::EmptySeries, "occupancy series is empty");
    }
    return *std::max_element(rho.begin(), rho.end());
}

OccupancySeries expected_occupancy(std::span<const double> lambda_t, const SurvivalProvider& survival, int s_max,
                                   double mean_los, WarmUp warm_up)
{
    if (s_max < 1) {
        throw Error(ErrorCode::InvalidArgument, "s_max must be at least 1");
    }
    if (lambda_t.empty()) {
        throw Error(ErrorCode::CoverageError, "empty arrival series");
    }
    for (double l : lambda_t) {
        if (!(l >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "arrival rates must be non-negative");
        }
    }
    const long n     = static_cast<long>(lambda_t.size());
    const long first = warm_up == WarmUp::Truncate ? std::min<long>(s_max, n) : 0;

    OccupancySeries out;
    out.first_day = static_cast<std::size_t>(first);
    out.rho.resize(static_cast<std::size_t>(n - first));

    const long earliest = warm_up == WarmUp::BackFill ? -static_cast<long>(s_max) : 0;
    for (long t = first; t < n; ++t) {
        double sum = 0.0;
        for (int u = 0; u <= s_max; ++u) {
            const long a = t - u;
            if (a < earliest) {
                break;
            }
            const double rate = lambda_t[static_cast<std::size_t>(std::max(a, 0L))];
            if (rate > 0.0) {
                sum += rate * survival(u, std::max(a, 0L));
            }
        }
        out.rho[static_cast<std::size_t>(t - first)] = sum;
    }

    out.rho_bar = mean(lambda_t) * mean_los;
    out.delta.resize(out.rho.size());
    for (std::size_t i = 0; i < out.rho.size(); ++i) {
        out.delta[i] = out.rho[i] - out.rho_bar;
    }
    return out;
}

OccupancySeries expected_occupancy(std::span<const double> lambda_t, const LosModel& model, WarmUp warm_up)
{
    auto covers = [&](std::size_t track) { return track == 1 || track >= lambda_t.size(); };
    if (!covers(model.mu_t.size())) {
        throw Error(ErrorCode::CoverageError, "mean LOS track covers " + std::to_string(model.mu_t.size()) +
                                                  " of " + std::to_string(lambda_t.size()) + " days");
    }
    if (model.family == LosFamily::Lognormal && !covers(model.sigma2_t.size())) {
        throw Error(ErrorCode::CoverageError, "LOS variance track does not cover the arrival series");
    }
    const std::span<const double> mu(model.mu_t.data(), std::min(model.mu_t.size(), lambda_t.size()));
    return expected_occupancy(
        lambda_t, [&](int u, long day) { return conditional_survival(model, u, day); }, model.s_max, mean(mu),
        warm_up);
}

double occupancy_to_load_distribution(const OccupancySeries& occupancy, std::size_t day)
{
    if (day >= occupancy.rho.size()) {
        throw Error(ErrorCode::OutOfRange, "day " + std::to_string(day) + " outside occupancy series of length " +
                                               std::to_string(occupancy.rho.size()));
    }
    return occupancy.rho[day];
}

void write_occupancy_csv(std::ostream& stream, const std::vector<std::string>& dates, const OccupancySeries& occ)
{
    stream << "date,rho,rho_bar,delta\n";
    for (std::size_t i = 0; i < occ.rho.size(); ++i) {
        const auto t = occ.first_day + i;
        stream << (t < dates.size() ? dates[t] : std::to_string(t)) << ',' << occ.rho[i] << ',' << occ.rho_bar << ','
               << occ.delta[i] << '\n';
    }
}

} // namespace bedcast
