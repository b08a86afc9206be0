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
#ifndef BEDCAST_OCCUPANCY_H
#define BEDCAST_OCCUPANCY_H

#include "bedcast/losfit.h"

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bedcast
{

/// How lags reaching before the first day of the history are treated.
enum class WarmUp
{
    /// Use the earliest arrival rate and LOS parameters for days before the start.
    BackFill,
    /// Report only days whose whole lag window lies inside the history.
    Truncate,
};

struct OccupancySeries {
    /// Index into the input rate series of rho[0].
    std::size_t first_day = 0;
    std::vector<double> rho;
    /// Long-run mean occupancy: mean arrival rate times mean LOS.
    double rho_bar = 0.0;
    std::vector<double> delta;

    double peak() const;
};

/// P(S > u | admitted on day admit_day) supplied by the caller.
using SurvivalProvider = std::function<double(int u, long admit_day)>;

/**
 * Expected occupancy of the time-varying infinite-server queue on the day grid,
 * rho_t = sum_{u=0}^{s_max} lambda_{t-u} P(S > u | A = t - u).
 * @throws Error CoverageError when a track does not cover the arrival series.
 */
OccupancySeries expected_occupancy(std::span<const double> lambda_t, const LosModel& model,
                                   WarmUp warm_up = WarmUp::BackFill);

/// Same convolution with an arbitrary survival provider; rho_bar is lambda_bar times mean_los.
OccupancySeries expected_occupancy(std::span<const double> lambda_t, const SurvivalProvider& survival, int s_max,
                                   double mean_los, WarmUp warm_up = WarmUp::BackFill);

/// Poisson mean of the day-level census L_t; throws OutOfRange outside the series.
double occupancy_to_load_distribution(const OccupancySeries& occupancy, std::size_t day);

void write_occupancy_csv(std::ostream& stream, const std::vector<std::string>& dates, const OccupancySeries& occ);

} // namespace bedcast

#endif // BEDCAST_OCCUPANCY_H
