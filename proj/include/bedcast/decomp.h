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
#ifndef BEDCAST_DECOMP_H
#define BEDCAST_DECOMP_H

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace bedcast
{

/// Seasonal period of every decomposition, in days.
inline constexpr int kWeeklyPeriod = 7;

/// Floor applied to smoothed rates, durations and variances before use as model inputs.
inline constexpr double kPositiveFloor = 1e-6;

struct StlConfig {
    int seasonal_window = 7;
    int trend_window    = 15;
    int seasonal_degree = 1;
    int trend_degree    = 1;
    bool robust         = false;

    bool operator==(const StlConfig&) const = default;
};

/// Throws InvalidArgument unless windows are odd and >= 3 and degrees are 1 or 2.
void validate(const StlConfig& config);

std::string to_string(const StlConfig& config);

struct Decomposition {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;
    StlConfig config;
    /// Population standard deviation of the residual.
    double residual_std = 0.0;
};

struct VarianceTrack {
    int window = 31;
    std::vector<double> sigma2;
};

/// Loop counts for the STL inner (seasonal/trend) and outer (robustness) iterations.
struct StlIterations {
    int inner = 2;
    int outer = 1;

    /// Defaults by robustness: 2 inner / 1 outer plain, 1 inner / 10 outer robust.
    static StlIterations defaults(bool robust)
    {
        return robust ? StlIterations{1, 10} : StlIterations{2, 1};
    }
};

/**
 * Locally weighted polynomial regression evaluated at every index.
 * Each fit uses the `window` nearest points with tricube distance weights, multiplied by the optional
 * robustness weights (empty span means all ones).
 * @throws Error WindowTooLarge when window exceeds the series length, InvalidArgument on bad degree.
 */
std::vector<double> loess_smooth(std::span<const double> series, int window, int degree,
                                 std::span<const double> weights = {});

/**
 * Additive STL decomposition with a 7-day period.
 * @throws Error SeriesTooShort when the series has fewer than two full periods.
 */
Decomposition stl_decompose(std::span<const double> series, const StlConfig& config, StlIterations iterations);

inline Decomposition stl_decompose(std::span<const double> series, const StlConfig& config)
{
    return stl_decompose(series, config, StlIterations::defaults(config.robust));
}

/// The 72 candidate configurations in tie-break order (smaller windows, lower degrees, non-robust first).
std::vector<StlConfig> stl_grid();

/// Index of the smallest residual std; the earliest index wins ties.
std::size_t select_config(std::span<const double> residual_stds);

struct GridSearchResult {
    StlConfig best;
    Decomposition decomposition;
    /// Residual std of every grid candidate, aligned with stl_grid().
    std::vector<double> residual_stds;
};

GridSearchResult grid_search(std::span<const double> series);

/// Centered rolling sample standard deviation; windows are truncated at the series edges.
std::vector<double> rolling_std(std::span<const double> values, int window);

/**
 * Chooses among 7/15/31-day centered rolling windows the one whose rolling-std series varies least,
 * and squares it into a variance track floored at kPositiveFloor.
 */
VarianceTrack rolling_variance(std::span<const double> residuals);

/// Variance track for a fixed window.
VarianceTrack rolling_variance(std::span<const double> residuals, int window);

/// Clamps values from below at kPositiveFloor.
std::vector<double> clamp_positive(std::span<const double> values);

void write_decomposition_csv(std::ostream& stream, const std::vector<std::string>& dates, const Decomposition& d);

} // namespace bedcast

#endif // BEDCAST_DECOMP_H
