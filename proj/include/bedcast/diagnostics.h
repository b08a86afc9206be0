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
#ifndef BEDCAST_DIAGNOSTICS_H
#define BEDCAST_DIAGNOSTICS_H

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bedcast
{

struct TestResult {
    double statistic = 0.0;
    double p_value   = 1.0;
    std::size_t n    = 0;
    int dof          = 0;
};

/// Survival function of the limiting Kolmogorov distribution, P(K > x).
double kolmogorov_sf(double x);

/**
 * One-sample KS test of exponentiality with the rate set from the sample mean.
 * @throws Error TooFewSamples below 10 values, DomainError for a non-positive time.
 */
TestResult ks_exponential(std::span<const double> interarrival_times);

/**
 * Variance-to-mean ratio of daily counts (population variance); the p-value is the upper chi-square tail
 * of sum (x - mean)^2 / mean on n - 1 degrees of freedom.
 * @throws Error ZeroMean, TooFewSamples below two counts.
 */
TestResult dispersion_index(std::span<const int> daily_counts);

/**
 * Pearson goodness of fit to Poisson(sample mean) over equal-probability cells, merged until every cell
 * expects at least five counts. dof = cells - 2.
 * @throws Error TooFewBins when fewer than three cells remain, TooFewSamples for an empty sample.
 */
TestResult chi2_poisson_gof(std::span<const int> daily_counts, int bins = 10);

/**
 * Interarrival times implied by daily counts. Given k arrivals on a day, a Poisson stream places them as
 * k sorted uniforms within the day; the draw is seeded, so the result is reproducible.
 */
std::vector<double> interarrival_times(std::span<const int> daily_counts, std::uint64_t seed = 0);

struct DiagnosticsReport {
    std::string site_id;
    std::size_t days = 0;
    std::optional<TestResult> dispersion;
    std::optional<TestResult> chi2;
    std::optional<TestResult> ks;
    std::vector<std::string> notes;
};

/// Runs every test, recording failures as notes rather than throwing.
DiagnosticsReport diagnose(const std::string& site_id, std::span<const int> daily_counts, std::uint64_t seed = 0);

std::string diagnostics_to_json(const std::vector<DiagnosticsReport>& reports, int indent = 2);

} // namespace bedcast

#endif // BEDCAST_DIAGNOSTICS_H
