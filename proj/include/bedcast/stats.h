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
#ifndef BEDCAST_STATS_H
#define BEDCAST_STATS_H

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace bedcast
{

double mean(std::span<const double> values);

/// Population standard deviation (divides by n).
double population_sd(std::span<const double> values);

/// Unbiased sample variance (divides by n - 1); zero for fewer than two values.
double sample_variance(std::span<const double> values);

/// Quantile by linear interpolation between order statistics (Hyndman-Fan type 7).
double quantile(std::span<const double> values, double p);

double median(std::span<const double> values);

/**
 * Runs body(i) for i in [0, n) on up to hardware_concurrency threads.
 * Each index must write only to its own output slot, which keeps results independent of scheduling.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace bedcast

#endif // BEDCAST_STATS_H
