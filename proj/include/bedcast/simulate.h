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
#ifndef BEDCAST_SIMULATE_H
#define BEDCAST_SIMULATE_H

#include "bedcast/dates.h"
#include "bedcast/ingest.h"
#include "bedcast/losfit.h"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace bedcast
{

/// Daily arrival rate as a function of the day index.
using RateFunction = std::function<double(long)>;

/// Draws stays whose survival function is `survival_probability` parameterised at the admission day.
class LosSampler
{
public:
    explicit LosSampler(LosModel model);

    double sample(long admit_day, std::mt19937_64& rng) const;

    const LosModel& model() const
    {
        return m_model;
    }

private:
    LosModel m_model;
};

/**
 * Admission counts per day; day t is Poisson(lambda(t)).
 * @throws Error InvalidArgument for a negative or non-finite rate.
 */
std::vector<int> sample_nhpp(const RateFunction& lambda, int horizon, std::mt19937_64& rng);

/// Census path; a stay of length s admitted on day d occupies days d .. d + ceil(s) - 1 within the horizon.
std::vector<int> simulate_census(const std::vector<int>& admissions, const LosSampler& sampler, std::mt19937_64& rng);

struct SimConfig {
    RateFunction lambda;
    LosModel los;
    int horizon      = 365;
    int replications = 1000;
    std::uint64_t seed = 0;
    bool keep_admissions = false;
};

void validate(const SimConfig& config);

struct SimulationResult {
    std::vector<std::vector<int>> admissions;
    std::vector<std::vector<int>> census;

    /// Mean census across replications for every day.
    std::vector<double> mean_census() const;
};

/// Per-replication generator; replications draw from independent seed sequences.
std::mt19937_64 replication_rng(std::uint64_t seed, std::size_t replication);

/// Independent replications, in parallel. Output does not depend on the thread count.
SimulationResult simulate(const SimConfig& config);

inline constexpr std::size_t kMinOverflowReplications = 100;

struct OverflowEstimate {
    double frequency = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

/**
 * Fraction of (path, day) pairs with census above capacity, with its binomial standard error.
 * With `day` set, only that day of each path counts, which makes the trials independent.
 * @throws Error TooFewReplications below 100 paths, OutOfRange for a day past the horizon.
 */
OverflowEstimate empirical_overflow(const std::vector<std::vector<int>>& census, double capacity,
                                    std::optional<std::size_t> day = std::nullopt);

/// Synthetic admission records for one site: day counts from lambda, one sampled LOS per patient.
std::vector<AdmissionRecord> synthesize_admissions(const std::string& site_id, Date start,
                                                   const std::vector<double>& lambda, const LosSampler& sampler,
                                                   std::mt19937_64& rng);

/// date,mean_census,q05,q95 per day.
void write_simulation_csv(std::ostream& stream, Date start, const SimulationResult& result);

} // namespace bedcast

#endif // BEDCAST_SIMULATE_H
