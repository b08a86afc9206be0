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
#include "bedcast/simulate.h"
#include "bedcast/error.h"
#include "bedcast/stats.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace bedcast
{

LosSampler::LosSampler(LosModel model)
    : m_model(std::move(model))
{
    if (m_model.mu_t.empty()) {
        throw Error(ErrorCode::InvalidArgument, "LOS sampler needs a mean track");
    }
    if (has_shape(m_model.family) && !(m_model.kappa && *m_model.kappa > 0.0)) {
        throw Error(ErrorCode::DomainError, std::string(to_string(m_model.family)) + " requires a positive shape");
    }
}

double LosSampler::sample(long admit_day, std::mt19937_64& rng) const
{
    const double mu = m_model.mu_at(admit_day);
    if (!(mu > 0.0)) {
        throw Error(ErrorCode::DomainError, "mean LOS must be positive");
    }
    switch (m_model.family) {
    case LosFamily::Exponential:
        return std::exponential_distribution<double>(1.0 / mu)(rng);
    case LosFamily::Weibull: {
        const double k = *m_model.kappa;
        return std::weibull_distribution<double>(k, mu / std::tgamma(1.0 + 1.0 / k))(rng);
    }
    case LosFamily::Lognormal: {
        const double sigma2 = m_model.sigma2_at(admit_day);
        if (sigma2 <= 0.0) {
            return mu;
        }
        const double tau2 = std::log1p(sigma2 / (mu * mu));
        return std::lognormal_distribution<double>(std::log(mu) - 0.5 * tau2, std::sqrt(tau2))(rng);
    }
    case LosFamily::Gamma: {
        const double k = *m_model.kappa;
        return std::gamma_distribution<double>(k, mu / k)(rng);
    }
    case LosFamily::Fisk: {
        // inverse of (theta / (u + theta))^k
        const double k     = *m_model.kappa;
        const double theta = mu * k / std::numbers::pi;
        const double v     = 1.0 - std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        return theta * (std::pow(v, -1.0 / k) - 1.0);
    }
    }
    return mu;
}

std::vector<int> sample_nhpp(const RateFunction& lambda, int horizon, std::mt19937_64& rng)
{
    std::vector<int> counts(static_cast<std::size_t>(std::max(0, horizon)), 0);
    for (std::size_t t = 0; t < counts.size(); ++t) {
        const double rate = lambda(static_cast<long>(t));
        if (!(rate >= 0.0) || !std::isfinite(rate)) {
            throw Error(ErrorCode::InvalidArgument, "arrival rate must be finite and non-negative");
        }
        if (rate > 0.0) {
            counts[t] = std::poisson_distribution<int>(rate)(rng);
        }
    }
    return counts;
}

std::vector<int> simulate_census(const std::vector<int>& admissions, const LosSampler& sampler, std::mt19937_64& rng)
{
    const long n = static_cast<long>(admissions.size());
    std::vector<int> census(admissions.size(), 0);
    for (long d = 0; d < n; ++d) {
        for (int k = 0; k < admissions[static_cast<std::size_t>(d)]; ++k) {
            const double s  = sampler.sample(d, rng);
            const long last = std::min(n - 1, d + static_cast<long>(std::ceil(s)) - 1);
            for (long t = d; t <= last; ++t) {
                ++census[static_cast<std::size_t>(t)];
            }
        }
    }
    return census;
}

void validate(const SimConfig& config)
{
    if (!config.lambda) {
        throw Error(ErrorCode::InvalidArgument, "simulation needs an arrival rate");
    }
    if (config.horizon < 1) {
        throw Error(ErrorCode::InvalidArgument, "horizon must be at least one day");
    }
    if (config.replications < 1) {
        throw Error(ErrorCode::InvalidArgument, "replications must be positive");
    }
}

std::vector<double> SimulationResult::mean_census() const
{
    if (census.empty()) {
        return {};
    }
    std::vector<double> out(census.front().size(), 0.0);
    for (const auto& path : census) {
        for (std::size_t t = 0; t < out.size(); ++t) {
            out[t] += path[t];
        }
    }
    for (auto& v : out) {
        v /= static_cast<double>(census.size());
    }
    return out;
}

std::mt19937_64 replication_rng(std::uint64_t seed, std::size_t replication)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replication), static_cast<std::uint32_t>(replication >> 32)};
    return std::mt19937_64(seq);
}

SimulationResult simulate(const SimConfig& config)
{
    validate(config);
    const LosSampler sampler(config.los);
    const auto reps = static_cast<std::size_t>(config.replications);
    SimulationResult result;
    result.census.resize(reps);
    if (config.keep_admissions) {
        result.admissions.resize(reps);
    }
    parallel_for(reps, [&](std::size_t r) {
        auto rng          = replication_rng(config.seed, r);
        auto admissions   = sample_nhpp(config.lambda, config.horizon, rng);
        result.census[r]  = simulate_census(admissions, sampler, rng);
        if (config.keep_admissions) {
            result.admissions[r] = std::move(admissions);
        }
    });
    return result;
}

OverflowEstimate empirical_overflow(const std::vector<std::vector<int>>& census, double capacity,
                                    std::optional<std::size_t> day)
{
    if (census.size() < kMinOverflowReplications) {
        throw Error(ErrorCode::TooFewReplications,
                    "overflow frequency needs at least 100 replications, got " + std::to_string(census.size()));
    }
    std::size_t over = 0, trials = 0;
    for (const auto& path : census) {
        if (day) {
            if (*day >= path.size()) {
                throw Error(ErrorCode::OutOfRange, "day outside the simulated horizon");
            }
            over += path[*day] > capacity ? 1 : 0;
            ++trials;
            continue;
        }
        for (int c : path) {
            over += c > capacity ? 1 : 0;
        }
        trials += path.size();
    }
    OverflowEstimate e;
    e.trials = trials;
    if (trials > 0) {
        e.frequency = static_cast<double>(over) / static_cast<double>(trials);
        e.std_error = std::sqrt(e.frequency * (1.0 - e.frequency) / static_cast<double>(trials));
    }
    return e;
}

std::vector<AdmissionRecord> synthesize_admissions(const std::string& site_id, Date start,
                                                   const std::vector<double>& lambda, const LosSampler& sampler,
                                                   std::mt19937_64& rng)
{
    const auto counts = sample_nhpp([&](long t) { return lambda[static_cast<std::size_t>(t)]; },
                                    static_cast<int>(lambda.size()), rng);
    std::vector<AdmissionRecord> records;
    for (std::size_t d = 0; d < counts.size(); ++d) {
        for (int k = 0; k < counts[d]; ++k) {
            records.push_back({site_id, start + std::chrono::days(static_cast<long>(d)),
                               sampler.sample(static_cast<long>(d), rng)});
        }
    }
    return records;
}

void write_simulation_csv(std::ostream& stream, Date start, const SimulationResult& result)
{
    stream << "date,mean_census,q05,q95\n";
    const auto means = result.mean_census();
    std::vector<double> day(result.census.size());
    for (std::size_t t = 0; t < means.size(); ++t) {
        for (std::size_t r = 0; r < result.census.size(); ++r) {
            day[r] = result.census[r][t];
        }
        stream << format_date(start + std::chrono::days(static_cast<long>(t))) << ',' << means[t] << ','
               << quantile(day, 0.05) << ',' << quantile(day, 0.95) << '\n';
    }
}

} // namespace bedcast
