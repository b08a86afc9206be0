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
#include "bedcast/diagnostics.h"
#include "bedcast/error.h"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/poisson.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace bedcast
{

namespace
{

double chi2_upper(double statistic, int dof)
{
    if (dof < 1) {
        return 1.0;
    }
    if (statistic <= 0.0) {
        return 1.0;
    }
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(dof), statistic));
}

double count_mean(std::span<const int> counts)
{
    double sum = 0.0;
    for (int c : counts) {
        sum += c;
    }
    return sum / static_cast<double>(counts.size());
}

nlohmann::json result_json(const std::optional<TestResult>& r)
{
    if (!r) {
        return nullptr;
    }
    return {{"statistic", r->statistic}, {"p_value", r->p_value}, {"n", r->n}, {"dof", r->dof}};
}

} // namespace

double kolmogorov_sf(double x)
{
    if (x <= 0.0) {
        return 1.0;
    }
    if (x < 1.18) {
        // theta-function form converges quickly for small x
        const double w = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
        double cdf     = 0.0;
        for (int k = 1; k <= 50; ++k) {
            const double term = std::exp(-(2 * k - 1) * (2 * k - 1) * w);
            cdf += term;
            if (term < 1e-18) {
                break;
            }
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * cdf, 0.0, 1.0);
    }
    double sf = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sf += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-18) {
            break;
        }
    }
    return std::clamp(sf, 0.0, 1.0);
}

TestResult ks_exponential(std::span<const double> interarrival_times)
{
    const auto n = interarrival_times.size();
    if (n < 10) {
        throw Error(ErrorCode::TooFewSamples, "KS test needs at least 10 interarrival times, got " + std::to_string(n));
    }
    std::vector<double> x(interarrival_times.begin(), interarrival_times.end());
    double sum = 0.0;
    for (double v : x) {
        if (!(v > 0.0)) {
            throw Error(ErrorCode::DomainError, "interarrival times must be positive");
        }
        sum += v;
    }
    std::sort(x.begin(), x.end());
    const double mean = sum / static_cast<double>(n);
    double d          = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = -std::expm1(-x[i] / mean);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    const double rn = std::sqrt(static_cast<double>(n));
    TestResult r;
    r.statistic = d;
    r.n         = n;
    r.p_value   = kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d);
    return r;
}

TestResult dispersion_index(std::span<const int> daily_counts)
{
    const auto n = daily_counts.size();
    if (n < 2) {
        throw Error(ErrorCode::TooFewSamples, "dispersion index needs at least two counts");
    }
    const double m = count_mean(daily_counts);
    if (!(m > 0.0)) {
        throw Error(ErrorCode::ZeroMean, "dispersion index is undefined for a zero mean");
    }
    double ss = 0.0;
    for (int c : daily_counts) {
        ss += (c - m) * (c - m);
    }
    TestResult r;
    r.statistic = ss / static_cast<double>(n) / m;
    r.n         = n;
    r.dof       = static_cast<int>(n) - 1;
    r.p_value   = chi2_upper(ss / m, r.dof);
    return r;
}

TestResult chi2_poisson_gof(std::span<const int> daily_counts, int bins)
{
    const auto n = daily_counts.size();
    if (n == 0) {
        throw Error(ErrorCode::TooFewSamples, "goodness of fit needs a sample");
    }
    if (bins < 3) {
        throw Error(ErrorCode::TooFewBins, "at least three bins are required");
    }
    const double m   = count_mean(daily_counts);
    const double nn  = static_cast<double>(n);

    // cell upper bounds (inclusive); the last cell is open ended
    std::vector<int> upper;
    if (m > 0.0) {
        const boost::math::poisson_distribution<double> pois(m);
        for (int j = 1; j < bins; ++j) {
            int k = 0;
            while (boost::math::cdf(pois, k) < static_cast<double>(j) / bins) {
                ++k;
            }
            if (upper.empty() || k > upper.back()) {
                upper.push_back(k);
            }
        }
    }
    auto cell_prob = [&](std::size_t c) {
        if (!(m > 0.0)) {
            return 1.0;
        }
        const boost::math::poisson_distribution<double> pois(m);
        const double hi = c < upper.size() ? boost::math::cdf(pois, upper[c]) : 1.0;
        const double lo = c == 0 ? 0.0 : boost::math::cdf(pois, upper[c - 1]);
        return hi - lo;
    };
    const std::size_t raw_cells = upper.size() + 1;
    std::vector<double> expected(raw_cells), observed(raw_cells, 0.0);
    for (std::size_t c = 0; c < raw_cells; ++c) {
        expected[c] = nn * cell_prob(c);
    }
    for (int v : daily_counts) {
        const auto c = static_cast<std::size_t>(std::lower_bound(upper.begin(), upper.end(), v) - upper.begin());
        observed[c] += 1.0;
    }

    std::vector<double> e, o;
    double acc_e = 0.0, acc_o = 0.0;
    for (std::size_t c = 0; c < raw_cells; ++c) {
        acc_e += expected[c];
        acc_o += observed[c];
        if (acc_e >= 5.0) {
            e.push_back(acc_e);
            o.push_back(acc_o);
            acc_e = acc_o = 0.0;
        }
    }
    if (acc_e > 0.0 || acc_o > 0.0) {
        if (e.empty()) {
            e.push_back(acc_e);
            o.push_back(acc_o);
        }
        else {
            e.back() += acc_e;
            o.back() += acc_o;
        }
    }
    if (e.size() < 3) {
        throw Error(ErrorCode::TooFewBins,
                    "only " + std::to_string(e.size()) + " cells remain after merging low expected counts");
    }
    double stat = 0.0;
    for (std::size_t c = 0; c < e.size(); ++c) {
        stat += (o[c] - e[c]) * (o[c] - e[c]) / e[c];
    }
    TestResult r;
    r.statistic = stat;
    r.n         = n;
    r.dof       = static_cast<int>(e.size()) - 2;
    r.p_value   = chi2_upper(stat, r.dof);
    return r;
}

std::vector<double> interarrival_times(std::span<const int> daily_counts, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> within(0.0, 1.0);
    std::vector<double> times;
    std::vector<double> day;
    std::optional<double> previous;
    for (std::size_t d = 0; d < daily_counts.size(); ++d) {
        day.resize(static_cast<std::size_t>(std::max(daily_counts[d], 0)));
        for (double& u : day) {
            u = static_cast<double>(d) + within(rng);
        }
        std::sort(day.begin(), day.end());
        for (double t : day) {
            if (previous) {
                times.push_back(t - *previous);
            }
            previous = t;
        }
    }
    return times;
}

DiagnosticsReport diagnose(const std::string& site_id, std::span<const int> daily_counts, std::uint64_t seed)
{
    DiagnosticsReport report;
    report.site_id = site_id;
    report.days    = daily_counts.size();
    auto attempt   = [&](const char* name, auto&& test, std::optional<TestResult>& slot) {
        try {
            slot = test();
        }
        catch (const Error& e) {
            report.notes.push_back(std::string(name) + ": " + e.what());
        }
    };
    attempt("dispersion", [&] { return dispersion_index(daily_counts); }, report.dispersion);
    attempt("chi2", [&] { return chi2_poisson_gof(daily_counts); }, report.chi2);
    attempt("ks", [&] {
        const auto gaps = interarrival_times(daily_counts, seed);
        return ks_exponential(gaps);
    }, report.ks);
    return report;
}

std::string diagnostics_to_json(const std::vector<DiagnosticsReport>& reports, int indent)
{
    auto out = nlohmann::json::array();
    for (const auto& r : reports) {
        out.push_back({{"site", r.site_id},
                       {"days", r.days},
                       {"dispersion", result_json(r.dispersion)},
                       {"chi2_poisson", result_json(r.chi2)},
                       {"ks_exponential", result_json(r.ks)},
                       {"notes", r.notes}});
    }
    return out.dump(indent);
}

} // namespace bedcast
