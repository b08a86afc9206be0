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

#include <doctest.h>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace bedcast;

namespace
{

/// Upper chi-square tail for even degrees of freedom, closed form.
double chi2_upper_even(double x, int dof)
{
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < dof / 2; ++j) {
        term *= (x / 2.0) / j;
        sum += term;
    }
    return std::exp(-x / 2.0) * sum;
}

std::vector<int> poisson_counts(double mean, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::poisson_distribution<int> d(mean);
    std::vector<int> c(n);
    for (auto& v : c) {
        v = d(rng);
    }
    return c;
}

} // namespace

TEST_SUITE("diagnostics")
{
    TEST_CASE("kolmogorov distribution")
    {
        CHECK(kolmogorov_sf(1.0) == doctest::Approx(0.2699996717).epsilon(1e-9));
        CHECK(kolmogorov_sf(1.3580986) == doctest::Approx(0.05).epsilon(1e-5));
        CHECK(kolmogorov_sf(0.0) == 1.0);
        // both series agree where they switch
        CHECK(kolmogorov_sf(1.1799999) == doctest::Approx(kolmogorov_sf(1.18)).epsilon(1e-6));
    }

    TEST_CASE("ks statistic by hand")
    {
        std::mt19937_64 rng(3);
        std::exponential_distribution<double> d(1.0 / 3.0);
        std::vector<double> x(40);
        for (auto& v : x) {
            v = d(rng);
        }
        const auto r = ks_exponential(x);
        std::vector<double> s(x);
        std::sort(s.begin(), s.end());
        double m = 0;
        for (double v : s) {
            m += v / s.size();
        }
        double dmax = 0;
        for (std::size_t i = 0; i < s.size(); ++i) {
            const double f = 1.0 - std::exp(-s[i] / m);
            dmax           = std::max({dmax, (i + 1.0) / s.size() - f, f - double(i) / s.size()});
        }
        CHECK(r.statistic == doctest::Approx(dmax).epsilon(1e-12));
        CHECK(r.n == 40);
    }

    TEST_CASE("ks calibration on exponential samples")
    {
        int passed = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            std::mt19937_64 rng(seed);
            std::exponential_distribution<double> d(1.0 / 3.0);
            std::vector<double> x(5000);
            for (auto& v : x) {
                v = d(rng);
            }
            passed += ks_exponential(x).p_value > 0.01;
        }
        CHECK(passed >= 95);
    }

    TEST_CASE("ks contract")
    {
        CHECK(ks_exponential(std::vector<double>(200, 1.0)).p_value < 1e-6);
        CHECK_THROWS_AS(ks_exponential(std::vector<double>(5, 1.0)), Error);
        std::vector<double> bad(20, 1.0);
        bad[3] = 0.0;
        CHECK_THROWS_AS(ks_exponential(bad), Error);
    }

    TEST_CASE("dispersion index")
    {
        CHECK(dispersion_index(std::vector<int>(30, 4)).statistic == 0.0);
        std::vector<int> alt(100);
        for (std::size_t i = 0; i < alt.size(); ++i) {
            alt[i] = i % 2 ? 10 : 0;
        }
        CHECK(dispersion_index(alt).statistic == doctest::Approx(5.0));

        const auto r = dispersion_index(std::vector<int>{1, 2, 3, 4, 5});
        CHECK(r.statistic == doctest::Approx(2.0 / 3.0));
        CHECK(r.dof == 4);
        CHECK(r.p_value == doctest::Approx(chi2_upper_even(10.0 / 3.0, 4)).epsilon(1e-10));

        CHECK(std::abs(dispersion_index(poisson_counts(5.0, 10000, 1)).statistic - 1.0) < 0.05);
        CHECK_THROWS_AS(dispersion_index(std::vector<int>(10, 0)), Error);
        CHECK_THROWS_AS(dispersion_index(std::vector<int>{3}), Error);
    }

    TEST_CASE("chi-square calibration and power")
    {
        int passed = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto r = chi2_poisson_gof(poisson_counts(5.0, 10000, 500 + seed));
            passed += r.p_value > 0.01;
        }
        CHECK(passed >= 95);

        std::mt19937_64 rng(9);
        std::vector<int> seasonal(1000);
        for (std::size_t t = 0; t < seasonal.size(); ++t) {
            std::poisson_distribution<int> d(5.0 * (1.0 + 0.6 * std::sin(2.0 * std::numbers::pi * t / 365.0)));
            seasonal[t] = d(rng);
        }
        CHECK(chi2_poisson_gof(seasonal).p_value < 1e-6);
    }

    TEST_CASE("chi-square contract")
    {
        const auto r = chi2_poisson_gof(poisson_counts(5.0, 2000, 4));
        CHECK(r.dof >= 1);
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
        CHECK_THROWS_AS(chi2_poisson_gof(std::vector<int>(8, 3)), Error);
        CHECK_THROWS_AS(chi2_poisson_gof(std::vector<int>{}), Error);
    }

    TEST_CASE("statistics are permutation invariant")
    {
        auto c = poisson_counts(4.0, 500, 12);
        const auto d0 = dispersion_index(c), g0 = chi2_poisson_gof(c);
        std::mt19937_64 rng(2);
        std::shuffle(c.begin(), c.end(), rng);
        CHECK(dispersion_index(c).statistic == doctest::Approx(d0.statistic).epsilon(1e-12));
        CHECK(chi2_poisson_gof(c).statistic == doctest::Approx(g0.statistic).epsilon(1e-12));
    }

    TEST_CASE("interarrival times")
    {
        const std::vector<int> counts{2, 0, 1, 3};
        const auto t = interarrival_times(counts, 5);
        REQUIRE(t.size() == 5);
        CHECK(std::all_of(t.begin(), t.end(), [](double g) { return g > 0.0; }));
        CHECK(t[1] > 1.0);
        CHECK(t[1] < 3.0);
        CHECK(std::accumulate(t.begin(), t.end(), 0.0) < 4.0);
        CHECK(interarrival_times(counts, 5) == t);
        CHECK(interarrival_times(counts, 6) != t);
    }

    TEST_CASE("day-level Poisson counts pass the exponential gap test")
    {
        int passed = 0;
        for (std::uint64_t seed = 1; seed <= 100; ++seed) {
            const auto counts = poisson_counts(2.5, 1000, seed);
            passed += ks_exponential(interarrival_times(counts, seed)).p_value > 0.01 ? 1 : 0;
        }
        CHECK(passed >= 95);
    }

    TEST_CASE("report records failures as notes")
    {
        const auto empty = diagnose("S", std::vector<int>(20, 0));
        CHECK_FALSE(empty.dispersion);
        CHECK(empty.notes.size() == 3);
        const auto full = diagnose("S", poisson_counts(3.0, 400, 1));
        CHECK(full.notes.empty());
        const auto j = nlohmann::json::parse(diagnostics_to_json({full}));
        CHECK(j.is_array());
        CHECK(j[0]["site"] == "S");
    }
}
