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
#include "bedcast/error.h"
#include "bedcast/occupancy.h"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace bedcast;

namespace
{

std::vector<double> wavy_rate(std::size_t n, double phase)
{
    std::vector<double> l(n);
    for (std::size_t t = 0; t < n; ++t) {
        l[t] = 2.0 + std::sin(2.0 * std::numbers::pi * t / 365.0 + phase) + 0.5 * std::sin(2.0 * std::numbers::pi * t / 7.0);
    }
    return l;
}

} // namespace

TEST_SUITE("occupancy")
{
    TEST_CASE("zero arrivals")
    {
        const auto o = expected_occupancy(std::vector<double>(50, 0.0), constant_model(LosFamily::Exponential, 10));
        for (double r : o.rho) {
            CHECK(r == 0.0);
        }
        CHECK(o.rho_bar == 0.0);
    }

    TEST_CASE("deterministic five-day stay")
    {
        const SurvivalProvider step = [](int u, long) { return u <= 4 ? 1.0 : 0.0; };
        const auto o = expected_occupancy(std::vector<double>(30, 1.0), step, 10, 5.0);
        for (double r : o.rho) {
            CHECK(r == doctest::Approx(5.0));
        }
    }

    TEST_CASE("stationary exponential")
    {
        const auto o = expected_occupancy(std::vector<double>(400, 1.0), constant_model(LosFamily::Exponential, 10, {}, 0, 100));
        const double closed = (1.0 - std::exp(-10.1)) / (1.0 - std::exp(-0.1));
        CHECK(closed == doctest::Approx(10.508).epsilon(1e-4));
        double direct = 0.0;
        for (int u = 0; u <= 100; ++u) {
            direct += std::exp(-u / 10.0);
        }
        for (std::size_t t = 100; t < o.rho.size(); ++t) {
            CHECK(std::abs(o.rho[t] - direct) <= 1e-9);
            CHECK(std::abs(o.rho[t] - closed) <= 1e-9);
        }
        CHECK(o.rho_bar == doctest::Approx(10.0));
    }

    TEST_CASE("convolution matches a direct double loop")
    {
        const auto lambda = wavy_rate(200, 0.3);
        LosModel m        = constant_model(LosFamily::Weibull, 8.0, 1.5, 0, 40);
        m.mu_t.resize(200);
        for (std::size_t t = 0; t < 200; ++t) {
            m.mu_t[t] = 6.0 + 3.0 * std::cos(t / 30.0);
        }
        const auto o = expected_occupancy(lambda, m);
        for (long t = 0; t < 200; ++t) {
            double sum = 0.0;
            for (int u = 0; u <= 40; ++u) {
                const long a      = t - u;
                const double lam  = lambda[static_cast<std::size_t>(std::max(a, 0L))];
                const double mu   = m.mu_t[static_cast<std::size_t>(std::max(a, 0L))];
                const double theta = mu / std::tgamma(1.0 + 1.0 / 1.5);
                sum += lam * std::exp(-std::pow(u / theta, 1.5));
            }
            CHECK(o.rho[static_cast<std::size_t>(t)] == doctest::Approx(sum).epsilon(1e-12));
        }
    }

    TEST_CASE("linearity in arrivals")
    {
        const auto a = wavy_rate(300, 0.0), b = wavy_rate(300, 1.7);
        const auto model = constant_model(LosFamily::Gamma, 9.0, 2.2, 0, 60);
        std::vector<double> mix(300);
        for (std::size_t t = 0; t < mix.size(); ++t) {
            mix[t] = 0.7 * a[t] + 2.5 * b[t];
        }
        const auto ra = expected_occupancy(a, model), rb = expected_occupancy(b, model), rm = expected_occupancy(mix, model);
        for (std::size_t t = 0; t < mix.size(); ++t) {
            CHECK(std::abs(rm.rho[t] - (0.7 * ra.rho[t] + 2.5 * rb.rho[t])) <= 1e-9);
        }
    }

    TEST_CASE("decomposition identity and non-negativity")
    {
        const auto o = expected_occupancy(wavy_rate(365, 0.0), constant_model(LosFamily::Lognormal, 10, {}, 100, 80));
        for (std::size_t t = 0; t < o.rho.size(); ++t) {
            CHECK(o.rho[t] >= 0.0);
            CHECK(std::abs(o.delta[t] + o.rho_bar - o.rho[t]) <= 1e-12 * std::max(1.0, o.rho[t]));
        }
    }

    TEST_CASE("truncated warm-up drops the first lag window")
    {
        const auto lambda = wavy_rate(120, 0.0);
        const auto model  = constant_model(LosFamily::Exponential, 5, {}, 0, 30);
        const auto full   = expected_occupancy(lambda, model, WarmUp::BackFill);
        const auto trunc  = expected_occupancy(lambda, model, WarmUp::Truncate);
        CHECK(trunc.first_day == 30);
        REQUIRE(trunc.rho.size() == 90);
        for (std::size_t t = 0; t < trunc.rho.size(); ++t) {
            CHECK(trunc.rho[t] == full.rho[t + 30]);
        }
    }

    TEST_CASE("coverage and load distribution")
    {
        LosModel m = constant_model(LosFamily::Exponential, 5);
        m.mu_t     = {5.0, 5.0};
        CHECK_THROWS_AS(expected_occupancy(std::vector<double>(10, 1.0), m), Error);
        CHECK_THROWS_AS(expected_occupancy(std::vector<double>{1.0, -1.0}, constant_model(LosFamily::Exponential, 5)), Error);

        OccupancySeries o;
        o.rho = {10.0, 0.0};
        CHECK(occupancy_to_load_distribution(o, 0) == 10.0);
        CHECK(occupancy_to_load_distribution(o, 1) == 0.0);
        CHECK_THROWS_AS(occupancy_to_load_distribution(o, 2), Error);
    }
}
