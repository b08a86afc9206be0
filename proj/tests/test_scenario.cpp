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
#include "bedcast/scenario.h"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace bedcast;

namespace
{

ModelInputs lognormal_inputs(std::size_t n = 60)
{
    ModelInputs in;
    in.lambda_t.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        in.lambda_t[t] = 2.0 + 0.5 * std::sin(t / 9.0);
    }
    in.model          = constant_model(LosFamily::Lognormal, 10.0, {}, 100.0, 80);
    in.model.mu_t     = std::vector<double>(n, 10.0);
    in.model.sigma2_t = std::vector<double>(n, 100.0);
    return in;
}

} // namespace

TEST_SUITE("scenario")
{
    TEST_CASE("unit multipliers are the identity")
    {
        const auto in  = lognormal_inputs();
        const auto out = apply_scenario(in, {});
        CHECK(out.lambda_t == in.lambda_t);
        CHECK(out.model.mu_t == in.model.mu_t);
        CHECK(out.model.sigma2_t == in.model.sigma2_t);
        CHECK(out.model.s_max == in.model.s_max);
    }

    TEST_CASE("zero variance gives deterministic stays")
    {
        const auto out = apply_scenario(lognormal_inputs(), {1.0, 1.0, 0.0, {}});
        CHECK(conditional_survival(out.model, 9, 20) == 1.0);
        CHECK(conditional_survival(out.model, 11, 20) == 0.0);
    }

    TEST_CASE("rate multiplier inside a date range")
    {
        ModelInputs in;
        in.lambda_t = std::vector<double>(10, 2.0);
        in.model    = constant_model(LosFamily::Exponential, 4.0);
        const auto out = apply_scenario(in, {1.5, 1.0, 1.0, DayRange{3, 5}});
        for (std::size_t t = 0; t < 10; ++t) {
            CHECK(out.lambda_t[t] == ((t >= 3 && t <= 5) ? 3.0 : 2.0));
        }
    }

    TEST_CASE("multipliers compose")
    {
        const auto in = lognormal_inputs();
        const ScenarioSpec a{1.3, 0.8, 0.5, DayRange{5, 40}}, b{0.6, 1.1, 1.7, DayRange{5, 40}};
        const auto twice = apply_scenario(apply_scenario(in, a), b);
        const auto once  = apply_scenario(in, {1.3 * 0.6, 0.8 * 1.1, 0.5 * 1.7, DayRange{5, 40}});
        for (std::size_t t = 0; t < in.lambda_t.size(); ++t) {
            CHECK(twice.lambda_t[t] == doctest::Approx(once.lambda_t[t]).epsilon(1e-14));
            CHECK(twice.model.mu_t[t] == doctest::Approx(once.model.mu_t[t]).epsilon(1e-14));
            CHECK(twice.model.sigma2_t[t] == doctest::Approx(once.model.sigma2_t[t]).epsilon(1e-14));
        }
    }

    TEST_CASE("scaling arrivals scales occupancy")
    {
        const auto in   = lognormal_inputs();
        const auto base = expected_occupancy(in.lambda_t, in.model);
        const auto up   = apply_scenario(in, {1.7, 1.0, 1.0, {}});
        const auto occ  = expected_occupancy(up.lambda_t, up.model);
        for (std::size_t t = 0; t < base.rho.size(); ++t) {
            CHECK(occ.rho[t] == doctest::Approx(1.7 * base.rho[t]).epsilon(1e-12));
        }
    }

    TEST_CASE("longer stays widen the lag window")
    {
        CHECK(apply_scenario(lognormal_inputs(), {1.0, 1.5, 1.0, {}}).model.s_max == 120);
        CHECK(apply_scenario(lognormal_inputs(), {1.0, 0.5, 1.0, {}}).model.s_max == 80);
    }

    TEST_CASE("contract")
    {
        ModelInputs exp_in;
        exp_in.lambda_t = {1.0, 1.0};
        exp_in.model    = constant_model(LosFamily::Exponential, 4.0);
        CHECK_THROWS_AS(apply_scenario(exp_in, {1.0, 1.0, 0.5, {}}), Error);
        try {
            apply_scenario(exp_in, {1.0, 1.0, 0.5, {}});
        }
        catch (const Error& e) {
            CHECK(e.code() == ErrorCode::FamilyMismatch);
        }
        CHECK_THROWS_AS(apply_scenario(exp_in, {-1.0, 1.0, 1.0, {}}), Error);
        CHECK_THROWS_AS(apply_scenario(exp_in, {1.0, std::nan(""), 1.0, {}}), Error);
        CHECK_THROWS_AS(apply_scenario(exp_in, {1.0, 1.0, 1.0, DayRange{4, 2}}), Error);
    }

    TEST_CASE("strategy names")
    {
        for (auto s : {Strategy::Average, Strategy::Overflow05, Strategy::Overflow01, Strategy::Max}) {
            CHECK(parse_strategy(to_string(s)) == s);
        }
        CHECK_FALSE(parse_strategy("B_0.5"));
    }

    TEST_CASE("variance sensitivity baseline and signs")
    {
        const auto in                            = lognormal_inputs(365);
        const std::vector<double> betas          = {0.0, 0.5, 1.0, 1.8};
        const std::vector<Strategy> strategies   = {Strategy::Overflow05, Strategy::Overflow01, Strategy::Max};
        const auto cells                         = variance_sensitivity(in, betas, strategies);
        REQUIRE(cells.size() == betas.size() * strategies.size());
        for (const auto& c : cells) {
            CHECK(c.pct_change == doctest::Approx(100.0 * (c.beds - c.baseline_beds) / c.baseline_beds));
            if (c.beta == 1.0) {
                CHECK(c.pct_change == 0.0);
            }
        }
        CHECK_THROWS_AS(variance_sensitivity(ModelInputs{{1.0}, constant_model(LosFamily::Gamma, 3.0, 2.0)}, betas,
                                             strategies),
                        Error);
    }
}
