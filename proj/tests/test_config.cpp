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
#include "bedcast/config.h"
#include "bedcast/error.h"
#include "test_support.h"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace bedcast;
using bedcast::test::day;

namespace
{

std::string schema_message(const std::string& text)
{
    try {
        parse_config(text);
    }
    catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
        return e.what();
    }
    FAIL("expected a schema error for " << text);
    return {};
}

} // namespace

TEST_SUITE("config")
{
    TEST_CASE("empty config gives the defaults")
    {
        for (const char* text : {"", "{}"}) {
            const auto c = parse_config(text);
            CHECK(c.pipeline.gamma == 1.0);
            CHECK(c.pipeline.alphas == std::vector<double>{0.05, 0.01});
            CHECK(c.pipeline.mode == OverflowMode::Averaged);
            CHECK(c.pipeline.warm_up == WarmUp::BackFill);
            CHECK(c.projection.eta == 1.0);
            CHECK(c.projection.psi == 1.0);
            CHECK(c.projection.runs == 300);
            CHECK(c.simulation.replications == 1000);
            CHECK_FALSE(c.input);
        }
    }

    TEST_CASE("overrides")
    {
        const auto c = parse_config(R"({
            "input": "a.csv", "gamma": 0.85, "alphas": [0.1], "overflow_mode": "per_day_max",
            "warm_up": "truncate", "capacities": {"S1": 27}, "R": 50, "seed": 7,
            "window": {"start": "2020-01-01", "end": "2020-12-31"},
            "scenario": {"beta_sigma2": 0, "date_range": {"start": "2020-12-01", "end": "2021-02-28"}},
            "projection": {"years": [2024, 2030], "births": {"2024": 19337}, "eta": 0.5}
        })");
        CHECK(*c.input == "a.csv");
        CHECK(c.pipeline.gamma == 0.85);
        CHECK(c.projection.gamma == 0.85);
        CHECK(c.projection.alphas == std::vector<double>{0.1});
        CHECK(c.projection.mode == OverflowMode::PerDayMax);
        CHECK(c.pipeline.warm_up == WarmUp::Truncate);
        CHECK(c.capacities.at("S1") == 27);
        CHECK(c.projection.runs == 50);
        CHECK(c.projection.seed == 7);
        CHECK(c.projection.y_min == 2024);
        CHECK(c.projection.y_max == 2030);
        CHECK(c.projection.births.at(2024) == 19337.0);
        CHECK(c.projection.eta == 0.5);
        CHECK(c.scenario.beta_sigma2 == 0.0);
        CHECK(c.pipeline.window->first == day("2020-01-01"));
    }

    TEST_CASE("schema errors name the offending key")
    {
        CHECK(schema_message(R"({"alpha": 1.5})").find("SchemaError: /alpha:") == 0);
        CHECK(schema_message(R"({"gamma": 0})").find("SchemaError: /gamma:") == 0);
        CHECK(schema_message(R"({"bogus": 1})").find("bogus") != std::string::npos);
        CHECK(schema_message(R"({"projection": {"runs": 0}})").find("SchemaError: /projection/runs:") == 0);
        CHECK(schema_message(R"({"alphas": [0.05, 2]})").find("SchemaError: /alphas/1:") == 0);
        CHECK(schema_message(R"({"scenario": {"beta_mu": -1}})").find("SchemaError: /scenario/beta_mu:") == 0);
        CHECK(schema_message(R"({"window": {"start": "2020-02-30", "end": "2020-03-01"}})").find("SchemaError: /window/start:") == 0);
        CHECK(schema_message("{not json").find("SchemaError: /:") == 0);
        CHECK(schema_message("[]").find("SchemaError: /:") == 0);
    }

    TEST_CASE("scenario date range maps onto day indices")
    {
        ScenarioSettings s;
        s.beta_lambda = 1.2;
        s.date_range  = DateWindow{day("2020-01-10"), day("2020-01-20")};
        const auto spec = s.spec_for(day("2020-01-01"), 15);
        REQUIRE(spec.date_range);
        CHECK(spec.date_range->first == 9);
        CHECK(spec.date_range->last == 14);
        CHECK(spec.beta_lambda == 1.2);
        CHECK_THROWS_AS(s.spec_for(day("2021-01-01"), 15), Error);
        CHECK_FALSE(ScenarioSettings{}.spec_for(day("2020-01-01"), 15).date_range);
    }

    TEST_CASE("load from disk")
    {
        const auto path = std::filesystem::temp_directory_path() / "bedcast_config_test.json";
        {
            std::ofstream out(path);
            out << R"({"runs": 12})";
        }
        CHECK(load_config(path.string()).projection.runs == 12);
        std::filesystem::remove(path);
        try {
            load_config(path.string());
            FAIL("expected IoError");
        }
        catch (const Error& e) {
            CHECK(e.code() == ErrorCode::IoError);
        }
    }
}
