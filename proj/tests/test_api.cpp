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
#include "bedcast/api.h"
#include "test_support.h"

#include <doctest.h>

#include <json.hpp>

#include <memory>

using namespace bedcast;
using json = nlohmann::json;

namespace
{

ProjectionConfig projection_defaults()
{
    ProjectionConfig c;
    c.y_min       = 2024;
    c.y_max       = 2025;
    c.y_ref_omega = {2021, 2022};
    c.y_ref_nu    = {2020, 2021, 2022};
    c.births      = {{2024, 19337}, {2025, 19800}};
    c.runs        = 4;
    c.seed        = 5;
    return c;
}

ApiService& service()
{
    static ApiService s(std::make_shared<const ModelSnapshot>(test::two_site_snapshot()), projection_defaults());
    return s;
}

json call(const std::string& method, const std::string& path, const std::string& body, int expected_status)
{
    const auto r = service().handle({method, path, body});
    CHECK_MESSAGE(r.status == expected_status, method << " " << path << " -> " << r.body);
    return r.body.empty() ? json() : json::parse(r.body);
}

} // namespace

TEST_SUITE("api")
{
    TEST_CASE("health and site listing")
    {
        const auto& snap = test::two_site_snapshot();
        CHECK(call("GET", "/healthz", "", 200)["snapshot"] == snap.id);
        const auto sites = call("GET", "/sites", "", 200);
        REQUIRE(sites["sites"].size() == 2);
        CHECK(sites["sites"][0]["site_id"] == "A");
        CHECK(sites["sites"][0]["capacity"] == 20);
        CHECK(sites["sites"][1]["capacity"].is_null());
        CHECK(sites["sites"][0]["plan"]["b_average"] == snap.sites[0].plan.b_average);
    }

    TEST_CASE("occupancy series")
    {
        const auto& a = test::two_site_snapshot().sites[0];
        const auto o  = call("GET", "/sites/A/occupancy", "", 200);
        CHECK(o["dates"].size() == a.occupancy.rho.size());
        CHECK(o["dates"][0] == "2020-01-01");
        CHECK(o["rho"].get<std::vector<double>>() == a.occupancy.rho);
        CHECK(o["census"].size() == a.occupancy.rho.size());
    }

    TEST_CASE("plan endpoint agrees with the library")
    {
        const auto& a = test::two_site_snapshot().sites[0];
        const auto p  = call("POST", "/sites/A/plan", R"({"gamma": 0.9, "alpha": 0.01})", 200);
        CHECK(p["beds"] == b_overflow(a.occupancy, 0.9, 0.01));
        CHECK(call("POST", "/sites/A/plan", "", 200)["beds"] == a.plan.b_overflow.at({1.0, 0.05}));
        call("POST", "/sites/A/plan", R"({"alpha": 1.5})", 400);
        call("POST", "/sites/A/plan", R"({"alpha": "x"})", 400);
        call("POST", "/sites/A/plan", R"({"beds": 3})", 400);
        call("POST", "/sites/A/plan", "{oops", 400);
    }

    TEST_CASE("scenario endpoint")
    {
        const auto unit = call("POST", "/sites/A/scenario", "{}", 200);
        REQUIRE(unit["strategies"].size() == 4);
        for (const auto& row : unit["strategies"]) {
            CHECK(row["baseline"] == row["scenario"]);
            CHECK(row["pct_change"] == 0.0);
        }
        const auto up = call("POST", "/sites/A/scenario",
                             R"({"beta_lambda": 1.3, "strategies": ["B_max"],
                                 "date_range": {"start": "2021-12-01", "end": "2022-02-28"}})",
                             200);
        REQUIRE(up["strategies"].size() == 1);
        CHECK(up["strategies"][0]["scenario"] >= up["strategies"][0]["baseline"]);
        const auto delta = up["rho_delta"].get<std::vector<double>>();
        CHECK(delta.front() == 0.0);

        for (const auto& site : test::two_site_snapshot().sites) {
            const int status = site.model.family == LosFamily::Lognormal ? 200 : 422;
            call("POST", "/sites/" + site.site_id + "/scenario", R"({"beta_sigma2": 0.5})", status);
        }
        call("POST", "/sites/A/scenario", R"({"beta_lambda": 0})", 400);
        call("POST", "/sites/A/scenario", R"({"date_range": {"start": "2030-01-01", "end": "2030-02-01"}})", 400);
    }

    TEST_CASE("synchronous projection")
    {
        const auto r = call("POST", "/project", R"({"runs": 3})", 200);
        CHECK(r["rows"].size() == 4);
        const auto again = service().handle({"POST", "/project", R"({"runs": 3})"});
        CHECK(again.body == r.dump());
        call("POST", "/project", R"({"years": [2024, 2026]})", 422);
        call("POST", "/project", R"({"runs": 0})", 400);
    }

    TEST_CASE("large projections become jobs")
    {
        const auto accepted = call("POST", "/project", R"({"runs": 51})", 202);
        const std::string id = accepted["job_id"];
        service().wait_for_jobs();
        const auto done = call("GET", "/jobs/" + id, "", 200);
        CHECK(done["status"] == "done");
        CHECK(done["result"]["rows"].size() == 4);
        call("GET", "/jobs/job-999", "", 404);
    }

    TEST_CASE("routing")
    {
        call("GET", "/sites/Z/occupancy", "", 404);
        call("GET", "/nowhere", "", 404);
        call("POST", "/sites", "", 405);
        call("GET", "/sites/A/plan", "", 405);
        const auto err = call("GET", "/sites/Z/occupancy", "", 404);
        CHECK(err["error"] == "NotFound");
        CHECK(service().handle({"OPTIONS", "/sites", ""}).status == 204);
    }
}
