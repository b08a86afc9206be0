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
#include "bedcast/pipeline.h"
#include "bedcast/stats.h"
#include "test_support.h"

#include <doctest.h>

#include <cmath>

using namespace bedcast;
using namespace bedcast::test;

TEST_SUITE("pipeline")
{
    TEST_CASE("site fit wiring")
    {
        const auto fit = fit_site(two_site_records(), "A", two_site_options());
        REQUIRE(fit.series.size() == 1096);
        std::vector<double> counts(fit.series.admit_count.begin(), fit.series.admit_count.end());
        CHECK(fit.lambda_bar == doctest::Approx(mean(counts)));
        CHECK(fit.sample_mean == doctest::Approx(mean(fit.los_samples)));
        CHECK(fit.plan.b_average == b_average(fit.lambda_bar, fit.sample_mean));
        CHECK(fit.lambda_t == clamp_positive(fit.arrivals.decomposition.trend));
        CHECK(fit.model.mu_t == clamp_positive(fit.los.decomposition.trend));
        CHECK(fit.variance.sigma2 == rolling_variance(fit.los.decomposition.residual).sigma2);

        const auto occ = expected_occupancy(fit.lambda_t, fit.model);
        CHECK(occ.rho == fit.occupancy.rho);
        for (std::size_t t = 0; t < occ.rho.size(); ++t) {
            CHECK(std::abs(fit.occupancy.delta[t] + fit.occupancy.rho_bar - fit.occupancy.rho[t]) <= 1e-12 * std::max(1.0, fit.occupancy.rho[t]));
        }
        CHECK(fit.plan.b_overflow.at({1.0, 0.01}) >= fit.plan.b_overflow.at({1.0, 0.05}));
        // the occupancy level should match the raw arrival rate times mean stay up to discretisation
        CHECK(std::abs(mean(fit.occupancy.rho) - fit.lambda_bar * fit.sample_mean) < 0.15 * fit.lambda_bar * fit.sample_mean);
    }

    TEST_CASE("kappa stability is zero without a shape")
    {
        const DateWindow w{day("2020-01-01"), day("2022-12-31")};
        CHECK(site_kappa_cv(two_site_records(), "A", w, LosFamily::Exponential) == 0.0);
        CHECK(site_kappa_cv(two_site_records(), "A", w, LosFamily::Weibull) >= 0.0);
    }

    TEST_CASE("snapshot identity and round trip")
    {
        const auto& snap = two_site_snapshot();
        REQUIRE(snap.sites.size() == 2);
        CHECK(snap.id.size() == 16);
        CHECK(snap.find("A")->capacity == 20);
        CHECK_FALSE(snap.find("B")->capacity);
        CHECK(snap.find("C") == nullptr);

        const auto text = snapshot_to_json(snap);
        const auto back = snapshot_from_json(text);
        CHECK(back.id == snap.id);
        CHECK(back.created == snap.created);
        CHECK(snapshot_to_json(back) == text);
        CHECK(back.sites[1].occupancy.rho == snap.sites[1].occupancy.rho);
        CHECK(back.sites[1].plan.b_overflow == snap.sites[1].plan.b_overflow);

        auto changed = two_site_records();
        changed.pop_back();
        const auto other = build_snapshot(changed, two_site_options());
        CHECK(other.id != snap.id);
        CHECK(other.source_checksum != snap.source_checksum);

        CHECK_THROWS_AS(snapshot_from_json("{}"), Error);
        CHECK_THROWS_AS(snapshot_from_json("nope"), Error);
    }

    TEST_CASE("fnv1a reference values")
    {
        CHECK(fnv1a_hex("") == "cbf29ce484222325");
        CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
    }

    TEST_CASE("snapshot history for projection")
    {
        const auto h = two_site_snapshot().history();
        REQUIRE(h.size() == 2);
        CHECK(h[0].annual_admissions(2021).has_value());
        CHECK_FALSE(h[0].annual_admissions(2023).has_value());
    }

    TEST_CASE("scenario on a snapshot site")
    {
        const auto& snap = two_site_snapshot();
        const auto& a    = *snap.find("A");
        const auto unit  = run_scenario(a, {}, snap.options);
        CHECK(unit.plan.b_average == a.plan.b_average);
        CHECK(unit.plan.b_max == a.plan.b_max);
        CHECK(unit.plan.b_overflow == a.plan.b_overflow);
        CHECK(unit.occupancy.rho == a.occupancy.rho);

        const auto up = run_scenario(a, {1.5, 1.0, 1.0, {}}, snap.options);
        for (std::size_t t = 0; t < up.occupancy.rho.size(); ++t) {
            CHECK(up.occupancy.rho[t] == doctest::Approx(1.5 * a.occupancy.rho[t]).epsilon(1e-12));
        }
        CHECK(up.plan.b_max >= a.plan.b_max);
        CHECK(up.plan.b_average >= a.plan.b_average);

        for (const auto& site : snap.sites) {
            if (site.model.family != LosFamily::Lognormal) {
                CHECK_THROWS_AS(run_scenario(site, {1.0, 1.0, 0.5, {}}, snap.options), Error);
            }
            else {
                CHECK_NOTHROW(run_scenario(site, {1.0, 1.0, 0.5, {}}, snap.options));
            }
        }
    }
}
