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
#include "bedcast/losfit.h"
#include "bedcast/stats.h"
#include "test_support.h"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace bedcast;

namespace
{

/// Integral of g over (0, inf) on a logarithmic grid, trapezoid in x = ln u.
template <class F>
double log_grid_integral(F g, double lo = 1e-8, double hi = 1e6, int steps = 200000)
{
    const double a = std::log(lo), b = std::log(hi), h = (b - a) / steps;
    double sum = 0.0;
    for (int i = 0; i <= steps; ++i) {
        const double u = std::exp(a + i * h);
        const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        sum += w * g(u) * u;
    }
    return sum * h;
}

double normal_upper(double z)
{
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

std::vector<double> weibull_draws(double kappa, double mean, std::size_t n, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::weibull_distribution<double> d(kappa, mean / std::tgamma(1.0 + 1.0 / kappa));
    std::vector<double> x(n);
    for (auto& v : x) {
        v = d(rng);
    }
    return x;
}

} // namespace

TEST_SUITE("losfit")
{
    TEST_CASE("family names")
    {
        for (auto f : kAllFamilies) {
            CHECK(parse_family(to_string(f)) == f);
        }
        CHECK_FALSE(parse_family("Pareto"));
        CHECK(parse_family("lognormal") == LosFamily::Lognormal);
        CHECK(parse_family("WEIBULL") == LosFamily::Weibull);
        CHECK(has_shape(LosFamily::Fisk));
        CHECK_FALSE(has_shape(LosFamily::Lognormal));
    }

    TEST_CASE("empirical survival curve")
    {
        const auto a = km_survival(std::vector<double>{1, 2, 3});
        REQUIRE(a.horizon() == 3);
        CHECK(a.prob[0] == 1.0);
        CHECK(a.prob[1] == doctest::Approx(2.0 / 3.0));
        CHECK(a.prob[2] == doctest::Approx(1.0 / 3.0));
        CHECK(a.prob[3] == 0.0);
        CHECK(a.at(50) == 0.0);

        const auto b = km_survival(std::vector<double>(6, 5.0));
        for (int u = 0; u < 5; ++u) {
            CHECK(b.at(u) == 1.0);
        }
        CHECK(b.at(5) == 0.0);

        CHECK(km_survival(std::vector<double>{2, 2, 4, 8}).at(2) == doctest::Approx(0.5));
        CHECK_THROWS_AS(km_survival(std::vector<double>{}), Error);
    }

    TEST_CASE("empirical survival is a counting function")
    {
        const auto x = weibull_draws(1.3, 9.0, 300, 8);
        const auto s = km_survival(x);
        for (std::size_t u = 0; u <= s.horizon(); ++u) {
            const auto above = std::count_if(x.begin(), x.end(), [&](double v) { return v > double(u); });
            CHECK(s.prob[u] == doctest::Approx(double(above) / x.size()).epsilon(1e-14));
            if (u > 0) {
                CHECK(s.prob[u] <= s.prob[u - 1]);
            }
        }
    }

    TEST_CASE("closed-form fits")
    {
        const auto e = mle_fit(LosFamily::Exponential, std::vector<double>{2, 4, 6});
        CHECK(e.scale == doctest::Approx(4.0));
        CHECK(e.mean() == doctest::Approx(4.0));
        const double eu = std::numbers::e;
        const auto l    = mle_fit(LosFamily::Lognormal, std::vector<double>{eu, eu, eu});
        CHECK(l.log_mean == doctest::Approx(1.0));
        CHECK(l.log_sd == doctest::Approx(0.0));
        CHECK_THROWS_AS(mle_fit(LosFamily::Exponential, std::vector<double>{}), Error);
        CHECK_THROWS_AS(mle_fit(LosFamily::Weibull, std::vector<double>{1, 2, 3}), Error);
    }

    TEST_CASE("iterative fits")
    {
        SUBCASE("weibull shape recovery")
        {
            const auto fit = mle_fit(LosFamily::Weibull, weibull_draws(1.34, 20.0, 5000, 42));
            CHECK(std::abs(fit.shape - 1.34) / 1.34 < 0.05);
            CHECK(fit.gradient_norm < kMleTolerance);
        }
        SUBCASE("gamma stationarity of the score")
        {
            std::mt19937_64 rng(7);
            std::gamma_distribution<double> d(2.5, 4.0);
            std::vector<double> x(3000);
            for (auto& v : x) {
                v = d(rng);
            }
            const auto fit = mle_fit(LosFamily::Gamma, x);
            // the gamma MLE satisfies shape * scale = sample mean exactly
            CHECK(fit.shape * fit.scale == doctest::Approx(mean(x)).epsilon(1e-6));
            CHECK(std::abs(fit.shape - 2.5) / 2.5 < 0.08);
        }
        SUBCASE("fisk recovery")
        {
            std::mt19937_64 rng(9);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<double> x(4000);
            for (auto& v : x) {
                const double p = u(rng);
                v              = 6.0 * std::pow(p / (1.0 - p), 1.0 / 3.0);
            }
            const auto fit = mle_fit(LosFamily::Fisk, x);
            CHECK(std::abs(fit.shape - 3.0) / 3.0 < 0.05);
            CHECK(std::abs(fit.scale - 6.0) / 6.0 < 0.05);
        }
        SUBCASE("log-likelihood is maximal at the fit")
        {
            const auto x   = weibull_draws(1.8, 10.0, 400, 5);
            const auto fit = mle_fit(LosFamily::Weibull, x);
            auto loglik    = [&](double k, double s) {
                double sum = 0.0;
                for (double v : x) {
                    sum += std::log(k / s) + (k - 1) * std::log(v / s) - std::pow(v / s, k);
                }
                return sum;
            };
            const double best = loglik(fit.shape, fit.scale);
            CHECK(best == doctest::Approx(fit.log_likelihood).epsilon(1e-9));
            for (double dk : {-0.01, 0.01}) {
                for (double ds : {-0.05, 0.0, 0.05}) {
                    CHECK(loglik(fit.shape + dk, fit.scale + ds) < best);
                }
            }
        }
    }

    TEST_CASE("shape stability")
    {
        std::vector<std::vector<double>> same(4, std::vector<double>(20, 5.0));
        CHECK(shape_stability(same, LosFamily::Weibull).kappa_cv == doctest::Approx(0.0));

        std::vector<std::vector<double>> fixed;
        for (int w = 0; w < 4; ++w) {
            fixed.push_back(weibull_draws(1.34, 20.0, 500, 100 + w));
        }
        CHECK(shape_stability(fixed, LosFamily::Weibull).kappa_cv < 0.2);

        std::vector<std::vector<double>> alternating;
        for (int w = 0; w < 4; ++w) {
            alternating.push_back(weibull_draws(w % 2 ? 3.0 : 1.0, 20.0, 500, 200 + w));
        }
        const auto alt = shape_stability(alternating, LosFamily::Weibull);
        double m = mean(alt.kappas);
        CHECK(alt.kappa_cv == doctest::Approx(population_sd(alt.kappas) / m));
        CHECK(alt.kappa_cv > 0.2);

        fixed.push_back({1.0, 2.0});
        CHECK(shape_stability(fixed, LosFamily::Weibull).skipped_windows == 1);
    }

    TEST_CASE("month grouping")
    {
        using bedcast::test::day;
        const std::vector<Date> dates = {day("2020-01-10"), day("2020-03-31"), day("2020-04-01"), day("2020-12-01")};
        const std::vector<double> los = {1, 2, 3, 4};
        const auto q = group_by_months(dates, los, 3);
        REQUIRE(q.size() == 4);
        CHECK(q[0] == std::vector<double>{1, 2});
        CHECK(q[1] == std::vector<double>{3});
        CHECK(q[3] == std::vector<double>{4});
        CHECK(group_by_months(dates, los, 12).size() == 1);
    }

    TEST_CASE("survival spot values")
    {
        CHECK(survival_probability(LosFamily::Exponential, {}, 10, 0, 10) == doctest::Approx(std::exp(-1.0)));
        const double theta = 10.0 / std::tgamma(1.5);
        CHECK(theta == doctest::Approx(11.28379).epsilon(1e-6));
        CHECK(survival_probability(LosFamily::Weibull, 2.0, 10, 0, 10) ==
              doctest::Approx(std::exp(-std::numbers::pi / 4)).epsilon(1e-12));
        CHECK(survival_probability(LosFamily::Gamma, 2.0, 10, 0, 10) == doctest::Approx(3 * std::exp(-2.0)));
        CHECK(survival_probability(LosFamily::Lognormal, {}, 10, 100, 10) ==
              doctest::Approx(normal_upper(std::sqrt(std::log(2.0)) / 2)).epsilon(1e-12));
        CHECK(survival_probability(LosFamily::Lognormal, {}, 10, 100, 10) == doctest::Approx(0.3386).epsilon(1e-3));
        CHECK(survival_probability(LosFamily::Fisk, std::numbers::pi, 10, 0, 10) ==
              doctest::Approx(std::pow(2.0, -std::numbers::pi)));
        for (auto f : kAllFamilies) {
            CHECK(survival_probability(f, 1.7, 8.0, 20.0, 0.0) == 1.0);
        }
        CHECK_THROWS_AS(survival_probability(LosFamily::Exponential, {}, 0.0, 0, 1), Error);
        CHECK_THROWS_AS(survival_probability(LosFamily::Weibull, {}, 5.0, 0, 1), Error);
    }

    TEST_CASE("deterministic lognormal step")
    {
        CHECK(survival_probability(LosFamily::Lognormal, {}, 10, 0, 9) == 1.0);
        CHECK(survival_probability(LosFamily::Lognormal, {}, 10, 0, 11) == 0.0);
    }

    TEST_CASE("survival is a non-increasing probability")
    {
        for (auto f : kAllFamilies) {
            double prev = 1.0;
            for (double u = 0; u <= 200; u += 0.5) {
                const double s = survival_probability(f, 1.34, 12.0, 90.0, u);
                CHECK(s >= 0.0);
                CHECK(s <= prev + 1e-15);
                prev = s;
            }
        }
    }

    TEST_CASE("mean consistency by quadrature")
    {
        struct Case {
            LosFamily family;
            std::optional<double> kappa;
            double mu, sigma2;
        };
        for (const Case& c : {Case{LosFamily::Exponential, {}, 12, 0}, Case{LosFamily::Weibull, 1.34, 20, 0},
                              Case{LosFamily::Weibull, 0.7, 9, 0}, Case{LosFamily::Gamma, 2.0, 10, 0},
                              Case{LosFamily::Gamma, 0.6, 15, 0}, Case{LosFamily::Lognormal, {}, 10, 100},
                              Case{LosFamily::Lognormal, {}, 25, 400}}) {
            const double m = log_grid_integral(
                [&](double u) { return survival_probability(c.family, c.kappa, c.mu, c.sigma2, u); });
            CHECK(std::abs(m - c.mu) / c.mu < 0.005);
        }
    }

    TEST_CASE("lognormal variance consistency by quadrature")
    {
        for (double s2 : {100.0, 400.0, 30.0}) {
            const double mu = 12.0;
            const double m2 = log_grid_integral(
                [&](double u) { return 2.0 * u * survival_probability(LosFamily::Lognormal, {}, mu, s2, u); });
            CHECK(std::abs((m2 - mu * mu) - s2) / s2 < 0.005);
        }
    }

    TEST_CASE("unit shape reduces to exponential")
    {
        for (double u = 0; u <= 100; u += 0.25) {
            const double e = survival_probability(LosFamily::Exponential, {}, 7.5, 0, u);
            CHECK(std::abs(survival_probability(LosFamily::Weibull, 1.0, 7.5, 0, u) - e) <= 1e-12);
            CHECK(std::abs(survival_probability(LosFamily::Gamma, 1.0, 7.5, 0, u) - e) <= 1e-12);
        }
    }

    TEST_CASE("conditional survival uses the admission day's parameters")
    {
        LosModel m = constant_model(LosFamily::Lognormal, 10.0, {}, 50.0);
        m.mu_t     = {5.0, 10.0, 20.0};
        m.sigma2_t = {10.0, 50.0, 200.0};
        CHECK(conditional_survival(m, 3, 2) == survival_probability(LosFamily::Lognormal, {}, 20.0, 200.0, 3));
        CHECK(conditional_survival(m, 3, -4) == survival_probability(LosFamily::Lognormal, {}, 5.0, 10.0, 3));
        CHECK(m.mu_at(99) == 20.0);
    }

    TEST_CASE("distribution selection")
    {
        const auto x   = weibull_draws(1.0, 12.0, 2000, 77);
        const auto sel = select_distribution(x, {12.0}, {144.0});
        REQUIRE(sel.candidates.size() == kAllFamilies.size());
        double best = 1e300;
        for (const auto& c : sel.candidates) {
            REQUIRE(c.fit);
            CHECK(c.rmse == doctest::Approx(survival_rmse(c.curve, sel.empirical)).epsilon(1e-14));
            best = std::min(best, c.rmse);
        }
        CHECK(sel.model.rmse == best);
        CHECK(sel.model.s_max >= 1);
        CHECK(sel.model.kappa.has_value() == has_shape(sel.model.family));
    }

    TEST_CASE("selection under degenerate samples")
    {
        const auto sel = select_distribution(std::vector<double>(50, 4.0), {4.0}, {1.0});
        CHECK(sel.candidates.size() == kAllFamilies.size());
        CHECK(sel.model.rmse >= 0.0);
    }

    TEST_CASE("survival rmse by hand")
    {
        SurvivalCurve e{{1.0, 0.5, 0.0}};
        const std::vector<double> f = {1.0, 0.6, 0.1};
        CHECK(survival_rmse(f, e) == doctest::Approx(std::sqrt(0.02 / 3.0)));
    }
}
