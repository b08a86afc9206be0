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
#include "bedcast/losfit.h"
#include "bedcast/error.h"
#include "bedcast/stats.h"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <ostream>

namespace bedcast
{

namespace
{

constexpr double kMaxShape = 1e3;
constexpr double kMinShape = 1e-3;

double normal_sf(double z)
{
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

double normal_quantile(double p)
{
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

std::vector<double> prepared(std::span<const double> samples)
{
    if (samples.empty()) {
        throw Error(ErrorCode::EmptySample, "no LOS samples");
    }
    std::vector<double> x(samples.begin(), samples.end());
    for (auto& v : x) {
        v = std::max(v, kMinFitLos);
    }
    return x;
}

bool all_equal(const std::vector<double>& x)
{
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

void require_iterative_size(LosFamily family, std::size_t n)
{
    if (n < kMinIterativeSamples) {
        throw Error(ErrorCode::TooFewSamples, std::string(to_string(family)) + " fit needs at least " +
                                                  std::to_string(kMinIterativeSamples) + " samples, got " +
                                                  std::to_string(n));
    }
}

void throw_non_convergence(LosFamily family, double gradient_norm)
{
    throw Error(ErrorCode::NonConvergence, std::string(to_string(family)) + " MLE did not converge, gradient norm " +
                                               std::to_string(gradient_norm));
}

FittedDistribution fit_exponential(const std::vector<double>& x)
{
    FittedDistribution f;
    f.family           = LosFamily::Exponential;
    f.scale            = mean(x);
    f.log_likelihood   = -static_cast<double>(x.size()) * (std::log(f.scale) + 1.0);
    return f;
}

FittedDistribution fit_lognormal(const std::vector<double>& x)
{
    std::vector<double> logs(x.size());
    std::transform(x.begin(), x.end(), logs.begin(), [](double v) { return std::log(v); });
    FittedDistribution f;
    f.family   = LosFamily::Lognormal;
    f.log_mean = mean(logs);
    f.log_sd   = population_sd(logs);
    double ll  = 0.0;
    if (f.log_sd > 0.0) {
        for (double l : logs) {
            const double z = (l - f.log_mean) / f.log_sd;
            ll += -l - std::log(f.log_sd) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * z * z;
        }
    }
    f.log_likelihood = ll;
    f.degenerate     = f.log_sd == 0.0;
    return f;
}

FittedDistribution fit_weibull(const std::vector<double>& x)
{
    require_iterative_size(LosFamily::Weibull, x.size());
    FittedDistribution f;
    f.family = LosFamily::Weibull;
    if (all_equal(x)) {
        f.shape      = kMaxShape;
        f.scale      = x.front();
        f.degenerate = true;
        return f;
    }
    // Work on samples rescaled by their maximum so that y^k stays bounded.
    const double ref = *std::max_element(x.begin(), x.end());
    std::vector<double> ly(x.size());
    std::transform(x.begin(), x.end(), ly.begin(), [&](double v) { return std::log(v / ref); });
    const double mean_log = mean(ly);

    // Profile score in the shape; increasing in k, negative at 0+, positive at infinity.
    auto score = [&](double k, double& derivative) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (double l : ly) {
            const double p = std::exp(k * l);
            s0 += p;
            s1 += p * l;
            s2 += p * l * l;
        }
        const double a = s1 / s0;
        derivative     = s2 / s0 - a * a + 1.0 / (k * k);
        return a - 1.0 / k - mean_log;
    };

    double lo = kMinShape, hi = 1.0, d = 0.0;
    while (score(hi, d) < 0.0 && hi < kMaxShape) {
        hi *= 2.0;
    }
    double k       = std::clamp(1.2825 / std::max(population_sd(ly), 1e-12), lo, hi);
    double g       = score(k, d);
    int iterations = 0;
    for (; iterations < kMleMaxIterations && std::abs(g) >= kMleTolerance; ++iterations) {
        if (g < 0.0) {
            lo = k;
        }
        else {
            hi = k;
        }
        double next = k - g / d;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        k = next;
        g = score(k, d);
    }
    double s0 = 0.0;
    for (double l : ly) {
        s0 += std::exp(k * l);
    }
    const double n = static_cast<double>(x.size());
    f.shape        = k;
    f.scale        = ref * std::pow(s0 / n, 1.0 / k);
    f.iterations   = iterations;
    f.gradient_norm = std::abs(g);
    double ll      = 0.0;
    for (double v : x) {
        const double z = v / f.scale;
        ll += std::log(k / f.scale) + (k - 1.0) * std::log(z) - std::pow(z, k);
    }
    f.log_likelihood = ll;
    if (f.gradient_norm >= kMleTolerance) {
        throw_non_convergence(LosFamily::Weibull, f.gradient_norm);
    }
    return f;
}

FittedDistribution fit_gamma(const std::vector<double>& x)
{
    require_iterative_size(LosFamily::Gamma, x.size());
    FittedDistribution f;
    f.family = LosFamily::Gamma;
    const double m = mean(x);
    if (all_equal(x)) {
        f.shape      = kMaxShape;
        f.scale      = m / kMaxShape;
        f.degenerate = true;
        return f;
    }
    double mean_log = 0.0;
    for (double v : x) {
        mean_log += std::log(v);
    }
    mean_log /= static_cast<double>(x.size());
    const double s = std::log(m) - mean_log;

    // ln k - digamma(k) = s is decreasing in k.
    double k       = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
    k              = std::clamp(k, kMinShape, kMaxShape);
    double g       = std::log(k) - boost::math::digamma(k) - s;
    int iterations = 0;
    for (; iterations < kMleMaxIterations && std::abs(g) >= kMleTolerance; ++iterations) {
        const double dg = 1.0 / k - boost::math::trigamma(k);
        double next     = k - g / dg;
        if (!(next > 0.0)) {
            next = 0.5 * k;
        }
        k = std::min(next, kMaxShape);
        g = std::log(k) - boost::math::digamma(k) - s;
    }
    f.shape         = k;
    f.scale         = m / k;
    f.iterations    = iterations;
    f.gradient_norm = std::abs(g);
    double ll       = 0.0;
    for (double v : x) {
        ll += (k - 1.0) * std::log(v) - v / f.scale - k * std::log(f.scale) - std::lgamma(k);
    }
    f.log_likelihood = ll;
    if (f.gradient_norm >= kMleTolerance) {
        throw_non_convergence(LosFamily::Gamma, f.gradient_norm);
    }
    return f;
}

/// Log-logistic fit through the logistic distribution of log-LOS with location m and scale s.
FittedDistribution fit_fisk(const std::vector<double>& x)
{
    require_iterative_size(LosFamily::Fisk, x.size());
    FittedDistribution f;
    f.family = LosFamily::Fisk;
    if (all_equal(x)) {
        f.shape      = kMaxShape;
        f.scale      = x.front();
        f.degenerate = true;
        return f;
    }
    std::vector<double> y(x.size());
    std::transform(x.begin(), x.end(), y.begin(), [](double v) { return std::log(v); });
    const double n = static_cast<double>(y.size());

    auto loglik = [&](double m, double s) {
        double ll = 0.0;
        for (double yi : y) {
            const double z = (yi - m) / s;
            // -z - 2 ln(1 + e^-z), written stably for either sign of z.
            const double az = std::abs(z);
            ll += -az - 2.0 * std::log1p(std::exp(-az)) - std::log(s);
        }
        return ll / n;
    };

    struct Derivatives {
        double gm, gs, hmm, hms, hss;
    };
    auto derivatives = [&](double m, double s) {
        Derivatives d{0, 0, 0, 0, 0};
        for (double yi : y) {
            const double z  = (yi - m) / s;
            const double fz = 1.0 / (1.0 + std::exp(-z));
            const double a  = 2.0 * fz - 1.0;
            const double b  = 2.0 * fz * (1.0 - fz);
            d.gm += a / s;
            d.gs += (z * a - 1.0) / s;
            d.hmm += -b / (s * s);
            d.hms += -(a + b * z) / (s * s);
            d.hss += -(z * a - 1.0) / (s * s) - (z * a + b * z * z) / (s * s);
        }
        d.gm /= n;
        d.gs /= n;
        d.hmm /= n;
        d.hms /= n;
        d.hss /= n;
        return d;
    };

    double m = median(y);
    double s = std::max(population_sd(y) * std::numbers::sqrt3 / std::numbers::pi, 1e-6);
    // Gradient reported in (m, ln s) coordinates so it is free of units.
    auto grad_norm = [&](const Derivatives& d) { return std::hypot(d.gm, d.gs * s); };

    auto d         = derivatives(m, s);
    int iterations = 0;
    for (; iterations < kMleMaxIterations && grad_norm(d) >= kMleTolerance; ++iterations) {
        const double det = d.hmm * d.hss - d.hms * d.hms;
        double dm = 0.0, ds = 0.0;
        if (det > 0.0 && d.hmm < 0.0) {
            dm = -(d.hss * d.gm - d.hms * d.gs) / det;
            ds = -(-d.hms * d.gm + d.hmm * d.gs) / det;
        }
        else {
            // Not locally concave: take a scaled gradient step instead.
            dm = d.gm * s * s;
            ds = d.gs * s * s;
        }
        const double current = loglik(m, s);
        double step          = 1.0;
        while (step > 1e-10) {
            const double nm = m + step * dm;
            const double ns = s + step * ds;
            if (ns > 0.0 && loglik(nm, ns) >= current - 1e-15) {
                m = nm;
                s = ns;
                break;
            }
            step *= 0.5;
        }
        d = derivatives(m, s);
        if (step <= 1e-10) {
            break;
        }
    }
    f.shape          = 1.0 / s;
    f.scale          = std::exp(m);
    f.iterations     = iterations;
    f.gradient_norm  = grad_norm(d);
    f.log_likelihood = n * loglik(m, s);
    if (f.gradient_norm >= kMleTolerance) {
        throw_non_convergence(LosFamily::Fisk, f.gradient_norm);
    }
    return f;
}

} // namespace

std::string_view to_string(LosFamily family)
{
    switch (family) {
    case LosFamily::Exponential:
        return "Exponential";
    case LosFamily::Weibull:
        return "Weibull";
    case LosFamily::Lognormal:
        return "Lognormal";
    case LosFamily::Gamma:
        return "Gamma";
    case LosFamily::Fisk:
        return "Fisk";
    }
    return "Unknown";
}

std::optional<LosFamily> parse_family(std::string_view name)
{
    auto lower = [](unsigned char c) { return std::tolower(c); };
    for (auto f : kAllFamilies) {
        const std::string canonical(to_string(f));
        if (std::ranges::equal(canonical, name, {}, lower, lower)) {
            return f;
        }
    }
    return std::nullopt;
}

bool has_shape(LosFamily family)
{
    return family == LosFamily::Weibull || family == LosFamily::Gamma || family == LosFamily::Fisk;
}

double SurvivalCurve::at(int u) const
{
    if (u < 0) {
        return 1.0;
    }
    const auto k = static_cast<std::size_t>(u);
    return k < prob.size() ? prob[k] : 0.0;
}

SurvivalCurve km_survival(std::span<const double> los_samples)
{
    if (los_samples.empty()) {
        throw Error(ErrorCode::EmptySample, "no LOS samples");
    }
    std::vector<double> sorted(los_samples.begin(), los_samples.end());
    std::sort(sorted.begin(), sorted.end());
    if (sorted.front() < 0.0) {
        throw Error(ErrorCode::InvalidArgument, "negative LOS sample");
    }
    const auto horizon = static_cast<std::size_t>(std::ceil(sorted.back()));
    const double n     = static_cast<double>(sorted.size());
    SurvivalCurve curve;
    curve.prob.resize(horizon + 1);
    for (std::size_t u = 0; u <= horizon; ++u) {
        const auto not_greater = std::upper_bound(sorted.begin(), sorted.end(), static_cast<double>(u)) - sorted.begin();
        curve.prob[u]          = (n - static_cast<double>(not_greater)) / n;
    }
    return curve;
}

double FittedDistribution::survival(double u) const
{
    if (u <= 0.0) {
        return 1.0;
    }
    switch (family) {
    case LosFamily::Exponential:
        return std::exp(-u / scale);
    case LosFamily::Weibull:
        return std::exp(-std::pow(u / scale, shape));
    case LosFamily::Lognormal:
        if (log_sd <= 0.0) {
            return u < std::exp(log_mean) ? 1.0 : 0.0;
        }
        return normal_sf((std::log(u) - log_mean) / log_sd);
    case LosFamily::Gamma:
        return boost::math::gamma_q(shape, u / scale);
    case LosFamily::Fisk:
        return 1.0 / (1.0 + std::pow(u / scale, shape));
    }
    return 0.0;
}

double FittedDistribution::quantile(double p) const
{
    switch (family) {
    case LosFamily::Exponential:
        return -scale * std::log1p(-p);
    case LosFamily::Weibull:
        return scale * std::pow(-std::log1p(-p), 1.0 / shape);
    case LosFamily::Lognormal:
        return std::exp(log_mean + log_sd * normal_quantile(p));
    case LosFamily::Gamma:
        return scale * boost::math::gamma_p_inv(shape, p);
    case LosFamily::Fisk:
        return scale * std::pow(p / (1.0 - p), 1.0 / shape);
    }
    return 0.0;
}

double FittedDistribution::mean() const
{
    switch (family) {
    case LosFamily::Exponential:
        return scale;
    case LosFamily::Weibull:
        return scale * std::tgamma(1.0 + 1.0 / shape);
    case LosFamily::Lognormal:
        return std::exp(log_mean + 0.5 * log_sd * log_sd);
    case LosFamily::Gamma:
        return shape * scale;
    case LosFamily::Fisk:
        if (shape <= 1.0) {
            return std::numeric_limits<double>::infinity();
        }
        return scale * (std::numbers::pi / shape) / std::sin(std::numbers::pi / shape);
    }
    return 0.0;
}

FittedDistribution mle_fit(LosFamily family, std::span<const double> samples)
{
    const auto x = prepared(samples);
    switch (family) {
    case LosFamily::Exponential:
        return fit_exponential(x);
    case LosFamily::Lognormal:
        return fit_lognormal(x);
    case LosFamily::Weibull:
        return fit_weibull(x);
    case LosFamily::Gamma:
        return fit_gamma(x);
    case LosFamily::Fisk:
        return fit_fisk(x);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown family");
}

ShapeStability shape_stability(const std::vector<std::vector<double>>& samples_by_window, LosFamily family)
{
    ShapeStability out;
    if (!has_shape(family)) {
        return out;
    }
    for (const auto& window : samples_by_window) {
        if (window.size() < kMinIterativeSamples) {
            ++out.skipped_windows;
            continue;
        }
        out.kappas.push_back(mle_fit(family, window).shape);
    }
    if (out.kappas.size() >= 2) {
        const double m = mean(out.kappas);
        out.kappa_cv   = m > 0.0 ? population_sd(out.kappas) / m : 0.0;
    }
    return out;
}

std::vector<std::vector<double>> group_by_months(std::span<const Date> admit_dates, std::span<const double> los,
                                                 int months)
{
    if (admit_dates.size() != los.size()) {
        throw Error(ErrorCode::InvalidArgument, "dates and LOS samples differ in length");
    }
    if (admit_dates.empty()) {
        return {};
    }
    if (months <= 0) {
        throw Error(ErrorCode::InvalidArgument, "window length in months must be positive");
    }
    auto block_of = [&](Date d) {
        const std::chrono::year_month_day ymd{d};
        const int index = static_cast<int>(ymd.year()) * 12 + static_cast<int>(static_cast<unsigned>(ymd.month())) - 1;
        return index / months;
    };
    const auto [lo, hi] = std::minmax_element(admit_dates.begin(), admit_dates.end());
    const int first     = block_of(*lo);
    std::vector<std::vector<double>> windows(static_cast<std::size_t>(block_of(*hi) - first + 1));
    for (std::size_t i = 0; i < los.size(); ++i) {
        windows[static_cast<std::size_t>(block_of(admit_dates[i]) - first)].push_back(los[i]);
    }
    return windows;
}

double LosModel::mu_at(long day) const
{
    if (mu_t.empty()) {
        throw Error(ErrorCode::CoverageError, "empty mean LOS track");
    }
    const long last = static_cast<long>(mu_t.size()) - 1;
    return mu_t[static_cast<std::size_t>(std::clamp(day, 0L, last))];
}

double LosModel::sigma2_at(long day) const
{
    if (sigma2_t.empty()) {
        return 0.0;
    }
    const long last = static_cast<long>(sigma2_t.size()) - 1;
    return sigma2_t[static_cast<std::size_t>(std::clamp(day, 0L, last))];
}

LosModel constant_model(LosFamily family, double mu, std::optional<double> kappa, double sigma2, int s_max)
{
    LosModel model;
    model.family   = family;
    model.kappa    = kappa;
    model.mu_t     = {mu};
    model.sigma2_t = {sigma2};
    model.s_max    = s_max;
    return model;
}

double survival_probability(LosFamily family, std::optional<double> kappa, double mu, double sigma2, double u)
{
    if (!(mu > 0.0)) {
        throw Error(ErrorCode::DomainError, "mean LOS must be positive, got " + std::to_string(mu));
    }
    if (has_shape(family) && !(kappa && *kappa > 0.0)) {
        throw Error(ErrorCode::DomainError, std::string(to_string(family)) + " requires a positive shape");
    }
    if (u <= 0.0) {
        return 1.0;
    }
    switch (family) {
    case LosFamily::Exponential:
        return std::exp(-u / mu);
    case LosFamily::Weibull: {
        const double theta = mu / std::tgamma(1.0 + 1.0 / *kappa);
        return std::exp(-std::pow(u / theta, *kappa));
    }
    case LosFamily::Lognormal: {
        if (sigma2 <= 0.0) {
            return u < mu ? 1.0 : 0.0;
        }
        const double tau2 = std::log1p(sigma2 / (mu * mu));
        const double loc  = std::log(mu) - 0.5 * tau2;
        return normal_sf((std::log(u) - loc) / std::sqrt(tau2));
    }
    case LosFamily::Gamma:
        return boost::math::gamma_q(*kappa, u / (mu / *kappa));
    case LosFamily::Fisk: {
        const double theta = mu * *kappa / std::numbers::pi;
        return std::pow(theta / (u + theta), *kappa);
    }
    }
    return 0.0;
}

double conditional_survival(const LosModel& model, int u, long admit_day)
{
    if (u < 0) {
        throw Error(ErrorCode::DomainError, "negative elapsed time");
    }
    return survival_probability(model.family, model.kappa, model.mu_at(admit_day), model.sigma2_at(admit_day), u);
}

double survival_rmse(std::span<const double> fitted_curve, const SurvivalCurve& empirical)
{
    if (fitted_curve.empty()) {
        return 0.0;
    }
    double ss = 0.0;
    for (std::size_t u = 0; u < fitted_curve.size(); ++u) {
        const double diff = fitted_curve[u] - empirical.at(static_cast<int>(u));
        ss += diff * diff;
    }
    return std::sqrt(ss / static_cast<double>(fitted_curve.size()));
}

DistributionSelection select_distribution(std::span<const double> samples, std::vector<double> mu_t,
                                          std::vector<double> sigma2_t)
{
    if (samples.empty()) {
        throw Error(ErrorCode::EmptySample, "no LOS samples");
    }
    DistributionSelection out;
    out.empirical         = km_survival(samples);
    const double max_seen = *std::max_element(samples.begin(), samples.end());

    out.candidates.resize(kAllFamilies.size());
    parallel_for(kAllFamilies.size(), [&](std::size_t i) {
        CandidateFit& c = out.candidates[i];
        c.family        = kAllFamilies[i];
        try {
            c.fit = mle_fit(c.family, samples);
        }
        catch (const Error& e) {
            if (e.code() != ErrorCode::NonConvergence && e.code() != ErrorCode::TooFewSamples) {
                throw;
            }
            c.failure = e.what();
            return;
        }
        const double q99 = c.fit->quantile(0.99);
        c.horizon        = static_cast<int>(std::floor(std::max(0.0, std::min(max_seen, q99))));
        c.curve.resize(static_cast<std::size_t>(c.horizon) + 1);
        for (int u = 0; u <= c.horizon; ++u) {
            c.curve[static_cast<std::size_t>(u)] = c.fit->survival(u);
        }
        c.rmse = survival_rmse(c.curve, out.empirical);
    });

    const CandidateFit* best = nullptr;
    for (const auto& c : out.candidates) {
        if (c.fit && (!best || c.rmse < best->rmse)) {
            best = &c;
        }
    }
    if (!best) {
        throw Error(ErrorCode::NonConvergence, "no LOS family could be fitted");
    }

    LosModel& model = out.model;
    model.family    = best->family;
    if (has_shape(best->family)) {
        model.kappa = best->fit->shape;
    }
    model.mu_t     = std::move(mu_t);
    model.sigma2_t = std::move(sigma2_t);
    model.s_max    = std::max(1, static_cast<int>(std::ceil(best->fit->quantile(0.99))));
    model.rmse     = best->rmse;
    return out;
}

void write_model_json(std::ostream& stream, const LosModel& model)
{
    nlohmann::json j;
    j["family"]   = to_string(model.family);
    j["kappa"]    = model.kappa ? nlohmann::json(*model.kappa) : nlohmann::json(nullptr);
    j["s_max"]    = model.s_max;
    j["rmse"]     = model.rmse;
    j["kappa_cv"] = model.kappa_cv;
    stream << j.dump(2) << '\n';
}

void write_survival_csv(std::ostream& stream, const DistributionSelection& selection)
{
    stream << "u,empirical";
    std::size_t horizon = selection.empirical.horizon();
    for (const auto& c : selection.candidates) {
        stream << ',' << to_string(c.family);
        horizon = std::max(horizon, c.curve.size() > 0 ? c.curve.size() - 1 : 0);
    }
    stream << '\n';
    for (std::size_t u = 0; u <= horizon; ++u) {
        stream << u << ',' << selection.empirical.at(static_cast<int>(u));
        for (const auto& c : selection.candidates) {
            stream << ',';
            if (c.fit) {
                stream << c.fit->survival(static_cast<double>(u));
            }
        }
        stream << '\n';
    }
}

} // namespace bedcast
