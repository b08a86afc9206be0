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
#include "bedcast/decomp.h"
#include "bedcast/error.h"
#include "bedcast/stats.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <ostream>

namespace bedcast
{

namespace
{

/**
 * Local polynomial fit evaluated at position x (0-based, may lie outside [0, n)).
 * Uses points [left, right] of y, neighbourhood size q; q larger than the series widens the bandwidth
 * the way the reference STL implementation does.
 */
std::optional<double> local_fit(std::span<const double> y, int q, int degree, double x, int left, int right,
                                std::span<const double> robustness)
{
    const int n = static_cast<int>(y.size());
    double h    = std::max(x - left, right - x);
    if (q > n) {
        h += static_cast<double>((q - n) / 2);
    }
    const double h9 = 0.999 * h;
    const double h1 = 0.001 * h;

    // Weighted moments of z = (j - x) / h.
    std::array<double, 5> s{};
    std::array<double, 3> t{};
    double total = 0.0;
    for (int j = left; j <= right; ++j) {
        const double r = std::abs(j - x);
        if (r > h9) {
            continue;
        }
        double w = 1.0;
        if (r > h1) {
            const double u = r / h;
            const double c = 1.0 - u * u * u;
            w              = c * c * c;
        }
        if (!robustness.empty()) {
            w *= robustness[static_cast<std::size_t>(j)];
        }
        if (w <= 0.0) {
            continue;
        }
        total += w;
        const double z  = h > 0.0 ? (j - x) / h : 0.0;
        const double yj = y[static_cast<std::size_t>(j)];
        double zp       = 1.0;
        for (int k = 0; k < 5; ++k) {
            s[static_cast<std::size_t>(k)] += w * zp;
            if (k < 3) {
                t[static_cast<std::size_t>(k)] += w * zp * yj;
            }
            zp *= z;
        }
    }
    if (total <= 0.0) {
        return std::nullopt;
    }

    const double level = t[0] / s[0];
    if (degree == 0 || h <= 0.0) {
        return level;
    }
    // Relative conditioning threshold for the normal equations.
    constexpr double tiny = 1e-10;
    if (degree >= 2) {
        // Solve the 3x3 normal equations for the intercept by Cramer's rule.
        const double a00 = s[0], a01 = s[1], a02 = s[2];
        const double a11 = s[2], a12 = s[3], a22 = s[4];
        const double det = a00 * (a11 * a22 - a12 * a12) - a01 * (a01 * a22 - a12 * a02) +
                           a02 * (a01 * a12 - a11 * a02);
        const double scale = a00 * a11 * a22;
        if (scale > 0.0 && std::abs(det) > tiny * scale) {
            const double det0 = t[0] * (a11 * a22 - a12 * a12) - a01 * (t[1] * a22 - a12 * t[2]) +
                                a02 * (t[1] * a12 - a11 * t[2]);
            return det0 / det;
        }
    }
    const double det = s[0] * s[2] - s[1] * s[1];
    if (det > tiny * s[0] * s[2] && det > 0.0) {
        return (t[0] * s[2] - s[1] * t[1]) / det;
    }
    return level;
}

/// Loess at every index; q may exceed n. Points whose neighbourhood has zero weight keep the input value.
std::vector<double> smooth_all(std::span<const double> y, int q, int degree, std::span<const double> robustness)
{
    const int n = static_cast<int>(y.size());
    std::vector<double> out(static_cast<std::size_t>(n));
    const int half = (q - 1) / 2;
    for (int i = 0; i < n; ++i) {
        int left = 0, right = n - 1;
        if (q < n) {
            left  = std::clamp(i - half, 0, n - q);
            right = left + q - 1;
        }
        const auto fit = local_fit(y, q, degree, i, left, right, robustness);
        out[static_cast<std::size_t>(i)] = fit.value_or(y[static_cast<std::size_t>(i)]);
    }
    return out;
}

std::vector<double> moving_average(std::span<const double> x, int length)
{
    const int n = static_cast<int>(x.size());
    std::vector<double> out(static_cast<std::size_t>(n - length + 1));
    double sum = 0.0;
    for (int i = 0; i < length; ++i) {
        sum += x[static_cast<std::size_t>(i)];
    }
    out[0] = sum / length;
    for (int i = 1; i + length <= n; ++i) {
        sum += x[static_cast<std::size_t>(i + length - 1)] - x[static_cast<std::size_t>(i - 1)];
        out[static_cast<std::size_t>(i)] = sum / length;
    }
    return out;
}

/// Cycle-subseries smoothing, extended by one period on each side. Output length n + 2 * period.
std::vector<double> smooth_cycle_subseries(std::span<const double> detrended, int period, int window, int degree,
                                           std::span<const double> robustness)
{
    const int n = static_cast<int>(detrended.size());
    std::vector<double> extended(static_cast<std::size_t>(n + 2 * period));
    std::vector<double> sub, sub_weights;
    for (int phase = 0; phase < period; ++phase) {
        sub.clear();
        sub_weights.clear();
        for (int i = phase; i < n; i += period) {
            sub.push_back(detrended[static_cast<std::size_t>(i)]);
            if (!robustness.empty()) {
                sub_weights.push_back(robustness[static_cast<std::size_t>(i)]);
            }
        }
        const int k = static_cast<int>(sub.size());
        const std::span<const double> w(sub_weights);
        const auto smoothed = smooth_all(sub, window, degree, w);

        const int right_first = std::min(window, k) - 1;
        const auto before     = local_fit(sub, window, degree, -1.0, 0, right_first, w);
        const int left_last   = std::max(0, k - window);
        const auto after      = local_fit(sub, window, degree, k, left_last, k - 1, w);

        // Position p of the extended series holds subseries index (p - period - phase) / period.
        extended[static_cast<std::size_t>(phase)] = before.value_or(smoothed.front());
        for (int j = 0; j < k; ++j) {
            extended[static_cast<std::size_t>(period + phase + j * period)] = smoothed[static_cast<std::size_t>(j)];
        }
        extended[static_cast<std::size_t>(period + phase + k * period)] = after.value_or(smoothed.back());
    }
    return extended;
}

std::vector<double> robustness_weights(std::span<const double> y, std::span<const double> fit)
{
    const auto n = y.size();
    std::vector<double> abs_res(n);
    for (std::size_t i = 0; i < n; ++i) {
        abs_res[i] = std::abs(y[i] - fit[i]);
    }
    const double cmad = 6.0 * median(abs_res);
    std::vector<double> w(n, 1.0);
    if (cmad <= 0.0) {
        return w;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double r = abs_res[i];
        if (r <= 0.001 * cmad) {
            w[i] = 1.0;
        }
        else if (r <= 0.999 * cmad) {
            const double u = r / cmad;
            w[i]           = (1.0 - u * u) * (1.0 - u * u);
        }
        else {
            w[i] = 0.0;
        }
    }
    return w;
}

int next_odd_at_least(int value)
{
    return value % 2 == 0 ? value + 1 : value;
}

} // namespace

void validate(const StlConfig& config)
{
    auto window_ok = [](int w) { return w >= 3 && w % 2 == 1; };
    auto degree_ok = [](int d) { return d == 1 || d == 2; };
    if (!window_ok(config.seasonal_window) || !window_ok(config.trend_window)) {
        throw Error(ErrorCode::InvalidArgument, "STL windows must be odd and >= 3");
    }
    if (!degree_ok(config.seasonal_degree) || !degree_ok(config.trend_degree)) {
        throw Error(ErrorCode::InvalidArgument, "STL degrees must be 1 or 2");
    }
}

std::string to_string(const StlConfig& c)
{
    return "seasonal=" + std::to_string(c.seasonal_window) + " trend=" + std::to_string(c.trend_window) +
           " sdeg=" + std::to_string(c.seasonal_degree) + " tdeg=" + std::to_string(c.trend_degree) +
           " robust=" + (c.robust ? "true" : "false");
}

std::vector<double> loess_smooth(std::span<const double> series, int window, int degree,
                                 std::span<const double> weights)
{
    if (degree != 1 && degree != 2) {
        throw Error(ErrorCode::InvalidArgument, "loess degree must be 1 or 2");
    }
    if (window < 1) {
        throw Error(ErrorCode::InvalidArgument, "loess window must be positive");
    }
    if (static_cast<std::size_t>(window) > series.size()) {
        throw Error(ErrorCode::WindowTooLarge,
                    "window " + std::to_string(window) + " exceeds series length " + std::to_string(series.size()));
    }
    if (!weights.empty() && weights.size() != series.size()) {
        throw Error(ErrorCode::InvalidArgument, "weights must match the series length");
    }
    return smooth_all(series, window, degree, weights);
}

Decomposition stl_decompose(std::span<const double> series, const StlConfig& config, StlIterations iterations)
{
    validate(config);
    const int period = kWeeklyPeriod;
    const int n      = static_cast<int>(series.size());
    if (n < 2 * period) {
        throw Error(ErrorCode::SeriesTooShort,
                    "need at least " + std::to_string(2 * period) + " points, got " + std::to_string(n));
    }
    const int lowpass_window = next_odd_at_least(period);
    const int inner          = std::max(1, iterations.inner);
    const int outer          = std::max(1, iterations.outer);

    std::vector<double> trend(static_cast<std::size_t>(n), 0.0);
    std::vector<double> seasonal(static_cast<std::size_t>(n), 0.0);
    std::vector<double> robustness;
    std::vector<double> work(static_cast<std::size_t>(n));

    for (int pass = 0; pass < outer; ++pass) {
        for (int it = 0; it < inner; ++it) {
            for (int i = 0; i < n; ++i) {
                work[static_cast<std::size_t>(i)] = series[static_cast<std::size_t>(i)] - trend[static_cast<std::size_t>(i)];
            }
            const auto cycle = smooth_cycle_subseries(work, period, config.seasonal_window, config.seasonal_degree,
                                                      robustness);
            auto lowpass = moving_average(moving_average(moving_average(cycle, period), period), 3);
            lowpass      = smooth_all(lowpass, lowpass_window, 1, {});
            for (int i = 0; i < n; ++i) {
                const auto k    = static_cast<std::size_t>(i);
                seasonal[k]     = cycle[k + static_cast<std::size_t>(period)] - lowpass[k];
                work[k]         = series[k] - seasonal[k];
            }
            trend = smooth_all(work, config.trend_window, config.trend_degree, robustness);
        }
        if (config.robust && pass + 1 < outer) {
            for (int i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(i);
                work[k]      = trend[k] + seasonal[k];
            }
            robustness = robustness_weights(series, work);
        }
    }

    Decomposition d;
    d.config = config;
    d.residual.resize(static_cast<std::size_t>(n));
    for (std::size_t k = 0; k < static_cast<std::size_t>(n); ++k) {
        d.residual[k] = series[k] - trend[k] - seasonal[k];
    }
    d.trend        = std::move(trend);
    d.seasonal     = std::move(seasonal);
    d.residual_std = population_sd(d.residual);
    return d;
}

std::vector<StlConfig> stl_grid()
{
    std::vector<StlConfig> grid;
    for (int sw : {7, 15, 31}) {
        for (int tw : {15, 31, 61}) {
            for (int sd : {1, 2}) {
                for (int td : {1, 2}) {
                    for (bool robust : {false, true}) {
                        grid.push_back({sw, tw, sd, td, robust});
                    }
                }
            }
        }
    }
    return grid;
}

std::size_t select_config(std::span<const double> residual_stds)
{
    if (residual_stds.empty()) {
        throw Error(ErrorCode::EmptyInput, "no candidate configurations");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < residual_stds.size(); ++i) {
        if (residual_stds[i] < residual_stds[best]) {
            best = i;
        }
    }
    return best;
}

GridSearchResult grid_search(std::span<const double> series)
{
    const auto grid = stl_grid();
    std::vector<Decomposition> results(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { results[i] = stl_decompose(series, grid[i]); });

    GridSearchResult out;
    out.residual_stds.reserve(grid.size());
    for (const auto& r : results) {
        out.residual_stds.push_back(r.residual_std);
    }
    const auto best   = select_config(out.residual_stds);
    out.best          = grid[best];
    out.decomposition = std::move(results[best]);
    return out;
}

std::vector<double> rolling_std(std::span<const double> values, int window)
{
    const int n    = static_cast<int>(values.size());
    const int half = window / 2;
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t) {
        const int lo = std::max(0, t - half);
        const int hi = std::min(n - 1, t + half);
        out[static_cast<std::size_t>(t)] =
            std::sqrt(sample_variance(values.subspan(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo + 1))));
    }
    return out;
}

VarianceTrack rolling_variance(std::span<const double> residuals, int window)
{
    if (residuals.size() < 31) {
        throw Error(ErrorCode::SeriesTooShort, "rolling variance needs at least 31 residuals");
    }
    VarianceTrack track;
    track.window = window;
    const auto sd = rolling_std(residuals, window);
    track.sigma2.resize(sd.size());
    for (std::size_t t = 0; t < sd.size(); ++t) {
        track.sigma2[t] = std::max(kPositiveFloor, sd[t] * sd[t]);
    }
    return track;
}

VarianceTrack rolling_variance(std::span<const double> residuals)
{
    if (residuals.size() < 31) {
        throw Error(ErrorCode::SeriesTooShort, "rolling variance needs at least 31 residuals");
    }
    int best_window   = 0;
    double best_spread = 0.0;
    for (int window : {7, 15, 31}) {
        const double spread = population_sd(rolling_std(residuals, window));
        if (best_window == 0 || spread < best_spread) {
            best_window = window;
            best_spread = spread;
        }
    }
    return rolling_variance(residuals, best_window);
}

std::vector<double> clamp_positive(std::span<const double> values)
{
    std::vector<double> out(values.begin(), values.end());
    for (auto& v : out) {
        v = std::max(v, kPositiveFloor);
    }
    return out;
}

void write_decomposition_csv(std::ostream& stream, const std::vector<std::string>& dates, const Decomposition& d)
{
    stream << "date,trend,seasonal,residual\n";
    for (std::size_t t = 0; t < d.trend.size(); ++t) {
        stream << (t < dates.size() ? dates[t] : std::to_string(t)) << ',' << d.trend[t] << ',' << d.seasonal[t]
               << ',' << d.residual[t] << '\n';
    }
}

} // namespace bedcast
