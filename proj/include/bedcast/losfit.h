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
#ifndef BEDCAST_LOSFIT_H
#define BEDCAST_LOSFIT_H

#include "bedcast/dates.h"

#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bedcast
{

enum class LosFamily
{
    Exponential,
    Weibull,
    Lognormal,
    Gamma,
    Fisk,
};

inline constexpr std::array<LosFamily, 5> kAllFamilies = {LosFamily::Exponential, LosFamily::Weibull,
                                                          LosFamily::Lognormal, LosFamily::Gamma, LosFamily::Fisk};

std::string_view to_string(LosFamily family);
std::optional<LosFamily> parse_family(std::string_view name);

/// True for the families carrying a fixed shape parameter (Weibull, Gamma, Fisk).
bool has_shape(LosFamily family);

/// LOS values at or below zero are moved to this value before fitting.
inline constexpr double kMinFitLos = 1e-3;

/// Empirical survival function on the integer day grid; prob[u] = P(S > u).
struct SurvivalCurve {
    std::vector<double> prob;

    std::size_t horizon() const
    {
        return prob.empty() ? 0 : prob.size() - 1;
    }

    /// P(S > u), zero beyond the stored horizon.
    double at(int u) const;
};

/**
 * Kaplan-Meier curve for complete (uncensored) stays, which is the empirical survival function.
 * The horizon extends to the first integer day at which no stay remains.
 */
SurvivalCurve km_survival(std::span<const double> los_samples);

/**
 * A distribution fitted by maximum likelihood, in its standard parameterisation.
 * Exponential uses `scale` as the mean, Weibull and Gamma use (shape, scale),
 * Fisk is the log-logistic with CDF 1 / (1 + (u/scale)^-shape), Lognormal uses (log_mean, log_sd).
 */
struct FittedDistribution {
    LosFamily family = LosFamily::Exponential;
    double shape     = 0.0;
    double scale     = 0.0;
    double log_mean  = 0.0;
    double log_sd    = 0.0;

    double log_likelihood = 0.0;
    int iterations        = 0;
    double gradient_norm  = 0.0;
    /// Set when all samples coincide and the shape was pinned at its upper bound.
    bool degenerate = false;

    double survival(double u) const;
    double quantile(double p) const;
    double mean() const;
};

/// Iterative fits stop once the mean log-likelihood gradient falls below this norm.
inline constexpr double kMleTolerance   = 1e-8;
inline constexpr int kMleMaxIterations  = 200;
inline constexpr std::size_t kMinIterativeSamples = 10;

/**
 * Maximum-likelihood fit. Exponential and Lognormal are closed form and need one sample;
 * Weibull, Gamma and Fisk are solved iteratively and need kMinIterativeSamples.
 * @throws Error EmptySample, TooFewSamples, NonConvergence.
 */
FittedDistribution mle_fit(LosFamily family, std::span<const double> samples);

struct ShapeStability {
    double kappa_cv = 0.0;
    std::vector<double> kappas;
    /// Windows dropped for having fewer than kMinIterativeSamples values.
    std::size_t skipped_windows = 0;
};

/// Coefficient of variation (population sd / mean) of the shape fitted in each window.
ShapeStability shape_stability(const std::vector<std::vector<double>>& samples_by_window, LosFamily family);

/// Groups LOS samples into consecutive calendar blocks of `months` months (3, 6, 12), keyed by admission date.
std::vector<std::vector<double>> group_by_months(std::span<const Date> admit_dates, std::span<const double> los,
                                                 int months);

/**
 * Fitted LOS model used by the occupancy convolution.
 * Shape is fixed per site while mean (and, for Lognormal, variance) follow daily tracks.
 */
struct LosModel {
    LosFamily family = LosFamily::Exponential;
    std::optional<double> kappa;
    std::vector<double> mu_t;
    std::vector<double> sigma2_t;
    int s_max       = 1;
    double rmse     = 0.0;
    double kappa_cv = 0.0;

    /// Track values with indices clamped into the track (earliest value before the start). Size-1 tracks broadcast.
    double mu_at(long day) const;
    double sigma2_at(long day) const;
};

/// Constant-parameter model, handy for stationary analyses.
LosModel constant_model(LosFamily family, double mu, std::optional<double> kappa = std::nullopt,
                        double sigma2 = 0.0, int s_max = 100);

/**
 * P(S > u) for a stay with mean mu (and variance sigma2 for Lognormal).
 * Exponential exp(-u/mu); Weibull exp(-(u/theta)^k), theta = mu / Gamma(1 + 1/k);
 * Lognormal 1 - Phi((ln u - m)/tau), tau^2 = ln(1 + sigma2/mu^2), m = ln mu - tau^2/2, with the
 * deterministic step 1{u < mu} when sigma2 == 0; Gamma upper regularised incomplete gamma with
 * theta = mu/k; Fisk (theta/(u + theta))^k with theta = mu k / pi.
 * @throws Error DomainError when mu <= 0 or a required shape is missing.
 */
double survival_probability(LosFamily family, std::optional<double> kappa, double mu, double sigma2, double u);

/// P(S > u | admitted on admit_day), evaluated with the admission day's mean and variance.
double conditional_survival(const LosModel& model, int u, long admit_day);

struct CandidateFit {
    LosFamily family = LosFamily::Exponential;
    std::optional<FittedDistribution> fit;
    /// Comparison horizon: min(max observed LOS, fitted 99th percentile), floored to whole days.
    int horizon = 0;
    /// Fitted marginal survival at u = 0..horizon.
    std::vector<double> curve;
    double rmse = 0.0;
    std::string failure;
};

struct DistributionSelection {
    LosModel model;
    SurvivalCurve empirical;
    std::vector<CandidateFit> candidates;
};

/// Root mean squared difference between the fitted curve and the empirical curve on u = 0..curve.size()-1.
double survival_rmse(std::span<const double> fitted_curve, const SurvivalCurve& empirical);

/**
 * Fits every family, scores it by RMSE against the Kaplan-Meier curve and keeps the best.
 * The returned model's occupancy horizon is the selected distribution's 99th percentile rounded up.
 * @throws Error EmptySample, or NonConvergence when every family fails.
 */
DistributionSelection select_distribution(std::span<const double> samples, std::vector<double> mu_t,
                                          std::vector<double> sigma2_t);

void write_model_json(std::ostream& stream, const LosModel& model);

/// CSV with columns u, empirical, then one column per candidate family.
void write_survival_csv(std::ostream& stream, const DistributionSelection& selection);

} // namespace bedcast

#endif // BEDCAST_LOSFIT_H
