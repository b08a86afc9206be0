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
#ifndef BEDCAST_PROJECTION_H
#define BEDCAST_PROJECTION_H

#include "bedcast/dates.h"
#include "bedcast/losfit.h"
#include "bedcast/planning.h"
#include "bedcast/scenario.h"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace bedcast
{

/// Days in a projection year; leap days of reference years are folded into the last day.
inline constexpr int kProjectionYearDays = 365;

using DailyProfile = std::array<double, kProjectionYearDays>;

struct ProjectionConfig {
    int y_min = 0;
    int y_max = 0;
    /// Recent years used for baseline admissions and site shares.
    std::vector<int> y_ref_omega;
    /// Years whose daily arrival and LOS patterns are resampled.
    std::vector<int> y_ref_nu;
    std::map<int, double> births;
    double eta        = 1.0;
    double psi        = 1.0;
    int runs          = 300;
    std::uint64_t seed = 0;
    double gamma       = 1.0;
    std::vector<double> alphas = {0.05, 0.01};
    OverflowMode mode          = OverflowMode::Averaged;
};

/// Throws InvalidArgument when the configuration breaks its invariants.
void validate(const ProjectionConfig& config);

/// Everything the projection needs from one site's fitted history. All daily tracks start at `start`.
struct SiteHistory {
    std::string site_id;
    Date start;
    std::vector<int> admit_count;
    /// Sum of LOS over the day's admissions.
    std::vector<double> los_sum;
    std::vector<double> lambda_t;
    std::vector<double> mu_t;
    std::vector<double> sigma2_t;
    LosFamily family = LosFamily::Exponential;
    std::optional<double> kappa;
    int s_max = 1;

    /// Observed admissions in a calendar year; nullopt when the history misses any day of it.
    std::optional<double> annual_admissions(int year) const;
};

using ProjectionHistory = std::vector<SiteHistory>;

/**
 * Projected system-wide admissions per future year,
 * A_y = A_base (K_y / K_{y_min})^eta psi^(y - y_min), with A_base the mean annual total over y_ref_omega.
 * @throws Error MissingBirths, MissingHistory.
 */
std::map<int, double> project_admissions(const ProjectionConfig& config, const ProjectionHistory& history);

/// Mean over the reference years of each site's share of that year's admissions, aligned with history.
std::vector<double> site_shares(const ProjectionHistory& history, const std::vector<int>& y_ref_omega);

/// Normalised daily arrival profile of one reference year (uniform when the year saw no admissions).
DailyProfile year_profile(const SiteHistory& site, int year);

struct ResampledProfile {
    int year = 0;
    DailyProfile profile{};
};

/// Draws a reference year uniformly from y_ref_nu and returns its normalised arrival profile.
ResampledProfile resample_profile(const SiteHistory& site, const std::vector<int>& y_ref_nu, std::mt19937_64& rng);

/// Mean LOS over all admissions of the reference years.
double reference_mean_los(const SiteHistory& site, const std::vector<int>& years);

/// Per-run, per-site, per-year projection.
struct ProjectedYear {
    int year           = 0;
    int arrival_ref    = 0;
    int los_ref        = 0;
    double admissions  = 0.0;
    std::vector<double> lambda_t;
    std::vector<double> mu_t;
    std::vector<double> sigma2_t;
    std::vector<double> rho;
    CapacityPlan plan;
};

struct ProjectedSite {
    std::string site_id;
    std::vector<ProjectedYear> years;
};

struct RunResult {
    std::size_t run_index = 0;
    std::vector<ProjectedSite> sites;
};

/// Per-stream generator keyed by (seed, run, site) so runs are order independent.
std::mt19937_64 projection_rng(std::uint64_t seed, std::size_t run_index, std::size_t site_index);

/**
 * One Monte Carlo run: for every site and future year resample an arrival year and an independent LOS year,
 * scale the arrival profile to the projected admissions, convolve the consecutive projected years and plan
 * capacity on each year's 365 days.
 */
RunResult project_run(const ProjectionConfig& config, const ProjectionHistory& history, std::size_t run_index,
                      bool keep_series = true);

struct RunSummary {
    double median = 0.0;
    double q25    = 0.0;
    double q75    = 0.0;
    double mean   = 0.0;
    double sd     = 0.0;
};

/// Median, type-7 quartiles, mean and population sd; throws EmptyRuns.
RunSummary summarize_runs(std::span<const double> values);

struct ProjectionRow {
    std::string site_id;
    int year = 0;
    double admissions = 0.0;
    /// Deterministic: built from the projected annual admissions and the reference mean LOS.
    int b_average = 0;
    /// In order: one entry per overflow alpha (labelled B_<alpha>), then B_max.
    std::vector<std::pair<std::string, RunSummary>> strategies;
};

struct ProjectionSummary {
    std::map<int, double> system_admissions;
    std::vector<double> shares;
    std::vector<ProjectionRow> rows;
};

/// Label of an overflow strategy, e.g. B_0.05.
/**
 * Projected births from CSV with columns `year,births`.
 * @throws Error MissingColumn, BadNumber (with the 1-based data row).
 */
std::map<int, double> parse_births(std::istream& stream);

std::string overflow_label(double alpha);

/// Runs config.runs projections and summarises each overflow target and B_max per site and year.
ProjectionSummary run_projection(const ProjectionConfig& config, const ProjectionHistory& history);

/// Columns: site, year, admissions, b_average, then median/q25/q75/mean/sd per strategy.
void write_projection_csv(std::ostream& stream, const ProjectionSummary& summary);

std::string projection_to_json(const ProjectionSummary& summary, int indent = 2);

} // namespace bedcast

#endif // BEDCAST_PROJECTION_H
