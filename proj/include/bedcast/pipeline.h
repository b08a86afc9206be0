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
#ifndef BEDCAST_PIPELINE_H
#define BEDCAST_PIPELINE_H

#include "bedcast/decomp.h"
#include "bedcast/ingest.h"
#include "bedcast/losfit.h"
#include "bedcast/occupancy.h"
#include "bedcast/planning.h"
#include "bedcast/projection.h"
#include "bedcast/scenario.h"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bedcast
{

/// Settings shared by every site fit.
struct PipelineOptions {
    double gamma = 1.0;
    std::vector<double> alphas = {0.05, 0.01};
    OverflowMode mode = OverflowMode::Averaged;
    WarmUp warm_up    = WarmUp::BackFill;
    /// Study window; the site's own first..last admission when absent.
    std::optional<DateWindow> window;

    std::vector<OverflowTarget> targets() const;
};

/// Everything estimated for one site, from the daily series to the baseline plan.
struct SiteFit {
    std::string site_id;
    DailySiteSeries series;
    FilledLos mean_los;
    std::vector<double> los_sum;
    GridSearchResult arrivals;
    GridSearchResult los;
    VarianceTrack variance;
    std::vector<double> los_samples;
    DistributionSelection selection;
    LosModel model;
    std::vector<double> lambda_t;
    double lambda_bar  = 0.0;
    double sample_mean = 0.0;
    OccupancySeries occupancy;
    CapacityPlan plan;

    ModelInputs inputs() const;
};

/// Largest shape CV over quarterly, biannual and annual windows; 0 for families without a shape.
double site_kappa_cv(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                     const DateWindow& window, LosFamily family);

/**
 * Daily series, STL grid search on admissions and mean LOS, rolling LOS variance, family selection,
 * expected occupancy and the baseline plan for one site.
 */
SiteFit fit_site(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                 const PipelineOptions& options);

/// Fitted, immutable per-site state served by the API and reused by the CLI.
struct SiteSnapshot {
    std::string site_id;
    Date start;
    std::vector<int> admit_count;
    std::vector<double> los_sum;
    std::vector<int> census;
    std::vector<double> lambda_t;
    LosModel model;
    double lambda_bar  = 0.0;
    double sample_mean = 0.0;
    OccupancySeries occupancy;
    CapacityPlan plan;
    std::optional<int> capacity;

    ModelInputs inputs() const;
    SiteHistory history() const;
    std::vector<std::string> dates() const;
};

SiteSnapshot make_site_snapshot(const SiteFit& fit, std::optional<int> capacity = std::nullopt);

struct ModelSnapshot {
    std::string id;
    std::string created;
    std::string source_checksum;
    PipelineOptions options;
    std::vector<SiteSnapshot> sites;

    const SiteSnapshot* find(const std::string& site_id) const;
    ProjectionHistory history() const;
};

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(std::string_view data);

/**
 * Fits every site in `records`. The id is a checksum of the fitted content, so refitting different data
 * yields a different id. `created` is stamped by the caller.
 */
ModelSnapshot build_snapshot(const std::vector<AdmissionRecord>& records, const PipelineOptions& options,
                             const std::map<std::string, int>& capacities = {}, std::string created = {});

std::string snapshot_to_json(const ModelSnapshot& snapshot, int indent = -1);
ModelSnapshot snapshot_from_json(const std::string& text);

/// Plan recomputed for one site under a scenario; the baseline plan is returned for all-unit multipliers.
struct ScenarioOutcome {
    ModelInputs inputs;
    OccupancySeries occupancy;
    CapacityPlan plan;
};

ScenarioOutcome run_scenario(const SiteSnapshot& site, const ScenarioSpec& spec, const PipelineOptions& options);

} // namespace bedcast

#endif // BEDCAST_PIPELINE_H
