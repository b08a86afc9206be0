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
#ifndef BEDCAST_CONFIG_H
#define BEDCAST_CONFIG_H

#include "bedcast/ingest.h"
#include "bedcast/pipeline.h"
#include "bedcast/projection.h"
#include "bedcast/scenario.h"

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace bedcast
{

struct ScenarioSettings {
    double beta_lambda = 1.0;
    double beta_mu     = 1.0;
    double beta_sigma2 = 1.0;
    std::optional<DateWindow> date_range;

    /// Spec for a site whose series starts on `start`; the date range is clipped to the site's days.
    ScenarioSpec spec_for(Date start, std::size_t days) const;
};

struct SimulationSettings {
    int replications = 1000;
    int horizon      = 365;
};

/// Resolved run configuration. Every field has a default, so an empty JSON object is valid.
struct BedcastConfig {
    std::optional<std::string> input;
    ColumnSchema columns;
    PipelineOptions pipeline;
    std::map<std::string, int> capacities;
    ScenarioSettings scenario;
    /// Projection years, births, elasticity, drift, runs; runs defaults to 300.
    ProjectionConfig projection;
    std::optional<std::string> births_csv;
    SimulationSettings simulation;
    std::uint64_t seed = 0;
};

/**
 * Reads and validates a configuration object.
 * @throws Error SchemaError whose message starts with the JSON pointer of the offending key.
 */
BedcastConfig parse_config(const std::string& text);

/// @throws Error IoError when the file cannot be read, SchemaError as parse_config.
BedcastConfig load_config(const std::string& path);

} // namespace bedcast

#endif // BEDCAST_CONFIG_H
