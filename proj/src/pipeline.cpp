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
#include "bedcast/pipeline.h"
#include "bedcast/error.h"
#include "bedcast/stats.h"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace bedcast
{

namespace
{

using nlohmann::json;

json plan_json(const CapacityPlan& plan)
{
    return json::parse(plan_to_json(plan, -1));
}

CapacityPlan plan_from_json(const json& j)
{
    CapacityPlan plan;
    plan.b_average = j.at("b_average").get<int>();
    plan.b_max     = j.at("b_max").get<int>();
    for (const auto& o : j.at("b_overflow")) {
        plan.b_overflow[{o.at("gamma").get<double>(), o.at("alpha").get<double>()}] = o.at("beds").get<int>();
    }
    return plan;
}

Date date_from_json(const json& j)
{
    const auto d = parse_date(j.get<std::string>());
    if (!d) {
        throw Error(ErrorCode::SchemaError, "bad date in snapshot: " + j.get<std::string>());
    }
    return *d;
}

double track_mean(std::span<const double> track, std::size_t n)
{
    return mean(track.subspan(0, std::min(track.size(), n)));
}

} // namespace

std::vector<OverflowTarget> PipelineOptions::targets() const
{
    std::vector<OverflowTarget> out;
    for (double a : alphas) {
        out.push_back({gamma, a});
    }
    return out;
}

ModelInputs SiteFit::inputs() const
{
    return {lambda_t, model};
}

double site_kappa_cv(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                     const DateWindow& window, LosFamily family)
{
    if (!has_shape(family)) {
        return 0.0;
    }
    std::vector<Date> dates;
    std::vector<double> los;
    for (const auto& r : records) {
        if (r.site_id == site_id && window.contains(r.admit_date)) {
            dates.push_back(r.admit_date);
            los.push_back(r.los_days);
        }
    }
    double worst = 0.0;
    for (int months : {3, 6, 12}) {
        worst = std::max(worst, shape_stability(group_by_months(dates, los, months), family).kappa_cv);
    }
    return worst;
}

SiteFit fit_site(const std::vector<AdmissionRecord>& records, const std::string& site_id,
                 const PipelineOptions& options)
{
    const DateWindow window = options.window ? *options.window : site_window(records, site_id);

    SiteFit fit;
    fit.site_id  = site_id;
    fit.series   = build_daily_series(records, site_id, window);
    fit.mean_los = fill_gaps(fit.series.mean_los);
    fit.los_sum.assign(fit.series.size(), 0.0);
    for (const auto& r : records) {
        if (r.site_id == site_id && window.contains(r.admit_date)) {
            fit.los_sum[static_cast<std::size_t>((r.admit_date - window.first).count())] += r.los_days;
        }
    }

    const std::vector<double> counts(fit.series.admit_count.begin(), fit.series.admit_count.end());
    fit.arrivals = grid_search(counts);
    fit.los      = grid_search(fit.mean_los.values);
    fit.variance = rolling_variance(fit.los.decomposition.residual);
    fit.lambda_t = clamp_positive(fit.arrivals.decomposition.trend);

    fit.los_samples = los_samples(records, site_id, window);
    fit.selection   = select_distribution(fit.los_samples, clamp_positive(fit.los.decomposition.trend),
                                          fit.variance.sigma2);
    fit.model          = fit.selection.model;
    fit.model.kappa_cv = site_kappa_cv(records, site_id, window, fit.model.family);

    fit.lambda_bar  = mean(counts);
    fit.sample_mean = mean(fit.los_samples);
    fit.occupancy   = expected_occupancy(fit.lambda_t, fit.model, options.warm_up);
    const auto targets = options.targets();
    fit.plan = make_plan(fit.lambda_bar, fit.sample_mean, fit.occupancy, targets, options.mode);
    return fit;
}

ModelInputs SiteSnapshot::inputs() const
{
    return {lambda_t, model};
}

SiteHistory SiteSnapshot::history() const
{
    SiteHistory h;
    h.site_id     = site_id;
    h.start       = start;
    h.admit_count = admit_count;
    h.los_sum     = los_sum;
    h.lambda_t    = lambda_t;
    h.mu_t        = model.mu_t;
    h.sigma2_t    = model.sigma2_t;
    h.family      = model.family;
    h.kappa       = model.kappa;
    h.s_max       = model.s_max;
    return h;
}

std::vector<std::string> SiteSnapshot::dates() const
{
    std::vector<std::string> out;
    out.reserve(admit_count.size());
    for (std::size_t t = 0; t < admit_count.size(); ++t) {
        out.push_back(format_date(start + std::chrono::days(static_cast<long>(t))));
    }
    return out;
}

SiteSnapshot make_site_snapshot(const SiteFit& fit, std::optional<int> capacity)
{
    SiteSnapshot s;
    s.site_id     = fit.site_id;
    s.start       = fit.series.start;
    s.admit_count = fit.series.admit_count;
    s.los_sum     = fit.los_sum;
    s.census      = fit.series.census;
    s.lambda_t    = fit.lambda_t;
    s.model       = fit.model;
    s.lambda_bar  = fit.lambda_bar;
    s.sample_mean = fit.sample_mean;
    s.occupancy   = fit.occupancy;
    s.plan        = fit.plan;
    s.capacity    = capacity;
    return s;
}

const SiteSnapshot* ModelSnapshot::find(const std::string& site_id) const
{
    const auto it = std::find_if(sites.begin(), sites.end(), [&](const auto& s) { return s.site_id == site_id; });
    return it == sites.end() ? nullptr : &*it;
}

ProjectionHistory ModelSnapshot::history() const
{
    ProjectionHistory out;
    for (const auto& s : sites) {
        out.push_back(s.history());
    }
    return out;
}

std::string fnv1a_hex(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ModelSnapshot build_snapshot(const std::vector<AdmissionRecord>& records, const PipelineOptions& options,
                             const std::map<std::string, int>& capacities, std::string created)
{
    ModelSnapshot snapshot;
    snapshot.options = options;
    snapshot.created = std::move(created);
    for (const auto& id : site_ids(records)) {
        std::optional<int> capacity;
        if (auto it = capacities.find(id); it != capacities.end()) {
            capacity = it->second;
        }
        snapshot.sites.push_back(make_site_snapshot(fit_site(records, id, options), capacity));
    }
    std::ostringstream source;
    write_admissions(source, records);
    snapshot.source_checksum = fnv1a_hex(source.str());
    snapshot.id              = fnv1a_hex(snapshot_to_json(snapshot));
    return snapshot;
}

std::string snapshot_to_json(const ModelSnapshot& snapshot, int indent)
{
    json j;
    j["id"]              = snapshot.id;
    j["created"]         = snapshot.created;
    j["source_checksum"] = snapshot.source_checksum;
    const auto& o        = snapshot.options;
    j["options"]         = {{"gamma", o.gamma},
                            {"alphas", o.alphas},
                            {"overflow_mode", o.mode == OverflowMode::Averaged ? "averaged" : "per_day_max"},
                            {"warm_up", o.warm_up == WarmUp::BackFill ? "backfill" : "truncate"}};
    if (o.window) {
        j["options"]["window"] = {{"start", format_date(o.window->first)}, {"end", format_date(o.window->last)}};
    }
    auto sites = json::array();
    for (const auto& s : snapshot.sites) {
        json m{{"family", to_string(s.model.family)},
               {"kappa", s.model.kappa ? json(*s.model.kappa) : json(nullptr)},
               {"mu_t", s.model.mu_t},
               {"sigma2_t", s.model.sigma2_t},
               {"s_max", s.model.s_max},
               {"rmse", s.model.rmse},
               {"kappa_cv", s.model.kappa_cv}};
        sites.push_back({{"site_id", s.site_id},
                         {"start", format_date(s.start)},
                         {"admit_count", s.admit_count},
                         {"los_sum", s.los_sum},
                         {"census", s.census},
                         {"lambda_t", s.lambda_t},
                         {"model", m},
                         {"lambda_bar", s.lambda_bar},
                         {"mean_los", s.sample_mean},
                         {"occupancy",
                          {{"first_day", s.occupancy.first_day},
                           {"rho", s.occupancy.rho},
                           {"rho_bar", s.occupancy.rho_bar},
                           {"delta", s.occupancy.delta}}},
                         {"plan", plan_json(s.plan)},
                         {"capacity", s.capacity ? json(*s.capacity) : json(nullptr)}});
    }
    j["sites"] = sites;
    return j.dump(indent);
}

ModelSnapshot snapshot_from_json(const std::string& text)
{
    try {
        const json j = json::parse(text);
        ModelSnapshot snapshot;
        snapshot.id              = j.at("id").get<std::string>();
        snapshot.created         = j.at("created").get<std::string>();
        snapshot.source_checksum = j.at("source_checksum").get<std::string>();
        const auto& o            = j.at("options");
        snapshot.options.gamma   = o.at("gamma").get<double>();
        snapshot.options.alphas  = o.at("alphas").get<std::vector<double>>();
        snapshot.options.mode =
            o.at("overflow_mode").get<std::string>() == "averaged" ? OverflowMode::Averaged : OverflowMode::PerDayMax;
        snapshot.options.warm_up =
            o.at("warm_up").get<std::string>() == "backfill" ? WarmUp::BackFill : WarmUp::Truncate;
        if (o.contains("window")) {
            snapshot.options.window =
                DateWindow{date_from_json(o["window"].at("start")), date_from_json(o["window"].at("end"))};
        }
        for (const auto& s : j.at("sites")) {
            SiteSnapshot site;
            site.site_id     = s.at("site_id").get<std::string>();
            site.start       = date_from_json(s.at("start"));
            site.admit_count = s.at("admit_count").get<std::vector<int>>();
            site.los_sum     = s.at("los_sum").get<std::vector<double>>();
            site.census      = s.at("census").get<std::vector<int>>();
            site.lambda_t    = s.at("lambda_t").get<std::vector<double>>();
            const auto& m    = s.at("model");
            const auto fam   = parse_family(m.at("family").get<std::string>());
            if (!fam) {
                throw Error(ErrorCode::SchemaError, "unknown LOS family in snapshot");
            }
            site.model.family = *fam;
            if (!m.at("kappa").is_null()) {
                site.model.kappa = m.at("kappa").get<double>();
            }
            site.model.mu_t     = m.at("mu_t").get<std::vector<double>>();
            site.model.sigma2_t = m.at("sigma2_t").get<std::vector<double>>();
            site.model.s_max    = m.at("s_max").get<int>();
            site.model.rmse     = m.at("rmse").get<double>();
            site.model.kappa_cv = m.at("kappa_cv").get<double>();
            site.lambda_bar     = s.at("lambda_bar").get<double>();
            site.sample_mean    = s.at("mean_los").get<double>();
            const auto& occ     = s.at("occupancy");
            site.occupancy.first_day = occ.at("first_day").get<std::size_t>();
            site.occupancy.rho       = occ.at("rho").get<std::vector<double>>();
            site.occupancy.rho_bar   = occ.at("rho_bar").get<double>();
            site.occupancy.delta     = occ.at("delta").get<std::vector<double>>();
            site.plan                = plan_from_json(s.at("plan"));
            if (!s.at("capacity").is_null()) {
                site.capacity = s.at("capacity").get<int>();
            }
            snapshot.sites.push_back(std::move(site));
        }
        return snapshot;
    }
    catch (const json::exception& e) {
        throw Error(ErrorCode::SchemaError, std::string("malformed snapshot: ") + e.what());
    }
}

ScenarioOutcome run_scenario(const SiteSnapshot& site, const ScenarioSpec& spec, const PipelineOptions& options)
{
    ScenarioOutcome out;
    const auto base = site.inputs();
    out.inputs      = apply_scenario(base, spec);
    out.occupancy   = expected_occupancy(out.inputs.lambda_t, out.inputs.model, options.warm_up);

    // the average strategy uses raw history means, rescaled by the scenario's effect on the smoothed tracks
    const std::size_t n = base.lambda_t.size();
    const double lambda_ratio =
        track_mean(out.inputs.lambda_t, n) / track_mean(base.lambda_t, n);
    const double mu_ratio = track_mean(out.inputs.model.mu_t, n) / track_mean(base.model.mu_t, n);
    const auto targets    = options.targets();
    out.plan = make_plan(site.lambda_bar * lambda_ratio, site.sample_mean * mu_ratio, out.occupancy, targets,
                         options.mode);
    return out;
}

} // namespace bedcast
