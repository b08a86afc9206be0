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
#include "bedcast/config.h"
#include "bedcast/error.h"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace bedcast
{

namespace
{

using nlohmann::json;

[[noreturn]] void schema_error(const json::json_pointer& at, const std::string& message)
{
    throw Error(ErrorCode::SchemaError, (at.empty() ? std::string("/") : at.to_string()) + ": " + message);
}

void allow_keys(const json& j, const json::json_pointer& at, std::initializer_list<const char*> keys)
{
    if (!j.is_object()) {
        schema_error(at, "expected an object");
    }
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            schema_error(at / key, "unknown key");
        }
    }
}

double get_number(const json& j, const json::json_pointer& at)
{
    if (!j.is_number()) {
        schema_error(at, "expected a number");
    }
    return j.get<double>();
}

double get_in_range(const json& j, const json::json_pointer& at, double lo, double hi, bool lo_open, bool hi_open)
{
    const double v = get_number(j, at);
    const bool ok  = (lo_open ? v > lo : v >= lo) && (hi_open ? v < hi : v <= hi);
    if (!ok) {
        schema_error(at, "value " + j.dump() + " out of range " + (lo_open ? "(" : "[") + json(lo).dump() + ", " +
                             json(hi).dump() + (hi_open ? ")" : "]"));
    }
    return v;
}

long get_integer(const json& j, const json::json_pointer& at, long lo)
{
    if (!j.is_number_integer()) {
        schema_error(at, "expected an integer");
    }
    const long v = j.get<long>();
    if (v < lo) {
        schema_error(at, "must be at least " + std::to_string(lo));
    }
    return v;
}

std::string get_string(const json& j, const json::json_pointer& at)
{
    if (!j.is_string()) {
        schema_error(at, "expected a string");
    }
    return j.get<std::string>();
}

Date get_date(const json& j, const json::json_pointer& at)
{
    const auto d = parse_date(get_string(j, at));
    if (!d) {
        schema_error(at, "expected a YYYY-MM-DD date");
    }
    return *d;
}

DateWindow get_window(const json& j, const json::json_pointer& at)
{
    allow_keys(j, at, {"start", "end"});
    if (!j.contains("start") || !j.contains("end")) {
        schema_error(at, "needs start and end");
    }
    DateWindow w{get_date(j["start"], at / "start"), get_date(j["end"], at / "end")};
    if (w.last < w.first) {
        schema_error(at, "end precedes start");
    }
    return w;
}

std::vector<int> get_years(const json& j, const json::json_pointer& at)
{
    if (!j.is_array() || j.empty()) {
        schema_error(at, "expected a non-empty array of years");
    }
    std::vector<int> years;
    for (std::size_t i = 0; i < j.size(); ++i) {
        years.push_back(static_cast<int>(get_integer(j[i], at / i, 1)));
    }
    return years;
}

double get_multiplier(const json& j, const json::json_pointer& at, bool zero_allowed)
{
    const double v = get_number(j, at);
    if (!std::isfinite(v) || v < 0.0 || (!zero_allowed && v == 0.0)) {
        schema_error(at, zero_allowed ? "must be finite and non-negative" : "must be finite and positive");
    }
    return v;
}

void parse_projection(const json& j, const json::json_pointer& at, BedcastConfig& c)
{
    allow_keys(j, at,
               {"years", "reference_years", "profile_years", "births", "births_csv", "eta", "psi", "runs", "R",
                "seed", "mode"});
    auto& p = c.projection;
    if (j.contains("years")) {
        const auto years = get_years(j["years"], at / "years");
        if (years.size() != 2 || years[1] < years[0]) {
            schema_error(at / "years", "expected [first, last] with first <= last");
        }
        p.y_min = years[0];
        p.y_max = years[1];
    }
    if (j.contains("reference_years")) {
        p.y_ref_omega = get_years(j["reference_years"], at / "reference_years");
    }
    if (j.contains("profile_years")) {
        p.y_ref_nu = get_years(j["profile_years"], at / "profile_years");
    }
    if (j.contains("births")) {
        const auto& b = j["births"];
        if (!b.is_object()) {
            schema_error(at / "births", "expected an object mapping year to births");
        }
        for (const auto& [key, value] : b.items()) {
            int year = 0;
            try {
                std::size_t used = 0;
                year             = std::stoi(key, &used);
                if (used != key.size()) {
                    throw std::invalid_argument(key);
                }
            }
            catch (const std::exception&) {
                schema_error(at / "births" / key, "year keys must be integers");
            }
            p.births[year] = get_multiplier(value, at / "births" / key, false);
        }
    }
    if (j.contains("births_csv")) {
        c.births_csv = get_string(j["births_csv"], at / "births_csv");
    }
    if (j.contains("eta")) {
        p.eta = get_number(j["eta"], at / "eta");
    }
    if (j.contains("psi")) {
        p.psi = get_multiplier(j["psi"], at / "psi", false);
    }
    for (const char* key : {"runs", "R"}) {
        if (j.contains(key)) {
            p.runs = static_cast<int>(get_integer(j[key], at / key, 1));
        }
    }
    if (j.contains("seed")) {
        p.seed = static_cast<std::uint64_t>(get_integer(j["seed"], at / "seed", 0));
    }
}

} // namespace

ScenarioSpec ScenarioSettings::spec_for(Date start, std::size_t days) const
{
    ScenarioSpec spec{beta_lambda, beta_mu, beta_sigma2, std::nullopt};
    if (date_range && days > 0) {
        const long first = std::max(0L, static_cast<long>((date_range->first - start).count()));
        const long last  = std::min(static_cast<long>(days) - 1, static_cast<long>((date_range->last - start).count()));
        if (last < first) {
            throw Error(ErrorCode::OutOfRange, "scenario date range does not overlap the site history");
        }
        spec.date_range = DayRange{static_cast<std::size_t>(first), static_cast<std::size_t>(last)};
    }
    return spec;
}

BedcastConfig parse_config(const std::string& text)
{
    json j;
    try {
        j = text.find_first_not_of(" \t\r\n") == std::string::npos ? json::object() : json::parse(text);
    }
    catch (const json::parse_error& e) {
        throw Error(ErrorCode::SchemaError, std::string("/: invalid JSON: ") + e.what());
    }
    const json::json_pointer root;
    allow_keys(j, root,
               {"input", "columns", "window", "gamma", "alpha", "alphas", "overflow_mode", "warm_up", "capacities",
                "scenario", "projection", "simulation", "seed", "eta", "psi", "runs", "R"});

    BedcastConfig c;
    if (j.contains("input")) {
        c.input = get_string(j["input"], root / "input");
    }
    if (j.contains("columns")) {
        const auto at = root / "columns";
        allow_keys(j["columns"], at, {"site_id", "admit_date", "los_days"});
        if (j["columns"].contains("site_id")) {
            c.columns.site_id = get_string(j["columns"]["site_id"], at / "site_id");
        }
        if (j["columns"].contains("admit_date")) {
            c.columns.admit_date = get_string(j["columns"]["admit_date"], at / "admit_date");
        }
        if (j["columns"].contains("los_days")) {
            c.columns.los_days = get_string(j["columns"]["los_days"], at / "los_days");
        }
    }
    if (j.contains("window")) {
        c.pipeline.window = get_window(j["window"], root / "window");
    }
    if (j.contains("gamma")) {
        c.pipeline.gamma = get_in_range(j["gamma"], root / "gamma", 0.0, 1.0, true, false);
    }
    if (j.contains("alpha") && j.contains("alphas")) {
        schema_error(root / "alphas", "give either alpha or alphas");
    }
    if (j.contains("alpha")) {
        c.pipeline.alphas = {get_in_range(j["alpha"], root / "alpha", 0.0, 1.0, true, true)};
    }
    if (j.contains("alphas")) {
        const auto at = root / "alphas";
        if (!j["alphas"].is_array() || j["alphas"].empty()) {
            schema_error(at, "expected a non-empty array");
        }
        c.pipeline.alphas.clear();
        for (std::size_t i = 0; i < j["alphas"].size(); ++i) {
            c.pipeline.alphas.push_back(get_in_range(j["alphas"][i], at / i, 0.0, 1.0, true, true));
        }
    }
    if (j.contains("overflow_mode")) {
        const auto mode = get_string(j["overflow_mode"], root / "overflow_mode");
        if (mode == "averaged") {
            c.pipeline.mode = OverflowMode::Averaged;
        }
        else if (mode == "per_day_max") {
            c.pipeline.mode = OverflowMode::PerDayMax;
        }
        else {
            schema_error(root / "overflow_mode", "expected \"averaged\" or \"per_day_max\"");
        }
    }
    if (j.contains("warm_up")) {
        const auto mode = get_string(j["warm_up"], root / "warm_up");
        if (mode == "backfill") {
            c.pipeline.warm_up = WarmUp::BackFill;
        }
        else if (mode == "truncate") {
            c.pipeline.warm_up = WarmUp::Truncate;
        }
        else {
            schema_error(root / "warm_up", "expected \"backfill\" or \"truncate\"");
        }
    }
    if (j.contains("capacities")) {
        const auto at = root / "capacities";
        if (!j["capacities"].is_object()) {
            schema_error(at, "expected an object mapping site to beds");
        }
        for (const auto& [site, beds] : j["capacities"].items()) {
            c.capacities[site] = static_cast<int>(get_integer(beds, at / site, 1));
        }
    }
    if (j.contains("scenario")) {
        const auto at = root / "scenario";
        const auto& s = j["scenario"];
        allow_keys(s, at, {"beta_lambda", "beta_mu", "beta_sigma2", "date_range"});
        if (s.contains("beta_lambda")) {
            c.scenario.beta_lambda = get_multiplier(s["beta_lambda"], at / "beta_lambda", false);
        }
        if (s.contains("beta_mu")) {
            c.scenario.beta_mu = get_multiplier(s["beta_mu"], at / "beta_mu", false);
        }
        if (s.contains("beta_sigma2")) {
            c.scenario.beta_sigma2 = get_multiplier(s["beta_sigma2"], at / "beta_sigma2", true);
        }
        if (s.contains("date_range")) {
            c.scenario.date_range = get_window(s["date_range"], at / "date_range");
        }
    }
    if (j.contains("projection")) {
        parse_projection(j["projection"], root / "projection", c);
    }
    // top-level shorthands for the projection knobs
    if (j.contains("eta")) {
        c.projection.eta = get_number(j["eta"], root / "eta");
    }
    if (j.contains("psi")) {
        c.projection.psi = get_multiplier(j["psi"], root / "psi", false);
    }
    for (const char* key : {"runs", "R"}) {
        if (j.contains(key)) {
            c.projection.runs = static_cast<int>(get_integer(j[key], root / key, 1));
        }
    }
    if (j.contains("simulation")) {
        const auto at = root / "simulation";
        allow_keys(j["simulation"], at, {"replications", "horizon"});
        if (j["simulation"].contains("replications")) {
            c.simulation.replications = static_cast<int>(get_integer(j["simulation"]["replications"], at / "replications", 1));
        }
        if (j["simulation"].contains("horizon")) {
            c.simulation.horizon = static_cast<int>(get_integer(j["simulation"]["horizon"], at / "horizon", 1));
        }
    }
    if (j.contains("seed")) {
        c.seed = static_cast<std::uint64_t>(get_integer(j["seed"], root / "seed", 0));
        if (!(j.contains("projection") && j["projection"].contains("seed"))) {
            c.projection.seed = c.seed;
        }
    }
    c.projection.gamma  = c.pipeline.gamma;
    c.projection.alphas = c.pipeline.alphas;
    c.projection.mode   = c.pipeline.mode;
    return c;
}

BedcastConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read config file " + path);
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

} // namespace bedcast
