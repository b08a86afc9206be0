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
#include "bedcast/api.h"
#include "bedcast/error.h"
#include "bedcast/scenario.h"

#include <json.hpp>

#include <cmath>
#include <iostream>
#include <limits>
#include <set>

namespace bedcast
{

namespace
{

using nlohmann::json;

ApiResponse json_response(int status, const json& body)
{
    return {status, body.dump(), "application/json"};
}

ApiResponse error_response(int status, const std::string& code, const std::string& message)
{
    return json_response(status, {{"error", code}, {"message", message}});
}

int status_for(ErrorCode code)
{
    switch (code) {
    case ErrorCode::SchemaError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::OutOfRange:
    case ErrorCode::BadDate:
    case ErrorCode::BadNumber:
        return 400;
    case ErrorCode::FamilyMismatch:
    case ErrorCode::MissingBirths:
    case ErrorCode::MissingHistory:
    case ErrorCode::ZeroYearTotal:
    case ErrorCode::DomainError:
    case ErrorCode::SearchExhausted:
    case ErrorCode::CoverageError:
    case ErrorCode::EmptyRuns:
        return 422;
    default:
        return 500;
    }
}

ApiResponse internal_error(const std::string& detail)
{
    const auto id = fnv1a_hex(detail);
    std::cerr << "internal error " << id << ": " << detail << '\n';
    return error_response(500, "Internal", "internal error, reference " + id);
}

ApiResponse from_error(const Error& e)
{
    const int status = status_for(e.code());
    if (status == 500) {
        return internal_error(e.what());
    }
    return error_response(status, std::string(to_string(e.code())), e.what());
}

[[noreturn]] void bad_request(const std::string& message)
{
    throw Error(ErrorCode::SchemaError, message);
}

json parse_body(const std::string& body)
{
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
        return json::object();
    }
    try {
        json j = json::parse(body);
        if (!j.is_object()) {
            bad_request("/: request body must be a JSON object");
        }
        return j;
    }
    catch (const json::parse_error& e) {
        bad_request(std::string("/: invalid JSON: ") + e.what());
    }
}

void allow_keys(const json& j, std::initializer_list<const char*> keys)
{
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            bad_request("/" + key + ": unknown key");
        }
    }
}

double number_in(const json& j, const char* key, double fallback, double lo, double hi, bool lo_open, bool hi_open)
{
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number()) {
        bad_request(std::string("/") + key + ": expected a number");
    }
    const double v = j[key].get<double>();
    if (!std::isfinite(v) || !(lo_open ? v > lo : v >= lo) || !(hi_open ? v < hi : v <= hi)) {
        bad_request(std::string("/") + key + ": value out of range");
    }
    return v;
}

long integer_in(const json& j, const char* key, long fallback, long lo)
{
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_number_integer() || j[key].get<long>() < lo) {
        bad_request(std::string("/") + key + ": expected an integer >= " + std::to_string(lo));
    }
    return j[key].get<long>();
}

OverflowMode mode_in(const json& j, OverflowMode fallback)
{
    if (!j.contains("mode")) {
        return fallback;
    }
    if (j["mode"] == "averaged") {
        return OverflowMode::Averaged;
    }
    if (j["mode"] == "per_day_max") {
        return OverflowMode::PerDayMax;
    }
    bad_request("/mode: expected \"averaged\" or \"per_day_max\"");
}

std::vector<int> years_in(const json& j, const char* key, std::vector<int> fallback)
{
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j[key].is_array() || j[key].empty()) {
        bad_request(std::string("/") + key + ": expected a non-empty array of years");
    }
    std::vector<int> out;
    for (const auto& y : j[key]) {
        if (!y.is_number_integer()) {
            bad_request(std::string("/") + key + ": years must be integers");
        }
        out.push_back(y.get<int>());
    }
    return out;
}

json plan_json(const CapacityPlan& plan)
{
    return json::parse(plan_to_json(plan, -1));
}

std::vector<std::string> split_path(const std::string& path)
{
    std::vector<std::string> parts;
    std::string current;
    for (char c : path.substr(0, path.find('?'))) {
        if (c == '/') {
            if (!current.empty()) {
                parts.push_back(current);
            }
            current.clear();
        }
        else {
            current += c;
        }
    }
    if (!current.empty()) {
        parts.push_back(current);
    }
    return parts;
}

/// Beds under a named strategy for a computed plan and its occupancy.
int strategy_value(const std::string& label, const CapacityPlan& plan, const OccupancySeries& rho, double gamma,
                   OverflowMode mode)
{
    const auto strategy = parse_strategy(label);
    if (!strategy) {
        bad_request("/strategies: unknown strategy '" + label + "'");
    }
    switch (*strategy) {
    case Strategy::Average:
        return plan.b_average;
    case Strategy::Max:
        return plan.b_max;
    case Strategy::Overflow05:
    case Strategy::Overflow01: {
        const double alpha = *strategy == Strategy::Overflow05 ? 0.05 : 0.01;
        if (auto it = plan.b_overflow.find({gamma, alpha}); it != plan.b_overflow.end()) {
            return it->second;
        }
        return b_overflow(rho, gamma, alpha, mode);
    }
    }
    return 0;
}

} // namespace

ApiService::ApiService(std::shared_ptr<const ModelSnapshot> snapshot, ProjectionConfig projection)
    : m_snapshot(std::move(snapshot))
    , m_projection(std::move(projection))
{
    if (!m_snapshot) {
        throw Error(ErrorCode::InvalidArgument, "API needs a snapshot");
    }
}

ApiService::~ApiService()
{
    wait_for_jobs();
}

void ApiService::wait_for_jobs()
{
    std::vector<std::jthread> workers;
    {
        std::lock_guard lock(m_jobs_mutex);
        workers.swap(m_workers);
    }
    for (auto& w : workers) {
        if (w.joinable()) {
            w.join();
        }
    }
}

ApiResponse ApiService::handle(const ApiRequest& request)
{
    try {
        return route(request);
    }
    catch (const Error& e) {
        return from_error(e);
    }
    catch (const std::exception& e) {
        return internal_error(e.what());
    }
}

ApiResponse ApiService::route(const ApiRequest& request)
{
    const auto parts       = split_path(request.path);
    const std::string& m   = request.method;
    auto method_not_allowed = [] { return error_response(405, "MethodNotAllowed", "method not allowed"); };

    if (m == "OPTIONS") {
        return {204, "", "application/json"};
    }
    if (parts.size() == 1 && parts[0] == "healthz") {
        return m == "GET" ? json_response(200, {{"status", "ok"}, {"snapshot", m_snapshot->id}})
                          : method_not_allowed();
    }
    if (parts.size() == 1 && parts[0] == "sites") {
        return m == "GET" ? sites() : method_not_allowed();
    }
    if (parts.size() == 3 && parts[0] == "sites") {
        const SiteSnapshot* site = m_snapshot->find(parts[1]);
        if (!site) {
            return error_response(404, "NotFound", "unknown site '" + parts[1] + "'");
        }
        if (parts[2] == "occupancy") {
            return m == "GET" ? occupancy(*site) : method_not_allowed();
        }
        if (parts[2] == "plan") {
            return m == "POST" ? plan(*site, request.body) : method_not_allowed();
        }
        if (parts[2] == "scenario") {
            return m == "POST" ? scenario(*site, request.body) : method_not_allowed();
        }
    }
    if (parts.size() == 1 && parts[0] == "project") {
        return m == "POST" ? project(request.body) : method_not_allowed();
    }
    if (parts.size() == 2 && parts[0] == "jobs") {
        return m == "GET" ? job(parts[1]) : method_not_allowed();
    }
    return error_response(404, "NotFound", "no route for " + request.path);
}

ApiResponse ApiService::sites() const
{
    auto list = json::array();
    for (const auto& s : m_snapshot->sites) {
        list.push_back({{"site_id", s.site_id},
                        {"start", format_date(s.start)},
                        {"days", s.admit_count.size()},
                        {"family", to_string(s.model.family)},
                        {"kappa", s.model.kappa ? json(*s.model.kappa) : json(nullptr)},
                        {"s_max", s.model.s_max},
                        {"rmse", s.model.rmse},
                        {"kappa_cv", s.model.kappa_cv},
                        {"rho_bar", s.occupancy.rho_bar},
                        {"capacity", s.capacity ? json(*s.capacity) : json(nullptr)},
                        {"plan", plan_json(s.plan)}});
    }
    return json_response(200, {{"snapshot", m_snapshot->id}, {"sites", list}});
}

ApiResponse ApiService::occupancy(const SiteSnapshot& site) const
{
    const auto dates = site.dates();
    std::vector<std::string> occ_dates(dates.begin() + static_cast<long>(site.occupancy.first_day), dates.end());
    return json_response(200, {{"site_id", site.site_id},
                               {"dates", occ_dates},
                               {"rho", site.occupancy.rho},
                               {"rho_bar", site.occupancy.rho_bar},
                               {"delta", site.occupancy.delta},
                               {"census", std::vector<int>(site.census.begin() +
                                                               static_cast<long>(site.occupancy.first_day),
                                                           site.census.end())}});
}

ApiResponse ApiService::plan(const SiteSnapshot& site, const std::string& body) const
{
    const json j = parse_body(body);
    allow_keys(j, {"gamma", "alpha", "mode"});
    const auto& options = m_snapshot->options;
    const double gamma  = number_in(j, "gamma", options.gamma, 0.0, 1.0, true, false);
    const double alpha  = number_in(j, "alpha", 0.05, 0.0, 1.0, true, true);
    const auto mode     = mode_in(j, options.mode);
    const int beds      = b_overflow(site.occupancy, gamma, alpha, mode);
    return json_response(200, {{"site_id", site.site_id}, {"gamma", gamma}, {"alpha", alpha}, {"beds", beds}});
}

ApiResponse ApiService::scenario(const SiteSnapshot& site, const std::string& body) const
{
    const json j = parse_body(body);
    allow_keys(j, {"beta_lambda", "beta_mu", "beta_sigma2", "date_range", "strategies", "gamma", "mode"});
    const double inf = std::numeric_limits<double>::infinity();
    ScenarioSpec spec;
    spec.beta_lambda = number_in(j, "beta_lambda", 1.0, 0.0, inf, true, true);
    spec.beta_mu     = number_in(j, "beta_mu", 1.0, 0.0, inf, true, true);
    spec.beta_sigma2 = number_in(j, "beta_sigma2", 1.0, 0.0, inf, false, true);
    if (j.contains("date_range")) {
        const auto& r = j["date_range"];
        if (!r.is_object() || !r.contains("start") || !r.contains("end") || !r["start"].is_string() ||
            !r["end"].is_string()) {
            bad_request("/date_range: expected {start, end} dates");
        }
        const auto first = parse_date(r["start"].get<std::string>());
        const auto last  = parse_date(r["end"].get<std::string>());
        if (!first || !last || *last < *first) {
            bad_request("/date_range: expected start <= end as YYYY-MM-DD");
        }
        const long n  = static_cast<long>(site.admit_count.size());
        const long lo = std::max(0L, static_cast<long>((*first - site.start).count()));
        const long hi = std::min(n - 1, static_cast<long>((*last - site.start).count()));
        if (hi < lo) {
            throw Error(ErrorCode::OutOfRange, "date range does not overlap the site history");
        }
        spec.date_range = DayRange{static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
    }
    std::vector<std::string> labels = {"B_average", "B_0.05", "B_0.01", "B_max"};
    if (j.contains("strategies")) {
        if (!j["strategies"].is_array()) {
            bad_request("/strategies: expected an array of strategy names");
        }
        labels.clear();
        for (const auto& s : j["strategies"]) {
            if (!s.is_string()) {
                bad_request("/strategies: expected strategy names");
            }
            labels.push_back(s.get<std::string>());
        }
    }

    PipelineOptions options = m_snapshot->options;
    options.gamma           = number_in(j, "gamma", options.gamma, 0.0, 1.0, true, false);
    options.mode            = mode_in(j, options.mode);

    const auto outcome = run_scenario(site, spec, options);
    const CapacityPlan& baseline_plan = site.plan;
    auto rows = json::array();
    for (const auto& label : labels) {
        const int before = strategy_value(label, baseline_plan, site.occupancy, options.gamma, options.mode);
        const int after  = strategy_value(label, outcome.plan, outcome.occupancy, options.gamma, options.mode);
        rows.push_back({{"strategy", label},
                        {"baseline", before},
                        {"scenario", after},
                        {"pct_change", before > 0 ? 100.0 * (after - before) / before : 0.0}});
    }
    std::vector<double> delta(outcome.occupancy.rho.size());
    for (std::size_t t = 0; t < delta.size() && t < site.occupancy.rho.size(); ++t) {
        delta[t] = outcome.occupancy.rho[t] - site.occupancy.rho[t];
    }
    return json_response(200, {{"site_id", site.site_id},
                               {"gamma", options.gamma},
                               {"strategies", rows},
                               {"plan", plan_json(outcome.plan)},
                               {"rho", outcome.occupancy.rho},
                               {"rho_delta", delta}});
}

ApiResponse ApiService::project(const std::string& body)
{
    const json j = parse_body(body);
    allow_keys(j, {"eta", "psi", "runs", "seed", "births", "years", "reference_years", "profile_years"});
    const double inf   = std::numeric_limits<double>::infinity();
    ProjectionConfig c = m_projection;
    c.eta              = number_in(j, "eta", c.eta, -inf, inf, true, true);
    c.psi              = number_in(j, "psi", c.psi, 0.0, inf, true, true);
    c.runs             = static_cast<int>(integer_in(j, "runs", c.runs, 1));
    c.seed             = static_cast<std::uint64_t>(integer_in(j, "seed", static_cast<long>(c.seed), 0));
    const auto years   = years_in(j, "years", {c.y_min, c.y_max});
    if (years.size() != 2 || years[1] < years[0]) {
        bad_request("/years: expected [first, last]");
    }
    c.y_min       = years[0];
    c.y_max       = years[1];
    c.y_ref_omega = years_in(j, "reference_years", c.y_ref_omega);
    c.y_ref_nu    = years_in(j, "profile_years", c.y_ref_nu);
    if (j.contains("births")) {
        if (!j["births"].is_object()) {
            bad_request("/births: expected an object mapping year to births");
        }
        for (const auto& [key, value] : j["births"].items()) {
            if (!value.is_number() || !(value.get<double>() > 0.0)) {
                bad_request("/births/" + key + ": expected a positive number");
            }
            try {
                c.births[std::stoi(key)] = value.get<double>();
            }
            catch (const std::exception&) {
                bad_request("/births/" + key + ": year keys must be integers");
            }
        }
    }
    c.gamma  = m_snapshot->options.gamma;
    c.alphas = m_snapshot->options.alphas;
    c.mode   = m_snapshot->options.mode;
    validate(c);
    const auto history = m_snapshot->history();
    // cheap checks up front so a job never fails on bad input
    project_admissions(c, history);
    site_shares(history, c.y_ref_omega);

    if (c.runs <= kSynchronousRunLimit) {
        return {200, projection_to_json(run_projection(c, history), -1), "application/json"};
    }
    std::lock_guard lock(m_jobs_mutex);
    const std::string id = "job-" + std::to_string(m_next_job++);
    m_jobs[id]           = Job{};
    m_workers.emplace_back([this, id, c, history] {
        Job done;
        try {
            done.result = projection_to_json(run_projection(c, history), -1);
            done.status = "done";
        }
        catch (const Error& e) {
            done.status       = "failed";
            done.error        = e.what();
            done.error_status = status_for(e.code());
        }
        catch (const std::exception& e) {
            done.status       = "failed";
            done.error        = e.what();
            done.error_status = 500;
        }
        std::lock_guard inner(m_jobs_mutex);
        m_jobs[id] = std::move(done);
    });
    return json_response(202, {{"job_id", id}, {"status", "running"}});
}

ApiResponse ApiService::job(const std::string& id) const
{
    std::lock_guard lock(m_jobs_mutex);
    const auto it = m_jobs.find(id);
    if (it == m_jobs.end()) {
        return error_response(404, "NotFound", "unknown job '" + id + "'");
    }
    json out{{"job_id", id}, {"status", it->second.status}};
    if (it->second.status == "done") {
        out["result"] = json::parse(it->second.result);
    }
    if (it->second.status == "failed") {
        out["error"] = it->second.error;
    }
    return json_response(200, out);
}

} // namespace bedcast
