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
#include "bedcast/cli.h"
#include "bedcast/api.h"
#include "bedcast/config.h"
#include "bedcast/diagnostics.h"
#include "bedcast/error.h"
#include "bedcast/pipeline.h"
#include "bedcast/simulate.h"
#include "bedcast/stats.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace bedcast
{

namespace
{

namespace fs = std::filesystem;
using nlohmann::json;

/// Flag values shared by the subcommands; unset flags fall back to the config file.
struct Flags {
    std::string input;
    std::string config;
    std::vector<std::string> sites;
    std::optional<double> gamma;
    std::vector<double> alphas;
    std::optional<double> beta_lambda;
    std::optional<double> beta_mu;
    std::optional<double> beta_sigma2;
    std::optional<double> eta;
    std::optional<double> psi;
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::string out;
    // project
    std::string births;
    std::vector<int> years;
    // scenario
    bool sensitivity = false;
    // simulate
    std::optional<int> replications;
    int days           = 730;
    double lambda      = 2.5;
    double amplitude   = 0.25;
    double mu          = 10.0;
    std::string family = "Exponential";
    std::optional<double> kappa;
    double sigma2 = 0.0;
    int num_sites = 1;
    std::string start = "2020-01-01";
    // serve
    std::string host = "127.0.0.1";
    int port         = 8080;
    std::string snapshot;
    bool save_snapshot = false;
};

/// Output directory plus the manifest of everything read and written.
class Run
{
public:
    Run(std::string command, fs::path out_dir, std::ostream& out)
        : m_command(std::move(command))
        , m_dir(std::move(out_dir))
        , m_out(out)
    {
        fs::create_directories(m_dir);
    }

    void record_input(const std::string& role, const std::string& path, const std::string& content)
    {
        m_inputs.push_back({{"role", role}, {"path", path}, {"fnv1a", fnv1a_hex(content)}});
    }

    void set_seed(std::uint64_t seed)
    {
        m_seed = seed;
    }

    void write(const std::string& name, const std::string& content)
    {
        const auto path = m_dir / name;
        std::ofstream file(path, std::ios::binary);
        if (!file) {
            throw Error(ErrorCode::IoError, "cannot write " + path.string());
        }
        file << content;
        m_outputs[name] = fnv1a_hex(content);
    }

    template <class Writer>
    void write_with(const std::string& name, Writer&& writer)
    {
        std::ostringstream s;
        s << std::setprecision(10);
        writer(s);
        write(name, s.str());
    }

    void finish()
    {
        json manifest{{"command", m_command},
                      {"inputs", m_inputs},
                      {"seed", m_seed ? json(*m_seed) : json(nullptr)},
                      {"outputs", m_outputs}};
        std::ostringstream s;
        s << manifest.dump(2) << '\n';
        const auto text = s.str();
        std::ofstream file(m_dir / "manifest.json", std::ios::binary);
        file << text;
        if (!file) {
            throw Error(ErrorCode::IoError, "cannot write manifest in " + m_dir.string());
        }
    }

    std::ostream& out()
    {
        return m_out;
    }

private:
    std::string m_command;
    fs::path m_dir;
    std::ostream& m_out;
    json m_inputs = json::array();
    std::optional<std::uint64_t> m_seed;
    std::map<std::string, std::string> m_outputs;
};

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read " + path);
    }
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

BedcastConfig resolve_config(const Flags& flags, Run& run)
{
    BedcastConfig c;
    if (!flags.config.empty()) {
        const auto text = read_file(flags.config);
        run.record_input("config", flags.config, text);
        c = parse_config(text);
    }
    if (flags.gamma) {
        c.pipeline.gamma = *flags.gamma;
    }
    if (!flags.alphas.empty()) {
        c.pipeline.alphas = flags.alphas;
    }
    if (flags.beta_lambda) {
        c.scenario.beta_lambda = *flags.beta_lambda;
    }
    if (flags.beta_mu) {
        c.scenario.beta_mu = *flags.beta_mu;
    }
    if (flags.beta_sigma2) {
        c.scenario.beta_sigma2 = *flags.beta_sigma2;
    }
    if (flags.eta) {
        c.projection.eta = *flags.eta;
    }
    if (flags.psi) {
        c.projection.psi = *flags.psi;
    }
    if (flags.runs) {
        c.projection.runs = *flags.runs;
    }
    if (flags.seed) {
        c.seed            = *flags.seed;
        c.projection.seed = *flags.seed;
    }
    if (flags.replications) {
        c.simulation.replications = *flags.replications;
    }
    if (!flags.input.empty()) {
        c.input = flags.input;
    }
    c.projection.gamma  = c.pipeline.gamma;
    c.projection.alphas = c.pipeline.alphas;
    c.projection.mode   = c.pipeline.mode;
    run.set_seed(c.seed);
    return c;
}

std::vector<AdmissionRecord> load_records(const BedcastConfig& c, Run& run)
{
    if (!c.input) {
        throw CLI::RequiredError("--input (or \"input\" in the config)");
    }
    const auto text = read_file(*c.input);
    run.record_input("admissions", *c.input, text);
    std::istringstream in(text);
    return parse_admissions(in, c.columns);
}

std::vector<std::string> selected_sites(const std::vector<AdmissionRecord>& records, const Flags& flags)
{
    const auto all = site_ids(records);
    if (flags.sites.empty()) {
        if (all.empty()) {
            throw Error(ErrorCode::EmptyWindow, "input has no admission records");
        }
        return all;
    }
    for (const auto& s : flags.sites) {
        if (std::find(all.begin(), all.end(), s) == all.end()) {
            throw Error(ErrorCode::EmptyWindow, "site '" + s + "' has no admission records");
        }
    }
    return flags.sites;
}

std::vector<std::string> series_dates(const DailySiteSeries& series)
{
    std::vector<std::string> dates;
    for (std::size_t t = 0; t < series.size(); ++t) {
        dates.push_back(format_date(series.date_at(t)));
    }
    return dates;
}

std::string utc_timestamp()
{
    const auto now  = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    const auto day  = std::chrono::floor<std::chrono::days>(now);
    const std::chrono::hh_mm_ss time(now - day);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "T%02d:%02d:%02dZ", static_cast<int>(time.hours().count()),
                  static_cast<int>(time.minutes().count()), static_cast<int>(time.seconds().count()));
    return format_date(day) + buf;
}

std::string json_line(const json& j)
{
    return j.dump(2) + "\n";
}

// --- subcommands -----------------------------------------------------------------------------

void cmd_ingest(const Flags& flags, Run& run)
{
    const auto c       = resolve_config(flags, run);
    const auto records = load_records(c, run);
    json summary       = json::array();
    for (const auto& site : selected_sites(records, flags)) {
        const auto window = c.pipeline.window ? *c.pipeline.window : site_window(records, site);
        const auto series = build_daily_series(records, site, window);
        const auto filled = fill_gaps(series.mean_los);
        run.write_with("daily_" + site + ".csv", [&](std::ostream& s) { write_daily_series_csv(s, series, filled); });
        const auto samples = los_samples(records, site, window);
        summary.push_back({{"site_id", site},
                           {"start", format_date(window.first)},
                           {"end", format_date(window.last)},
                           {"days", series.size()},
                           {"admissions", samples.size()},
                           {"imputed_days", std::count(filled.imputed.begin(), filled.imputed.end(), true)}});
    }
    run.write("ingest.json", json_line(summary));
    run.out() << summary.dump(2) << '\n';
}

void cmd_decompose(const Flags& flags, Run& run)
{
    const auto c       = resolve_config(flags, run);
    const auto records = load_records(c, run);
    json summary       = json::array();
    for (const auto& site : selected_sites(records, flags)) {
        const auto fit   = fit_site(records, site, c.pipeline);
        const auto dates = series_dates(fit.series);
        run.write_with("decomp_arrivals_" + site + ".csv",
                       [&](std::ostream& s) { write_decomposition_csv(s, dates, fit.arrivals.decomposition); });
        run.write_with("decomp_los_" + site + ".csv",
                       [&](std::ostream& s) { write_decomposition_csv(s, dates, fit.los.decomposition); });
        run.write_with("variance_" + site + ".csv", [&](std::ostream& s) {
            s << "date,sigma2\n";
            for (std::size_t t = 0; t < fit.variance.sigma2.size(); ++t) {
                s << dates[t] << ',' << fit.variance.sigma2[t] << '\n';
            }
        });
        run.write_with("grid_" + site + ".csv", [&](std::ostream& s) {
            const auto grid = stl_grid();
            s << "seasonal_window,trend_window,seasonal_degree,trend_degree,robust,arrivals_residual_std,"
                 "los_residual_std\n";
            for (std::size_t k = 0; k < grid.size(); ++k) {
                const auto& g = grid[k];
                s << g.seasonal_window << ',' << g.trend_window << ',' << g.seasonal_degree << ',' << g.trend_degree
                  << ',' << (g.robust ? "true" : "false") << ',' << fit.arrivals.residual_stds[k] << ','
                  << fit.los.residual_stds[k] << '\n';
            }
        });
        summary.push_back({{"site_id", site},
                           {"arrivals", to_string(fit.arrivals.best)},
                           {"arrivals_residual_std", fit.arrivals.decomposition.residual_std},
                           {"los", to_string(fit.los.best)},
                           {"los_residual_std", fit.los.decomposition.residual_std},
                           {"variance_window", fit.variance.window}});
    }
    run.write("decompose.json", json_line(summary));
    run.out() << summary.dump(2) << '\n';
}

void cmd_fit(const Flags& flags, Run& run)
{
    const auto c       = resolve_config(flags, run);
    const auto records = load_records(c, run);
    json summary       = json::array();
    for (const auto& site : selected_sites(records, flags)) {
        const auto fit = fit_site(records, site, c.pipeline);
        run.write_with("model_" + site + ".json", [&](std::ostream& s) { write_model_json(s, fit.model); });
        run.write_with("survival_" + site + ".csv", [&](std::ostream& s) { write_survival_csv(s, fit.selection); });
        json candidates = json::array();
        for (const auto& cand : fit.selection.candidates) {
            candidates.push_back({{"family", to_string(cand.family)},
                                  {"rmse", cand.fit ? json(cand.rmse) : json(nullptr)},
                                  {"failure", cand.failure}});
        }
        summary.push_back({{"site_id", site},
                           {"family", to_string(fit.model.family)},
                           {"kappa", fit.model.kappa ? json(*fit.model.kappa) : json(nullptr)},
                           {"s_max", fit.model.s_max},
                           {"rmse", fit.model.rmse},
                           {"kappa_cv", fit.model.kappa_cv},
                           {"candidates", candidates}});
    }
    run.write("fit.json", json_line(summary));
    run.out() << summary.dump(2) << '\n';
}

void cmd_occupancy(const Flags& flags, Run& run)
{
    const auto c       = resolve_config(flags, run);
    const auto records = load_records(c, run);
    json summary       = json::array();
    for (const auto& site : selected_sites(records, flags)) {
        const auto fit = fit_site(records, site, c.pipeline);
        run.write_with("occupancy_" + site + ".csv",
                       [&](std::ostream& s) { write_occupancy_csv(s, series_dates(fit.series), fit.occupancy); });
        summary.push_back({{"site_id", site},
                           {"rho_bar", fit.occupancy.rho_bar},
                           {"peak", fit.occupancy.peak()},
                           {"s_max", fit.model.s_max}});
    }
    run.write("occupancy.json", json_line(summary));
    run.out() << summary.dump(2) << '\n';
}

json utilization_json(const UtilizationStats& u)
{
    auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    return {{"mean_pct", u.mean_pct},
            {"sd_pct", u.sd_pct},
            {"pct_days_over_100", u.pct_days_over_100},
            {"excess_mean_pct", opt(u.excess_mean_pct)},
            {"excess_sd_pct", opt(u.excess_sd_pct)},
            {"pct_days_under_70", u.pct_days_under_70},
            {"shortfall_mean_pct", opt(u.shortfall_mean_pct)},
            {"shortfall_sd_pct", opt(u.shortfall_sd_pct)}};
}

void cmd_plan(const Flags& flags, Run& run)
{
    const auto c       = resolve_config(flags, run);
    const auto records = load_records(c, run);
    json printed       = json::array();
    std::vector<PlanTableRow> table;
    std::vector<std::pair<double, double>> weighted;
    for (const auto& site : selected_sites(records, flags)) {
        const auto fit = fit_site(records, site, c.pipeline);
        std::optional<int> actual;
        if (auto it = c.capacities.find(site); it != c.capacities.end()) {
            actual = it->second;
        }
        run.write("plan_" + site + ".json", plan_to_json(fit.plan) + "\n");
        table.push_back(plan_table_row(site, actual, fit.plan, c.pipeline.gamma));

        std::vector<std::pair<std::string, int>> capacities;
        if (actual) {
            capacities.emplace_back("actual", *actual);
        }
        capacities.emplace_back("B_average", fit.plan.b_average);
        for (const auto& [target, beds] : fit.plan.b_overflow) {
            capacities.emplace_back(overflow_label(target.alpha), beds);
        }
        capacities.emplace_back("B_max", fit.plan.b_max);
        run.write_with("utilization_" + site + ".csv", [&](std::ostream& s) {
            write_utilization_csv(s, series_dates(fit.series), fit.series.census, capacities);
        });
        json util = json::object();
        for (const auto& [name, beds] : capacities) {
            util[name] = utilization_json(utilization_stats(fit.series.census, beds));
        }
        run.write("utilization_" + site + ".json", json_line(util));
        if (actual) {
            const auto u = utilization_stats(fit.series.census, *actual);
            weighted.emplace_back(u.mean_pct, static_cast<double>(fit.los_samples.size()));
        }

        for (const auto& [target, beds] : fit.plan.b_overflow) {
            printed.push_back({{"site_id", site},
                               {"gamma", target.gamma},
                               {"alpha", target.alpha},
                               {"b_overflow", beds},
                               {"b_average", fit.plan.b_average},
                               {"b_max", fit.plan.b_max}});
        }
    }
    run.write_with("plan_table.csv", [&](std::ostream& s) { write_plan_table_csv(s, table); });
    if (!weighted.empty()) {
        const auto agg = weighted_aggregate(weighted);
        run.write("utilization_system.json", json_line({{"weighted_mean_pct", agg.mean}, {"weighted_sd_pct", agg.sd}}));
    }
    run.out() << printed.dump(2) << '\n';
}

void cmd_scenario(const Flags& flags, Run& run)
{
    const auto c       = resolve_config(flags, run);
    const auto records = load_records(c, run);
    json summary       = json::array();
    for (const auto& site : selected_sites(records, flags)) {
        const auto fit      = fit_site(records, site, c.pipeline);
        const auto snapshot = make_site_snapshot(fit);
        const auto spec     = c.scenario.spec_for(fit.series.start, fit.series.size());
        const auto outcome  = run_scenario(snapshot, spec, c.pipeline);
        const auto dates    = series_dates(fit.series);
        run.write_with("scenario_occupancy_" + site + ".csv", [&](std::ostream& s) {
            s << "date,rho_baseline,rho_scenario,rho_delta\n";
            for (std::size_t i = 0; i < outcome.occupancy.rho.size(); ++i) {
                const auto t = outcome.occupancy.first_day + i;
                s << dates[t] << ',' << fit.occupancy.rho[i] << ',' << outcome.occupancy.rho[i] << ','
                  << outcome.occupancy.rho[i] - fit.occupancy.rho[i] << '\n';
            }
        });
        json entry{{"site_id", site},
                   {"beta_lambda", spec.beta_lambda},
                   {"beta_mu", spec.beta_mu},
                   {"beta_sigma2", spec.beta_sigma2},
                   {"baseline", json::parse(plan_to_json(fit.plan))},
                   {"scenario", json::parse(plan_to_json(outcome.plan))}};
        run.write("scenario_" + site + ".json", json_line(entry));
        if (flags.sensitivity) {
            const std::vector<Strategy> strategies = {Strategy::Overflow05, Strategy::Overflow01, Strategy::Max};
            const auto cells =
                variance_sensitivity(fit.inputs(), kVarianceMultipliers, strategies, c.pipeline.gamma);
            run.write_with("sensitivity_" + site + ".csv",
                           [&](std::ostream& s) { write_sensitivity_csv(s, cells); });
        }
        summary.push_back(entry);
    }
    run.out() << summary.dump(2) << '\n';
}

/// Calendar years fully covered by every site.
std::vector<int> full_years(const ProjectionHistory& history)
{
    std::vector<int> years;
    if (history.empty()) {
        return years;
    }
    const int first = year_of(history.front().start);
    for (int y = first; y < first + 200; ++y) {
        bool all = true, any_after = false;
        for (const auto& site : history) {
            all = all && site.annual_admissions(y).has_value();
            any_after = any_after || site.start + std::chrono::days(static_cast<long>(site.admit_count.size())) >
                                         first_day_of_year(y);
        }
        if (all) {
            years.push_back(y);
        }
        if (!any_after) {
            break;
        }
    }
    return years;
}

void cmd_project(const Flags& flags, Run& run)
{
    auto c             = resolve_config(flags, run);
    const auto records = load_records(c, run);
    const std::string births_path = !flags.births.empty() ? flags.births : c.births_csv.value_or("");
    if (!births_path.empty()) {
        const auto text = read_file(births_path);
        run.record_input("births", births_path, text);
        std::istringstream in(text);
        for (const auto& [year, births] : parse_births(in)) {
            c.projection.births[year] = births;
        }
    }
    if (!flags.years.empty()) {
        if (flags.years.size() != 2 || flags.years[1] < flags.years[0]) {
            throw CLI::ValidationError("--years", "expects FIRST LAST with FIRST <= LAST");
        }
        c.projection.y_min = flags.years[0];
        c.projection.y_max = flags.years[1];
    }
    if (c.projection.y_min == 0 && c.projection.y_max == 0) {
        if (c.projection.births.empty()) {
            throw Error(ErrorCode::MissingBirths, "no projected births given (config projection.births or --births)");
        }
        c.projection.y_min = c.projection.births.begin()->first;
        c.projection.y_max = c.projection.births.rbegin()->first;
    }

    const auto sites = selected_sites(records, flags);
    ProjectionHistory history;
    for (const auto& site : sites) {
        history.push_back(make_site_snapshot(fit_site(records, site, c.pipeline)).history());
    }
    const auto covered = full_years(history);
    if (c.projection.y_ref_omega.empty()) {
        c.projection.y_ref_omega = covered;
    }
    if (c.projection.y_ref_nu.empty()) {
        c.projection.y_ref_nu = covered;
    }
    if (c.projection.y_ref_omega.empty()) {
        throw Error(ErrorCode::MissingHistory, "no calendar year is fully covered by the history");
    }
    run.set_seed(c.projection.seed);

    const auto summary = run_projection(c.projection, history);
    run.write_with("projection.csv", [&](std::ostream& s) { write_projection_csv(s, summary); });
    run.write("projection.json", projection_to_json(summary) + "\n");
    run.out() << projection_to_json(summary) << '\n';
}

std::vector<double> synthetic_rates(const Flags& flags)
{
    std::vector<double> lambda(static_cast<std::size_t>(flags.days));
    for (std::size_t t = 0; t < lambda.size(); ++t) {
        lambda[t] = flags.lambda * (1.0 + flags.amplitude * std::sin(2.0 * std::numbers::pi * t / 365.25));
    }
    return lambda;
}

void cmd_simulate(const Flags& flags, Run& run)
{
    const auto c = resolve_config(flags, run);
    if (!c.input) {
        // synthetic admissions fixture
        const auto family = parse_family(flags.family);
        if (!family) {
            throw CLI::ValidationError("--family", "unknown LOS family '" + flags.family + "'");
        }
        const auto start = parse_date(flags.start);
        if (!start) {
            throw CLI::ValidationError("--start", "expects YYYY-MM-DD");
        }
        if (flags.days < 1 || flags.num_sites < 1) {
            throw CLI::ValidationError("--days/--sites", "must be positive");
        }
        const LosSampler sampler(constant_model(*family, flags.mu, flags.kappa, flags.sigma2));
        const auto lambda = synthetic_rates(flags);
        std::vector<AdmissionRecord> records;
        for (int m = 0; m < flags.num_sites; ++m) {
            auto rng  = replication_rng(c.seed, static_cast<std::size_t>(m));
            auto site = synthesize_admissions("S" + std::to_string(m + 1), *start, lambda, sampler, rng);
            records.insert(records.end(), site.begin(), site.end());
        }
        run.write_with("admissions.csv", [&](std::ostream& s) { write_admissions(s, records, c.columns); });
        run.out() << json_line({{"records", records.size()}, {"sites", flags.num_sites}, {"days", flags.days}});
        return;
    }

    const auto records = load_records(c, run);
    json summary       = json::array();
    for (const auto& site : selected_sites(records, flags)) {
        const auto fit = fit_site(records, site, c.pipeline);
        SimConfig sim;
        const auto lambda = fit.lambda_t;
        sim.lambda        = [lambda](long t) { return lambda[static_cast<std::size_t>(t)]; };
        sim.los           = fit.model;
        sim.horizon       = static_cast<int>(lambda.size());
        sim.replications  = c.simulation.replications;
        sim.seed          = c.seed;
        const auto result = simulate(sim);
        const auto means  = result.mean_census();
        const auto dates  = series_dates(fit.series);
        run.write_with("simulation_" + site + ".csv", [&](std::ostream& s) {
            s << "date,expected_rho,simulated_mean";
            s << '\n';
            for (std::size_t i = 0; i < fit.occupancy.rho.size(); ++i) {
                const auto t = fit.occupancy.first_day + i;
                s << dates[t] << ',' << fit.occupancy.rho[i] << ',' << means[t] << '\n';
            }
        });
        json overflow = json::array();
        if (result.census.size() >= kMinOverflowReplications) {
            for (const auto& [target, beds] : fit.plan.b_overflow) {
                const auto e = empirical_overflow(result.census, std::floor(target.gamma * beds + 1e-9));
                overflow.push_back({{"gamma", target.gamma},
                                    {"alpha", target.alpha},
                                    {"beds", beds},
                                    {"frequency", e.frequency},
                                    {"std_error", e.std_error},
                                    {"trials", e.trials}});
            }
        }
        summary.push_back({{"site_id", site}, {"replications", sim.replications}, {"overflow", overflow}});
    }
    run.write("simulation.json", json_line(summary));
    run.out() << summary.dump(2) << '\n';
}

void cmd_diagnose(const Flags& flags, Run& run)
{
    const auto c       = resolve_config(flags, run);
    const auto records = load_records(c, run);
    std::vector<DiagnosticsReport> reports;
    for (const auto& site : selected_sites(records, flags)) {
        const auto window = c.pipeline.window ? *c.pipeline.window : site_window(records, site);
        const auto series = build_daily_series(records, site, window);
        reports.push_back(diagnose(site, series.admit_count, c.seed));
    }
    const auto text = diagnostics_to_json(reports);
    run.write("diagnostics.json", text + "\n");
    run.out() << text << '\n';
}

void cmd_serve(const Flags& flags, Run& run)
{
    auto c = resolve_config(flags, run);
    std::shared_ptr<const ModelSnapshot> snapshot;
    if (!flags.snapshot.empty()) {
        const auto text = read_file(flags.snapshot);
        run.record_input("snapshot", flags.snapshot, text);
        snapshot = std::make_shared<const ModelSnapshot>(snapshot_from_json(text));
    }
    else {
        const auto records = load_records(c, run);
        snapshot = std::make_shared<const ModelSnapshot>(
            build_snapshot(records, c.pipeline, c.capacities, utc_timestamp()));
    }
    if (flags.save_snapshot) {
        run.write("snapshot.json", snapshot_to_json(*snapshot) + "\n");
    }
    auto history = snapshot->history();
    if (c.projection.y_ref_omega.empty()) {
        c.projection.y_ref_omega = full_years(history);
    }
    if (c.projection.y_ref_nu.empty()) {
        c.projection.y_ref_nu = full_years(history);
    }
    if (c.projection.y_min == 0 && c.projection.y_max == 0 && !c.projection.births.empty()) {
        c.projection.y_min = c.projection.births.begin()->first;
        c.projection.y_max = c.projection.births.rbegin()->first;
    }
    run.finish();
    ApiService service(snapshot, c.projection);
    run.out() << "serving snapshot " << snapshot->id << " on http://" << flags.host << ':' << flags.port << std::endl;
    serve(service, flags.host, flags.port);
}

void add_common(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--input", f.input, "Admissions CSV (site_id, admit_date, los_days)");
    cmd->add_option("--config", f.config, "JSON configuration file");
    cmd->add_option("--site", f.sites, "Restrict to these sites (repeatable)");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--out", f.out, "Output directory (default: $BEDCAST_OUT, else ./bedcast_out)");
}

void add_planning(CLI::App* cmd, Flags& f)
{
    cmd->add_option("--gamma", f.gamma, "Usable capacity fraction in (0, 1]")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--alpha", f.alphas, "Overflow probability target in (0, 1) (repeatable)")
        ->check(CLI::Range(0.0, 1.0));
}

void check_flags(const Flags& f)
{
    if (f.gamma && !(*f.gamma > 0.0)) {
        throw CLI::ValidationError("--gamma", "must lie in (0, 1]");
    }
    for (double a : f.alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw CLI::ValidationError("--alpha", "must lie in (0, 1)");
        }
    }
    for (const auto& [name, v] : {std::pair{"--beta-lambda", f.beta_lambda}, std::pair{"--beta-mu", f.beta_mu}}) {
        if (v && !(*v > 0.0 && std::isfinite(*v))) {
            throw CLI::ValidationError(name, "must be positive");
        }
    }
    if (f.beta_sigma2 && !(*f.beta_sigma2 >= 0.0 && std::isfinite(*f.beta_sigma2))) {
        throw CLI::ValidationError("--beta-sigma2", "must be non-negative");
    }
    if (f.runs && *f.runs < 1) {
        throw CLI::ValidationError("--runs", "must be at least 1");
    }
    if (f.replications && *f.replications < 1) {
        throw CLI::ValidationError("--replications", "must be at least 1");
    }
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"bedcast: time-varying ICU bed occupancy and capacity planning"};
    app.require_subcommand(1);
    Flags f;

    auto* ingest    = app.add_subcommand("ingest", "Build daily series from admission records");
    auto* decompose = app.add_subcommand("decompose", "STL grid search on admissions and mean LOS");
    auto* fit       = app.add_subcommand("fit", "Select the LOS distribution");
    auto* occupancy = app.add_subcommand("occupancy", "Expected occupancy from the fitted model");
    auto* plan      = app.add_subcommand("plan", "Bed counts for each strategy");
    auto* scenario  = app.add_subcommand("scenario", "What-if multipliers on arrivals, mean and variance of LOS");
    auto* project   = app.add_subcommand("project", "Births-driven Monte Carlo projection");
    auto* simulate_cmd = app.add_subcommand("simulate", "Census simulation, or a synthetic admissions file");
    auto* diagnose  = app.add_subcommand("diagnose", "Poisson-process diagnostics of daily admissions");
    auto* serve_cmd = app.add_subcommand("serve", "HTTP API over a fitted snapshot");

    for (auto* cmd : {ingest, decompose, fit, occupancy, plan, scenario, project, simulate_cmd, diagnose, serve_cmd}) {
        add_common(cmd, f);
    }
    for (auto* cmd : {plan, scenario, project, simulate_cmd, serve_cmd}) {
        add_planning(cmd, f);
    }
    scenario->add_option("--beta-lambda", f.beta_lambda, "Arrival rate multiplier");
    scenario->add_option("--beta-mu", f.beta_mu, "Mean LOS multiplier");
    scenario->add_option("--beta-sigma2", f.beta_sigma2, "LOS variance multiplier (Lognormal sites only)");
    scenario->add_flag("--sensitivity", f.sensitivity, "Also write the LOS variance sensitivity table");
    for (auto* cmd : {project, serve_cmd}) {
        cmd->add_option("--eta", f.eta, "Elasticity of admissions to births");
        cmd->add_option("--psi", f.psi, "Annual drift factor");
        cmd->add_option("--runs", f.runs, "Monte Carlo runs");
    }
    project->add_option("--births", f.births, "Projected births CSV (year, births)");
    project->add_option("--years", f.years, "First and last projected year")->expected(2);
    simulate_cmd->add_option("--replications", f.replications, "Replications per site");
    simulate_cmd->add_option("--days", f.days, "Synthetic horizon in days");
    simulate_cmd->add_option("--lambda", f.lambda, "Synthetic mean admissions per day");
    simulate_cmd->add_option("--amplitude", f.amplitude, "Relative amplitude of the annual cycle");
    simulate_cmd->add_option("--mu", f.mu, "Synthetic mean LOS in days");
    simulate_cmd->add_option("--family", f.family, "Synthetic LOS family");
    simulate_cmd->add_option("--kappa", f.kappa, "Synthetic LOS shape");
    simulate_cmd->add_option("--sigma2", f.sigma2, "Synthetic LOS variance (Lognormal)");
    simulate_cmd->add_option("--sites", f.num_sites, "Number of synthetic sites");
    simulate_cmd->add_option("--start", f.start, "First synthetic admission date");
    serve_cmd->add_option("--host", f.host, "Bind address");
    serve_cmd->add_option("--port", f.port, "Port");
    serve_cmd->add_option("--snapshot", f.snapshot, "Serve a saved snapshot instead of fitting --input");
    serve_cmd->add_flag("--save-snapshot", f.save_snapshot, "Write snapshot.json to the output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
        check_flags(f);
    }
    catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    std::string out_dir = f.out;
    if (out_dir.empty()) {
        const char* env = std::getenv("BEDCAST_OUT");
        out_dir         = env && *env ? env : "bedcast_out";
    }
    try {
        Run run(chosen->get_name(), out_dir, out);
        const std::string& name = chosen->get_name();
        if (name == "ingest") {
            cmd_ingest(f, run);
        }
        else if (name == "decompose") {
            cmd_decompose(f, run);
        }
        else if (name == "fit") {
            cmd_fit(f, run);
        }
        else if (name == "occupancy") {
            cmd_occupancy(f, run);
        }
        else if (name == "plan") {
            cmd_plan(f, run);
        }
        else if (name == "scenario") {
            cmd_scenario(f, run);
        }
        else if (name == "project") {
            cmd_project(f, run);
        }
        else if (name == "simulate") {
            cmd_simulate(f, run);
        }
        else if (name == "diagnose") {
            cmd_diagnose(f, run);
        }
        else if (name == "serve") {
            cmd_serve(f, run);
            return kExitOk;
        }
        run.finish();
    }
    catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << chosen->help();
        return kExitUsage;
    }
    catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::SchemaError ? kExitUsage : kExitData;
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitOk;
}

} // namespace bedcast
