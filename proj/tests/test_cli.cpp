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
#include "test_support.h"

#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bedcast;
namespace fs = std::filesystem;
using json   = nlohmann::json;

namespace
{

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args)
{
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out  = out.str();
    r.err  = err.str();
    return r;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

/// Scratch directory holding the two-site admissions file.
struct Workspace {
    fs::path root;
    fs::path input;

    explicit Workspace(const std::string& name)
        : root(fs::temp_directory_path() / ("bedcast_cli_" + name))
    {
        fs::remove_all(root);
        fs::create_directories(root);
        input = root / "admissions.csv";
        std::ofstream f(input);
        write_admissions(f, test::two_site_records());
    }
    ~Workspace()
    {
        fs::remove_all(root);
    }
    std::string out(const std::string& sub) const
    {
        return (root / sub).string();
    }
};

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("usage errors exit 2")
    {
        const auto unknown = run({"plan", "--bogus"});
        CHECK(unknown.code == kExitUsage);
        CHECK(unknown.err.find("--bogus") != std::string::npos);
        CHECK(run({}).code == kExitUsage);
        CHECK(run({"frobnicate"}).code == kExitUsage);
        CHECK(run({"plan", "--gamma", "2", "--input", "x.csv"}).code == kExitUsage);
    }

    TEST_CASE("data errors exit 1")
    {
        const auto missing = run({"ingest", "--input", "/nonexistent/file.csv", "--out", "/tmp/bedcast_cli_missing"});
        CHECK(missing.code == kExitData);
        CHECK_FALSE(missing.err.empty());
    }

    TEST_CASE("config schema errors are usage errors")
    {
        Workspace ws("config");
        const auto cfg = ws.root / "bad.json";
        std::ofstream(cfg) << R"({"alpha": 1.5})";
        const auto r = run({"plan", "--config", cfg.string(), "--input", ws.input.string(), "--out", ws.out("o")});
        CHECK(r.code == kExitUsage);
        CHECK(r.err.find("/alpha") != std::string::npos);
    }

    TEST_CASE("plan prints integer overflow beds and writes artifacts")
    {
        Workspace ws("plan");
        const auto r = run({"plan", "--input", ws.input.string(), "--site", "A", "--gamma", "1", "--alpha", "0.05",
                            "--out", ws.out("o")});
        REQUIRE_MESSAGE(r.code == kExitOk, r.err);
        const auto j = json::parse(r.out);
        REQUIRE(j.size() == 1);
        CHECK(j[0]["site_id"] == "A");
        CHECK(j[0]["b_overflow"].is_number_integer());
        CHECK(j[0]["b_overflow"] == test::two_site_snapshot().sites[0].plan.b_overflow.at({1.0, 0.05}));
        CHECK(fs::exists(ws.root / "o" / "plan_A.json"));
        CHECK(fs::exists(ws.root / "o" / "plan_table.csv"));
        CHECK(fs::exists(ws.root / "o" / "manifest.json"));
    }

    TEST_CASE("variance scenario on a non-lognormal site fails with exit 1")
    {
        Workspace ws("scenario");
        for (const auto& site : test::two_site_snapshot().sites) {
            const auto r = run({"scenario", "--input", ws.input.string(), "--site", site.site_id, "--beta-sigma2",
                                "0.5", "--out", ws.out("o")});
            if (site.model.family == LosFamily::Lognormal) {
                CHECK_MESSAGE(r.code == kExitOk, r.err);
            }
            else {
                CHECK(r.code == kExitData);
                CHECK(r.err.find("FamilyMismatch") != std::string::npos);
            }
        }
    }

    TEST_CASE("stage outputs are reproducible byte for byte")
    {
        Workspace ws("repro");
        for (const char* cmd : {"ingest", "decompose", "fit", "occupancy", "diagnose"}) {
            const auto a = run({cmd, "--input", ws.input.string(), "--site", "B", "--out", ws.out("a")});
            const auto b = run({cmd, "--input", ws.input.string(), "--site", "B", "--out", ws.out("b")});
            REQUIRE_MESSAGE(a.code == kExitOk, cmd << ": " << a.err);
            REQUIRE(b.code == kExitOk);
        }
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(ws.root / "a")) {
            const auto twin = ws.root / "b" / entry.path().filename();
            REQUIRE(fs::exists(twin));
            if (entry.path().filename() == "manifest.json") {
                continue;
            }
            CHECK_MESSAGE(slurp(entry.path()) == slurp(twin), entry.path().filename());
            ++files;
        }
        CHECK(files >= 8);
        const auto manifest = json::parse(slurp(ws.root / "a" / "manifest.json"));
        CHECK(manifest.contains("outputs"));
    }

    TEST_CASE("synthetic generator feeds ingest")
    {
        Workspace ws("simulate");
        const auto gen = run({"simulate", "--days", "400", "--sites", "2", "--lambda", "2", "--seed", "3", "--out",
                              ws.out("gen")});
        REQUIRE_MESSAGE(gen.code == kExitOk, gen.err);
        const auto csv = ws.root / "gen" / "admissions.csv";
        REQUIRE(fs::exists(csv));
        const auto ing = run({"ingest", "--input", csv.string(), "--out", ws.out("ing")});
        CHECK_MESSAGE(ing.code == kExitOk, ing.err);
    }

    TEST_CASE("projection from a births file")
    {
        Workspace ws("project");
        const auto births = ws.root / "births.csv";
        std::ofstream(births) << "year,births\n2024,19337\n2025,19900\n2026,20400\n";
        const auto r = run({"project", "--input", ws.input.string(), "--births", births.string(), "--runs", "3",
                            "--seed", "1", "--out", ws.out("o")});
        REQUIRE_MESSAGE(r.code == kExitOk, r.err);
        const auto j = json::parse(slurp(ws.root / "o" / "projection.json"));
        CHECK(j["rows"].size() == 6);
    }
}
