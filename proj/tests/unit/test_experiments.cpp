// SPDX-License-Identifier: Apache-2.0
//
// irsopt: joint uplink power control, multi-user detection and IRS passive
// beamforming for delay-constrained mmWave systems
// Copyright (C) 2026 The irsopt authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "irsopt/error.hpp"
#include "irsopt/experiments.hpp"

using namespace irsopt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace {

ExperimentSpec small_spec()
{
    ExperimentSpec s = preset("two-user");
    s.grid = {0.0, 1.0};
    s.trials = 3;
    s.system.irs_az = 2;
    s.system.irs_el = 2;
    s.framework.max_outer = 20;
    return s;
}

fs::path tmp_file(const std::string& name)
{
    const fs::path dir = fs::path(IRSOPT_TEST_TMPDIR) / "experiments";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("presets carry the reference parameters", "[experiments]")
{
    for (const ExperimentSpec& s : scenario_defaults())
    {
        INFO(s.name);
        CHECK_NOTHROW(s.validate());
        CHECK(s.system.ap_antennas == 32);
        CHECK(s.system.irs_az == 5);
        CHECK_THAT(watts_to_dbm(s.system.noise_power_w), WithinAbs(-85.0, 1e-9));
        CHECK(s.system.bandwidth_hz == 500e6);
        CHECK(s.system.nlos_paths == 3);
        CHECK(s.data_min_nats == 5000.0);
        CHECK(s.data_max_nats == 8000.0);
        CHECK(s.system.geometry.ap == Point{0.0, 0.0, 0.0});
        CHECK(s.system.geometry.irs == Point{80.0, 0.0, 0.0});
        CHECK(s.system.geometry.users[0] == Point{40.0, 40.0, 0.0});
        CHECK(s.system.geometry.users[1].x == 50.0);
        CHECK(std::abs(s.system.geometry.users[1].y) == 20.0);
        if (s.variable != SweepVariable::latency)
            CHECK(s.system.latency_s == 0.05);
        if (s.variable != SweepVariable::reflection_gain)
            CHECK(s.system.gain.nu_db == 15.0);
        CHECK(s.output == s.name + ".csv");
    }
}

TEST_CASE("named presets sweep the intended variable", "[experiments]")
{
    const ExperimentSpec f4 = preset("fig4-olos");
    CHECK(f4.variable == SweepVariable::irs_elements);
    CHECK(f4.system.blockage_prob == 1.0);
    CHECK(f4.grid == std::vector<double>{8, 16, 32, 64});
    const ExperimentSpec f5 = preset("fig5");
    CHECK(f5.variable == SweepVariable::user1_x);
    CHECK(f5.grid.front() == 10.0);
    CHECK(f5.grid.back() == 70.0);
    const ExperimentSpec f8 = preset("fig8");
    CHECK(f8.variable == SweepVariable::blockage_prob);
    CHECK(f8.grid.front() == 0.0);
    CHECK(f8.grid.back() == 1.0);
    CHECK_THROWS_AS(preset("fig99"), SpecError);
}

TEST_CASE("sweep application", "[experiments]")
{
    const SystemConfig base;
    const SystemConfig n64 = apply_sweep(base, SweepVariable::irs_elements, 64);
    CHECK(n64.irs_elements() == 64);
    CHECK(n64.irs_az <= 5);
    CHECK(apply_sweep(base, SweepVariable::irs_elements, 7).irs_elements() == 7);
    CHECK(apply_sweep(base, SweepVariable::user1_x, 25).geometry.users[0].x == 25.0);
    CHECK(apply_sweep(base, SweepVariable::blockage_prob, 0.5).blockage_prob == 0.5);
    CHECK(apply_sweep(base, SweepVariable::latency, 0.02).latency_s == 0.02);
    CHECK(apply_sweep(base, SweepVariable::user_antennas, 4).user_antennas == 4);
    CHECK(apply_sweep(base, SweepVariable::reflection_gain, 10).gain.nu_db == 10.0);
    CHECK_THROWS_AS(apply_sweep(base, SweepVariable::irs_elements, 2.5), SpecError);
}

TEST_CASE("spec text round trips", "[experiments]")
{
    for (const ExperimentSpec& s : scenario_defaults())
    {
        const std::string text = serialize_spec(s);
        const ExperimentSpec back = parse_spec(text);
        CHECK(serialize_spec(back) == text);
        CHECK(back.system == s.system);
        CHECK(back.grid == s.grid);
        CHECK(back.solvers == s.solvers);
        CHECK(back.seed == s.seed);
    }
}

TEST_CASE("minimal spec takes defaults", "[experiments]")
{
    const ExperimentSpec s = parse_spec(R"({"sweep": {"variable": "rho_b", "grid": [0, 1]}, "trials": 2})");
    CHECK(s.trials == 2);
    CHECK(s.variable == SweepVariable::blockage_prob);
    CHECK(s.system == SystemConfig{});
    const ExperimentSpec d = parse_spec(R"({"sweep": {"variable": "N", "grid": [4]},
                                            "system": {"noise_power_dbm": -90}})");
    CHECK_THAT(watts_to_dbm(d.system.noise_power_w), WithinAbs(-90.0, 1e-9));
}

TEST_CASE("invalid specs are rejected", "[experiments]")
{
    const char* bad[] = {
        "not json",
        R"({"trials": 2})",
        R"({"sweep": {"variable": "N", "grid": []}})",
        R"({"sweep": {"variable": "N", "grid": [8]}, "trials": 0})",
        R"({"sweep": {"variable": "X", "grid": [8]}})",
        R"({"sweep": {"variable": "N", "grid": [8]}, "solvers": ["sdr"]})",
        R"({"sweep": {"variable": "N", "grid": [8]}, "solvers": []})",
        R"({"sweep": {"variable": "N", "grid": [8]}, "colour": 1})",
        R"({"sweep": {"variable": "N", "grid": [8]}, "system": {"ap_antenas": 4}})",
        R"({"sweep": {"variable": "rho_b", "grid": [1.5]}})",
        R"({"sweep": {"variable": "N", "grid": [8]}, "system": {"noise_power_w": 1e-12, "noise_power_dbm": -90}})",
        R"({"sweep": {"variable": "N", "grid": [8]}, "trials": "ten"})",
        R"({"sweep": {"variable": "N", "grid": [8]}, "data_nats": {"min": 9000, "max": 8000}})",
    };
    for (const char* text : bad)
    {
        INFO(text);
        CHECK_THROWS_AS(parse_spec(text), SpecError);
    }
    CHECK_THROWS_AS(load_spec(tmp_file("does-not-exist.json")), IoError);
}

TEST_CASE("one trial of one solver gives one row", "[experiments]")
{
    ExperimentSpec s = small_spec();
    s.grid = {1.0};
    s.trials = 1;
    s.solvers = {Beamformer::none};
    const ResultTable t = run_experiment(s, 1);
    REQUIRE(t.trials.size() == 1);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].solver == "none");
    CHECK(t.rows[0].sweep_value == 1.0);
    CHECK(t.trials[0].power_dbm.size() == 2);
}

TEST_CASE("solvers share the channel draw of a trial", "[experiments]")
{
    const ExperimentSpec s = small_spec();
    const ResultTable t = run_experiment(s, 2);
    CHECK(t.trials.size() == s.grid.size() * s.trials * s.solvers.size());
    std::map<std::pair<double, std::size_t>, std::set<std::uint64_t>> hashes;
    for (const TrialResult& r : t.trials)
        hashes[{r.sweep_value, r.trial}].insert(r.channel_hash);
    std::set<std::uint64_t> distinct;
    for (const auto& [key, set] : hashes)
    {
        CHECK(set.size() == 1);
        distinct.insert(*set.begin());
    }
    CHECK(distinct.size() == hashes.size());
    // Rows in (value, solver name) order.
    for (std::size_t i = 1; i < t.rows.size(); ++i)
        CHECK(std::make_pair(t.rows[i - 1].sweep_value, t.rows[i - 1].solver) <
              std::make_pair(t.rows[i].sweep_value, t.rows[i].solver));
}

TEST_CASE("converged trials meet the latency bound", "[experiments][property]")
{
    const ExperimentSpec s = small_spec();
    const ResultTable t = run_experiment(s, 2);
    int converged = 0;
    for (const TrialResult& r : t.trials)
    {
        if (!r.converged)
            continue;
        ++converged;
        for (double l : r.latency_s)
            CHECK(l <= s.system.latency_s * (1.0 + 1e-6));
    }
    CHECK(converged > 0);
}

TEST_CASE("aggregation statistics", "[experiments]")
{
    std::vector<TrialResult> trials(3);
    const double w[] = {1e-3, 2e-3, 4e-3};
    for (std::size_t i = 0; i < 3; ++i)
    {
        TrialResult& r = trials[i];
        r.sweep_value = 1.0;
        r.solver = Beamformer::ccmo;
        r.trial = i;
        r.feasible = i < 2;
        r.converged = true;
        r.sum_power_w = w[i];
        r.power_dbm = {watts_to_dbm(w[i])};
        r.latency_s = {0.04};
        r.outer_iterations = 3;
    }
    const auto rows = aggregate(trials);
    REQUIRE(rows.size() == 1);
    const MetricStats& sp = rows[0].metrics[0];
    // Feasible trials only: 0 dBm and 3.0103 dBm.
    CHECK_THAT(sp.mean, WithinAbs(0.5 * watts_to_dbm(2e-3), 1e-12));
    CHECK_THAT(sp.std, WithinRel(watts_to_dbm(2e-3) / std::sqrt(2.0), 1e-12));
    CHECK_THAT(rows[0].metrics[5].mean, WithinRel(2.0 / 3.0, 1e-15));
    CHECK_THAT(rows[0].metrics[4].mean, WithinRel(1.0, 1e-15));
    CHECK_THAT(rows[0].metrics[2].max, WithinRel(40.0, 1e-12));
}

TEST_CASE("CSV schema and round trip", "[experiments]")
{
    const ResultTable t = run_experiment(small_spec(), 2);
    const std::string csv = format_csv(t.rows);
    std::istringstream in(csv);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line))
    {
        ++lines;
        CHECK(std::count(line.begin(), line.end(), ',') == 1 + 4 * static_cast<long>(kMetricNames.size()));
    }
    CHECK(lines == t.rows.size() + 1);
    const auto back = parse_csv(csv);
    REQUIRE(back.size() == t.rows.size());
    for (std::size_t i = 0; i < back.size(); ++i)
    {
        CHECK(back[i].solver == t.rows[i].solver);
        CHECK(back[i].sweep_value == t.rows[i].sweep_value);
        for (std::size_t m = 0; m < kMetricNames.size(); ++m)
        {
            const MetricStats& a = back[i].metrics[m];
            const MetricStats& b = t.rows[i].metrics[m];
            for (auto [x, y] : {std::pair{a.mean, b.mean}, {a.std, b.std}, {a.min, b.min}, {a.max, b.max}})
            {
                if (std::isnan(y))
                    CHECK(std::isnan(x));
                else
                    CHECK_THAT(x, WithinAbs(y, 1e-9 * (1.0 + std::abs(y))));
            }
        }
    }
    CHECK_THROWS_AS(parse_csv("sweep_value,solver\n1,none\n"), DomainError);
}

TEST_CASE("CSV emission errors", "[experiments]")
{
    const fs::path empty = tmp_file("empty.csv");
    fs::remove(empty);
    CHECK_THROWS_AS(emit_csv(ResultTable{}, empty), DomainError);
    CHECK_FALSE(fs::exists(empty));
    ExperimentSpec s = small_spec();
    s.trials = 1;
    s.grid = {1.0};
    s.solvers = {Beamformer::none};
    const ResultTable t = run_experiment(s, 1);
    CHECK_THROWS_AS(emit_csv(t, tmp_file("missing-dir") / "nested" / "x.csv"), IoError);
}

TEST_CASE("reruns are byte identical regardless of thread count", "[experiments][property]")
{
    const ExperimentSpec s = small_spec();
    const fs::path a = tmp_file("rerun_a.csv");
    const fs::path b = tmp_file("rerun_b.csv");
    emit_csv(run_experiment(s, 1), a);
    emit_csv(run_experiment(s, 4), b);
    const std::string ta = slurp(a);
    CHECK(!ta.empty());
    CHECK(ta == slurp(b));
}

TEST_CASE("trial streams and data sizes", "[experiments]")
{
    Rng a = trial_rng(7, 3, 0);
    Rng b = trial_rng(7, 3, 0);
    Rng c = trial_rng(7, 3, 1);
    Rng d = trial_rng(7, 4, 0);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    Rng r(1);
    const auto sizes = draw_data_sizes(4, 5000, 8000, r);
    CHECK(std::is_sorted(sizes.rbegin(), sizes.rend()));
    for (double v : sizes)
    {
        CHECK(v >= 5000.0);
        CHECK(v <= 8000.0);
    }
}

TEST_CASE("metadata and plot script describe the run", "[experiments]")
{
    const ExperimentSpec s = preset("fig8");
    const std::string meta = run_metadata(s);
    CHECK(meta.find("fixed_random") != std::string::npos);
    CHECK(meta.find("\"trials\"") != std::string::npos);
    const std::string script = plot_script(s, "fig8.csv");
    CHECK(script.find("fig8.csv") != std::string::npos);
    CHECK(script.find("matplotlib") != std::string::npos);
}
