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

// irs-sim: Monte-Carlo sweeps of the joint power / detector / IRS phase optimization.
//
//   irs-sim presets [--show <name>]
//   irs-sim validate (--spec <file> | --preset <name>)
//   irs-sim run (--spec <file> | --preset <name>) [--seed] [--out] [--solvers] [--trials] [--threads]
//               [--emit-plot-script] [--quiet]
//
// Exit codes: 0 success, 1 spec error, 2 I/O error.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "irsopt/error.hpp"
#include "irsopt/experiments.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSpec = 1;
constexpr int kExitIo = 2;

struct SpecSource
{
    std::string spec_path;
    std::string preset_name;
};

irsopt::ExperimentSpec resolve(const SpecSource& src)
{
    if (!src.spec_path.empty() && !src.preset_name.empty())
        throw irsopt::SpecError("give either --spec or --preset, not both");
    if (!src.spec_path.empty())
        return irsopt::load_spec(src.spec_path);
    if (!src.preset_name.empty())
        return irsopt::preset(src.preset_name);
    throw irsopt::SpecError("one of --spec or --preset is required");
}

std::vector<std::string> split_list(const std::string& text)
{
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw irsopt::IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out.flush())
        throw irsopt::IoError("failed writing '" + path.string() + "'");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Joint uplink power control, MVDR detection and IRS phase optimization sweeps"};
    app.require_subcommand(1);

    auto* presets_cmd = app.add_subcommand("presets", "List built-in scenarios");
    std::string show_name;
    presets_cmd->add_option("--show", show_name, "Print the full spec of one preset as JSON");

    SpecSource validate_src;
    auto* validate_cmd = app.add_subcommand("validate", "Check a spec without running it");
    validate_cmd->add_option("--spec", validate_src.spec_path, "JSON spec file");
    validate_cmd->add_option("--preset", validate_src.preset_name, "Built-in scenario name");

    SpecSource run_src;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::string out_path;
    std::string solvers;
    unsigned threads = 0;
    bool emit_plot = false;
    bool quiet = false;
    auto* run_cmd = app.add_subcommand("run", "Run a sweep and write aggregated CSV");
    run_cmd->add_option("--spec", run_src.spec_path, "JSON spec file");
    run_cmd->add_option("--preset", run_src.preset_name, "Built-in scenario name");
    run_cmd->add_option("--seed", seed, "Override the spec seed");
    run_cmd->add_option("--trials", trials, "Override trials per grid point");
    run_cmd->add_option("--out", out_path, "CSV output path (default: the spec output)");
    run_cmd->add_option("--solvers", solvers, "Comma list from ccmo,admm,none,fixed_random");
    run_cmd->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)");
    run_cmd->add_flag("--emit-plot-script", emit_plot, "Write <out>.plot.py next to the CSV");
    run_cmd->add_flag("--quiet", quiet, "No progress output");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitSpec;
    }

    try
    {
        if (presets_cmd->parsed())
        {
            if (!show_name.empty())
            {
                std::cout << irsopt::serialize_spec(irsopt::preset(show_name));
                return kExitOk;
            }
            for (const auto& s : irsopt::scenario_defaults())
                std::printf("%-14s %-6s %zu points  %s\n", s.name.c_str(),
                            std::string(irsopt::to_string(s.variable)).c_str(), s.grid.size(), s.description.c_str());
            return kExitOk;
        }

        if (validate_cmd->parsed())
        {
            const auto spec = resolve(validate_src);
            spec.validate();
            std::printf("ok: %s (%s sweep, %zu points, %zu trials, %zu solvers)\n", spec.name.c_str(),
                        std::string(irsopt::to_string(spec.variable)).c_str(), spec.grid.size(), spec.trials,
                        spec.solvers.size());
            return kExitOk;
        }

        auto spec = resolve(run_src);
        if (seed)
            spec.seed = *seed;
        if (trials)
            spec.trials = *trials;
        if (!solvers.empty())
        {
            spec.solvers.clear();
            for (const auto& name : split_list(solvers))
                spec.solvers.push_back(irsopt::parse_beamformer(name));
        }
        if (!out_path.empty())
            spec.output = out_path;
        spec.validate();

        const auto start = std::chrono::steady_clock::now();
        const auto table = irsopt::run_experiment(spec, threads);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        const std::filesystem::path csv = spec.output;
        irsopt::emit_csv(table, csv);
        write_text(std::filesystem::path(csv.string() + ".meta.json"), irsopt::run_metadata(spec));
        if (emit_plot)
            write_text(std::filesystem::path(csv.string() + ".plot.py"), irsopt::plot_script(spec, csv));

        if (!quiet)
        {
            std::size_t infeasible = 0;
            for (const auto& t : table.trials)
                infeasible += t.feasible ? 0 : 1;
            std::fprintf(stderr, "%s: %zu trials, %zu infeasible, %.1f s -> %s\n", spec.name.c_str(),
                         table.trials.size(), infeasible, seconds, csv.string().c_str());
        }
        return kExitOk;
    }
    catch (const irsopt::SpecError& e)
    {
        std::fprintf(stderr, "spec error: %s\n", e.what());
        return kExitSpec;
    }
    catch (const irsopt::IoError& e)
    {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    }
    catch (const irsopt::Error& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitSpec;
    }
}
