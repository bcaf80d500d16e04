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

#ifndef IRSOPT_EXPERIMENTS_HPP
#define IRSOPT_EXPERIMENTS_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "irsopt/framework.hpp"
#include "irsopt/system.hpp"

namespace irsopt {

enum class SweepVariable
{
    irs_elements,   // N
    user1_x,        // d_x1
    data_size,      // D
    reflection_gain,// nu
    blockage_prob,  // rho_b
    user_antennas,  // N_u
    latency         // T
};

std::string_view to_string(SweepVariable v);
SweepVariable parse_sweep_variable(std::string_view name);

struct ExperimentSpec
{
    std::string name = "custom";
    std::string description;
    SystemConfig system;
    SweepVariable variable = SweepVariable::irs_elements;
    std::vector<double> grid;
    std::size_t trials = 50;
    std::uint64_t seed = 1;
    std::vector<Beamformer> solvers{Beamformer::ccmo, Beamformer::admm, Beamformer::none, Beamformer::fixed_random};
    std::string output = "results.csv";
    double data_min_nats = 5000.0;
    double data_max_nats = 8000.0;
    FrameworkConfig framework;

    // Throws SpecError.
    void validate() const;
};

// JSON text; serialize(parse(x)) reproduces every field.
ExperimentSpec parse_spec(std::string_view text);
std::string serialize_spec(const ExperimentSpec& spec);
ExperimentSpec load_spec(const std::filesystem::path& path);

// Built-in scenarios at desk scale.
std::vector<ExperimentSpec> scenario_defaults();
ExperimentSpec preset(std::string_view name);

// Configuration for one grid point. N maps to (N_az, N_el) with N_az kept when it divides N, otherwise the
// largest divisor of N not exceeding N_az.
SystemConfig apply_sweep(const SystemConfig& base, SweepVariable variable, double value);

struct TrialResult
{
    double sweep_value = 0.0;
    Beamformer solver = Beamformer::none;
    std::size_t trial = 0;
    bool feasible = false;
    bool converged = false;
    std::vector<double> power_dbm;
    double sum_power_w = 0.0;
    std::vector<double> sinr;
    std::vector<double> latency_s;
    int outer_iterations = 0;
    double wall_ms = 0.0;
    std::uint64_t channel_hash = 0;
};

inline constexpr std::array<std::string_view, 6> kMetricNames{
    "sum_power_dbm", "max_user_power_dbm", "max_latency_ms", "outer_iterations", "converged", "feasible"};

struct MetricStats
{
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// One aggregated row per (grid point, solver). Power metrics and latency use feasible trials only.
struct AggregateRow
{
    double sweep_value = 0.0;
    std::string solver;
    std::array<MetricStats, kMetricNames.size()> metrics{};
};

struct ResultTable
{
    std::vector<TrialResult> trials;
    std::vector<AggregateRow> rows;  // sweep value ascending, then solver name ascending
};

// Channels are drawn per trial from (seed, trial) alone, so every solver and every grid point of a trial
// sees the same random quantities. threads = 0 uses the hardware concurrency.
ResultTable run_experiment(const ExperimentSpec& spec, unsigned threads = 0);

std::vector<AggregateRow> aggregate(const std::vector<TrialResult>& trials);

// Header "sweep_value,solver,<metric>_mean,<metric>_std,<metric>_min,<metric>_max,...".
// Throws DomainError on an empty table (no file is created) and IoError when the path is not writable.
void emit_csv(const ResultTable& table, const std::filesystem::path& path);
std::string format_csv(const std::vector<AggregateRow>& rows);
std::vector<AggregateRow> parse_csv(std::string_view text);

// FNV-1a over the raw channel coefficients.
std::uint64_t channel_hash(const ChannelSet& ch);

// Seeds for the per-trial random streams.
Rng trial_rng(std::uint64_t seed, std::size_t trial, std::uint64_t stream);

// Draws D_k ~ U(min, max), sorted descending.
std::vector<double> draw_data_sizes(std::size_t users, double min_nats, double max_nats, Rng& rng);

// Standalone matplotlib script that plots the CSV.
std::string plot_script(const ExperimentSpec& spec, const std::filesystem::path& csv_path);

// Metadata sidecar (JSON) describing the run.
std::string run_metadata(const ExperimentSpec& spec);

} // namespace irsopt

#endif
